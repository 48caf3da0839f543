#include "mbcrb/kernels.hpp"

#include <immintrin.h>

namespace mbcrb::kernels::avx2 {

namespace {

// Reduces a 4-lane accumulator as (l0 + l2) + (l1 + l3).
inline double reduce_lanes(__m256d acc) {
  const __m128d low = _mm256_castpd256_pd128(acc);
  const __m128d high = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(low, high);
  const __m128d swapped = _mm_shuffle_pd(pair, pair, 1);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

void lower_affine_rows(const double* lower, const double* offset, const double* z, double* out,
                       std::size_t dim, std::size_t count) {
  const std::size_t blocked = count - count % 4;
  for (std::size_t i = 0; i < dim; ++i) {
    double* row = out + i * count;
    const __m256d base = _mm256_set1_pd(offset[i]);
    for (std::size_t k = 0; k < blocked; k += 4) {
      __m256d acc = base;
      for (std::size_t j = 0; j <= i; ++j) {
        const __m256d coeff = _mm256_set1_pd(lower[i * dim + j]);
        const __m256d zj = _mm256_loadu_pd(z + j * count + k);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coeff, zj));
      }
      _mm256_storeu_pd(row + k, acc);
    }
    for (std::size_t k = blocked; k < count; ++k) {
      double acc = offset[i];
      for (std::size_t j = 0; j <= i; ++j) {
        const double term = lower[i * dim + j] * z[j * count + k];
        acc = acc + term;
      }
      row[k] = acc;
    }
  }
}

double striped_sum(const double* x, std::size_t count) {
  const std::size_t blocked = count - count % 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t k = 0; k < blocked; k += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + k));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t k = blocked; k < count; ++k) lanes[k - blocked] += x[k];
  return reduce_lanes(_mm256_load_pd(lanes));
}

double striped_sum_squares(const double* x, std::size_t count) {
  const std::size_t blocked = count - count % 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t k = 0; k < blocked; k += 4) {
    const __m256d v = _mm256_loadu_pd(x + k);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t k = blocked; k < count; ++k) {
    const double sq = x[k] * x[k];
    lanes[k - blocked] += sq;
  }
  return reduce_lanes(_mm256_load_pd(lanes));
}

}  // namespace mbcrb::kernels::avx2

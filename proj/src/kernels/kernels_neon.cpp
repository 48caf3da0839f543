#include "mbcrb/kernels.hpp"

#include <arm_neon.h>

namespace mbcrb::kernels::neon {

// Lanes 0,1 live in `lo`, lanes 2,3 in `hi`; reduction is (l0 + l2) + (l1 + l3).

void lower_affine_rows(const double* lower, const double* offset, const double* z, double* out,
                       std::size_t dim, std::size_t count) {
  const std::size_t blocked = count - count % 2;
  for (std::size_t i = 0; i < dim; ++i) {
    double* row = out + i * count;
    const float64x2_t base = vdupq_n_f64(offset[i]);
    for (std::size_t k = 0; k < blocked; k += 2) {
      float64x2_t acc = base;
      for (std::size_t j = 0; j <= i; ++j) {
        const float64x2_t coeff = vdupq_n_f64(lower[i * dim + j]);
        acc = vaddq_f64(acc, vmulq_f64(coeff, vld1q_f64(z + j * count + k)));
      }
      vst1q_f64(row + k, acc);
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
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  for (std::size_t k = 0; k < blocked; k += 4) {
    lo = vaddq_f64(lo, vld1q_f64(x + k));
    hi = vaddq_f64(hi, vld1q_f64(x + k + 2));
  }
  double lanes[4];
  vst1q_f64(lanes, lo);
  vst1q_f64(lanes + 2, hi);
  for (std::size_t k = blocked; k < count; ++k) lanes[k - blocked] += x[k];
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double striped_sum_squares(const double* x, std::size_t count) {
  const std::size_t blocked = count - count % 4;
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  for (std::size_t k = 0; k < blocked; k += 4) {
    const float64x2_t a = vld1q_f64(x + k);
    const float64x2_t b = vld1q_f64(x + k + 2);
    lo = vaddq_f64(lo, vmulq_f64(a, a));
    hi = vaddq_f64(hi, vmulq_f64(b, b));
  }
  double lanes[4];
  vst1q_f64(lanes, lo);
  vst1q_f64(lanes + 2, hi);
  for (std::size_t k = blocked; k < count; ++k) {
    const double sq = x[k] * x[k];
    lanes[k - blocked] += sq;
  }
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

}  // namespace mbcrb::kernels::neon

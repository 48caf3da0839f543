#include "mbcrb/kernels.hpp"

namespace mbcrb::kernels::scalar {

void lower_affine_rows(const double* lower, const double* offset, const double* z, double* out,
                       std::size_t dim, std::size_t count) {
  for (std::size_t i = 0; i < dim; ++i) {
    double* row = out + i * count;
    for (std::size_t k = 0; k < count; ++k) {
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
  double lanes[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < count; ++k) lanes[k % 4] += x[k];
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double striped_sum_squares(const double* x, std::size_t count) {
  double lanes[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < count; ++k) {
    const double sq = x[k] * x[k];
    lanes[k % 4] += sq;
  }
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

}  // namespace mbcrb::kernels::scalar

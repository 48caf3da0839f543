#pragma once

// Data-parallel inner loops of the Monte Carlo engine.
//
// Every kernel has a scalar reference implementation and, where the build
// target allows it, an AVX2 (x86-64) or NEON (aarch64) variant. The variant
// is chosen at runtime. All variants evaluate the same arithmetic in the same
// order (4-lane striped accumulation, no fused multiply-add), so they agree
// bit for bit with the scalar reference.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace mbcrb::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

/// out row i = offset[i] + sum_{j<=i} lower[i*dim+j] * z row j.
/// `z` and `out` are dim x count, row-major, rows contiguous.
using LowerAffineRowsFn = void (*)(const double* lower, const double* offset, const double* z,
                                   double* out, std::size_t dim, std::size_t count);
/// Sum with four interleaved accumulators: element k goes to lane k % 4 and
/// the lanes are combined as (l0 + l2) + (l1 + l3).
using StripedSumFn = double (*)(const double* x, std::size_t count);
/// Same accumulation order as StripedSumFn, applied to x[k] * x[k].
using StripedSumSquaresFn = double (*)(const double* x, std::size_t count);

struct KernelTable {
  Isa isa;
  LowerAffineRowsFn lower_affine_rows;
  StripedSumFn striped_sum;
  StripedSumSquaresFn striped_sum_squares;
};

bool is_supported(Isa isa);

/// Best supported variant, unless overridden by the MBCRB_KERNELS environment
/// variable (scalar | avx2 | neon) or by set_active().
const KernelTable& active();

/// Throws std::invalid_argument when `isa` is not supported on this host.
const KernelTable& table_for(Isa isa);
void set_active(Isa isa);

void lower_affine_rows(std::span<const double> lower, std::span<const double> offset,
                       std::span<const double> z, std::span<double> out, std::size_t dim);
double striped_sum(std::span<const double> x);
double striped_sum_squares(std::span<const double> x);

namespace scalar {
void lower_affine_rows(const double* lower, const double* offset, const double* z, double* out,
                       std::size_t dim, std::size_t count);
double striped_sum(const double* x, std::size_t count);
double striped_sum_squares(const double* x, std::size_t count);
}  // namespace scalar

namespace avx2 {
void lower_affine_rows(const double* lower, const double* offset, const double* z, double* out,
                       std::size_t dim, std::size_t count);
double striped_sum(const double* x, std::size_t count);
double striped_sum_squares(const double* x, std::size_t count);
}  // namespace avx2

namespace neon {
void lower_affine_rows(const double* lower, const double* offset, const double* z, double* out,
                       std::size_t dim, std::size_t count);
double striped_sum(const double* x, std::size_t count);
double striped_sum_squares(const double* x, std::size_t count);
}  // namespace neon

}  // namespace mbcrb::kernels

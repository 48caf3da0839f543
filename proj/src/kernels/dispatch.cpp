#include "mbcrb/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mbcrb::kernels {

namespace {

constexpr KernelTable kScalarTable{Isa::scalar, &scalar::lower_affine_rows, &scalar::striped_sum,
                                   &scalar::striped_sum_squares};
#if defined(MBCRB_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::avx2, &avx2::lower_affine_rows, &avx2::striped_sum,
                                 &avx2::striped_sum_squares};
#endif
#if defined(MBCRB_HAVE_NEON)
constexpr KernelTable kNeonTable{Isa::neon, &neon::lower_affine_rows, &neon::striped_sum,
                                 &neon::striped_sum_squares};
#endif

const KernelTable* best_table() {
  if (const char* forced = std::getenv("MBCRB_KERNELS")) {
    if (auto isa = parse_isa(forced); isa && is_supported(*isa)) return &table_for(*isa);
  }
#if defined(MBCRB_HAVE_AVX2)
  if (is_supported(Isa::avx2)) return &kAvx2Table;
#endif
#if defined(MBCRB_HAVE_NEON)
  return &kNeonTable;
#endif
  return &kScalarTable;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{best_table()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "neon") return Isa::neon;
  return std::nullopt;
}

bool is_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(MBCRB_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(MBCRB_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!is_supported(isa)) {
    throw std::invalid_argument("kernel variant not supported on this host: " +
                                std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(MBCRB_HAVE_AVX2)
    case Isa::avx2: return kAvx2Table;
#endif
#if defined(MBCRB_HAVE_NEON)
    case Isa::neon: return kNeonTable;
#endif
    default: return kScalarTable;
  }
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { active_slot().store(&table_for(isa), std::memory_order_release); }

void lower_affine_rows(std::span<const double> lower, std::span<const double> offset,
                       std::span<const double> z, std::span<double> out, std::size_t dim) {
  if (dim == 0) return;
  const std::size_t count = z.size() / dim;
  if (lower.size() != dim * dim || offset.size() != dim || z.size() != dim * count ||
      out.size() != z.size()) {
    throw std::invalid_argument("lower_affine_rows: inconsistent buffer sizes");
  }
  active().lower_affine_rows(lower.data(), offset.data(), z.data(), out.data(), dim, count);
}

double striped_sum(std::span<const double> x) { return active().striped_sum(x.data(), x.size()); }

double striped_sum_squares(std::span<const double> x) {
  return active().striped_sum_squares(x.data(), x.size());
}

}  // namespace mbcrb::kernels

#include "mbcrb/kernels.hpp"

#include <doctest.h>

#include <stdexcept>

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

using namespace mbcrb::kernels;

namespace {

std::vector<double> random_values(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = nd(gen);
  return v;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::vector<Isa> available_simd() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (is_supported(isa)) out.push_back(isa);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar striped sum follows the documented lane order") {
  const std::vector<double> x{1e16, 1.0, -1e16, 1.0, 3.0};
  // lanes: l0 = 1e16 + 3, l1 = 1, l2 = -1e16, l3 = 1
  const double expected = ((1e16 + 3.0) + -1e16) + (1.0 + 1.0);
  CHECK(same_bits(scalar::striped_sum(x.data(), x.size()), expected));
  CHECK(scalar::striped_sum(x.data(), 0) == 0.0);
}

TEST_CASE("striped sums agree with naive summation to rounding") {
  std::mt19937_64 gen(7);
  for (std::size_t n : {1u, 3u, 4u, 17u, 1000u}) {
    const auto x = random_values(gen, n);
    double naive = 0.0, naive_sq = 0.0;
    for (double v : x) {
      naive += v;
      naive_sq += v * v;
    }
    CHECK(scalar::striped_sum(x.data(), n) == doctest::Approx(naive).epsilon(1e-12));
    CHECK(scalar::striped_sum_squares(x.data(), n) == doctest::Approx(naive_sq).epsilon(1e-12));
  }
}

TEST_CASE("scalar lower_affine_rows matches a direct triangular product") {
  const double lower[9] = {2, 0, 0, 0.5, 1, 0, -1, 0.25, 3};
  const double offset[3] = {1, -2, 0.5};
  const std::vector<double> z{1, 2, 3, 4, 5, 6};  // 3 x 2
  std::vector<double> out(6);
  scalar::lower_affine_rows(lower, offset, z.data(), out.data(), 3, 2);
  CHECK(out[0] == 1 + 2 * 1);
  CHECK(out[1] == 1 + 2 * 2);
  CHECK(out[2] == -2 + 0.5 * 1 + 1 * 3);
  CHECK(out[3] == -2 + 0.5 * 2 + 1 * 4);
  CHECK(out[4] == doctest::Approx(0.5 - 1 * 1 + 0.25 * 3 + 3 * 5));
  CHECK(out[5] == doctest::Approx(0.5 - 1 * 2 + 0.25 * 4 + 3 * 6));
}

TEST_CASE("SIMD kernels are bit-identical to the scalar reference") {
  const auto variants = available_simd();
  if (variants.empty()) {
    MESSAGE("no SIMD variant on this host; equivalence checked against scalar only");
  }
  std::mt19937_64 gen(2024);
  for (Isa isa : variants) {
    const KernelTable& simd = table_for(isa);
    CAPTURE(isa_name(isa));
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto x = random_values(gen, n, 1e3);
      CHECK(same_bits(simd.striped_sum(x.data(), n), scalar::striped_sum(x.data(), n)));
      CHECK(same_bits(simd.striped_sum_squares(x.data(), n),
                      scalar::striped_sum_squares(x.data(), n)));
    }
    for (std::size_t dim = 1; dim <= 5; ++dim) {
      for (std::size_t count : {1u, 2u, 3u, 4u, 5u, 8u, 13u, 40u, 501u}) {
        auto lower = random_values(gen, dim * dim);
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = i + 1; j < dim; ++j) lower[i * dim + j] = 0.0;
        const auto offset = random_values(gen, dim, 10.0);
        const auto z = random_values(gen, dim * count);
        std::vector<double> a(dim * count), b(dim * count);
        simd.lower_affine_rows(lower.data(), offset.data(), z.data(), a.data(), dim, count);
        scalar::lower_affine_rows(lower.data(), offset.data(), z.data(), b.data(), dim, count);
        bool identical = true;
        for (std::size_t k = 0; k < a.size(); ++k) identical = identical && same_bits(a[k], b[k]);
        CHECK(identical);
      }
    }
  }
}

TEST_CASE("dispatch can be forced to the scalar path and back") {
  const Isa original = active().isa;
  set_active(Isa::scalar);
  CHECK(active().isa == Isa::scalar);
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(striped_sum(x) == 15.0);
  CHECK(striped_sum_squares(x) == 55.0);
  set_active(original);
  CHECK(active().isa == original);
  CHECK(parse_isa("avx2") == Isa::avx2);
  CHECK_FALSE(parse_isa("sse9").has_value());
  if (!is_supported(Isa::neon)) CHECK_THROWS_AS(table_for(Isa::neon), std::invalid_argument);
}

TEST_CASE("span wrapper rejects inconsistent buffers") {
  std::vector<double> lower(4), offset(2), z(6), out(5);
  CHECK_THROWS_AS(lower_affine_rows(lower, offset, z, out, 2), std::invalid_argument);
}

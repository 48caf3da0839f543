#include "mbcrb/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace mbcrb::rng {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : coords) {
    h = mix64(h ^ mix64(c + 0x632BE59BD9B4E019ULL));
  }
  return h;
}

std::uint64_t bits_of(double value) { return std::bit_cast<std::uint64_t>(value); }

double NormalStream::uniform_open() {
  // 53 random bits mapped to (0, 1]; zero is excluded so log() is finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void NormalStream::fill(std::span<double> out) {
  for (double& v : out) v = next();
}

}  // namespace mbcrb::rng

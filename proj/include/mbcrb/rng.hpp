#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace mbcrb::rng {

/// splitmix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives a stream seed from a master seed and a tuple of stream
/// coordinates. The result depends only on the values, never on the order in
/// which streams are requested, so parallel trials stay reproducible.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords);

/// Bit pattern of a double, used to key streams by grid value.
std::uint64_t bits_of(double value);

/// Standard normal generator: mt19937_64 (output fixed by the standard)
/// feeding a Box-Muller transform. std::normal_distribution is avoided since
/// its algorithm differs between standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next();
  void fill(std::span<double> out);

 private:
  double uniform_open();  // (0, 1]

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mbcrb::rng

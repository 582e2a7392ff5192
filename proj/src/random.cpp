#include "srf/random.hpp"

#include <cmath>
#include <numbers>

namespace srf {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer; full-period bijection on 64-bit words.
std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed)
    : seed_(seed), key_(mix(seed + kGolden)) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t key)
    : seed_(seed), key_(key) {}

RandomStream RandomStream::substream(std::uint64_t index) const {
  // Children draw from a key domain disjoint from the parent's counter walk.
  const std::uint64_t child_key =
      mix(key_ ^ mix((index + 1) * 0xD6E8FEB86659FD93ULL));
  return RandomStream(seed_, child_key);
}

std::uint64_t RandomStream::next_bits() {
  return mix(key_ + (++counter_) * kGolden);
}

double RandomStream::next_uniform() {
  // 53-bit mantissa, mapped to (0, 1] so log() below is always finite.
  return static_cast<double>((next_bits() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::vector<double> RandomStream::normal_sample(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = next_normal();
  return out;
}

}  // namespace srf

#pragma once

#include <cstdint>
#include <vector>

namespace srf {

/// Deterministic counter-based random stream. Draws are a pure function of
/// (key, counter), so identical seeds reproduce identical sequences and
/// substreams derived from one seed are independent by key separation.
/// Single-owner: parallel use requires explicit substream splitting.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Independent child stream; substream(i) != substream(j) for i != j and
  /// children never collide with the parent's own draw sequence.
  RandomStream substream(std::uint64_t index) const;

  /// Next 64 uniform random bits.
  std::uint64_t next_bits();

  /// Uniform draw in (0, 1].
  double next_uniform();

  /// Standard normal draw (Box-Muller, pairs cached).
  double next_normal();

  /// n independent standard normal draws, advancing the stream.
  std::vector<double> normal_sample(std::size_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  RandomStream(std::uint64_t seed, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace srf

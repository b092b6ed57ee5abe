#pragma once

#include <cstdint>

namespace flakilab {

/// Reproducible random stream identified by (seed, stream_id).
///
/// Algorithm: the pair is folded through the SplitMix64 finalizer into a
/// SplitMix64 state, whose first four outputs seed a xoshiro256** generator.
/// Floating-point and bounded-integer draws are defined here (not through
/// <random> distributions) so that a (seed, stream_id) pair yields the same
/// sequence on every platform and standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// True with probability `p`; p <= 0 is never true, p >= 1 always is.
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Unbiased integer in [0, n). `n` must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent child stream, a pure function of this stream's identity and `key`.
  RngStream substream(std::uint64_t key) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace flakilab

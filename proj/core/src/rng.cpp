#include "flakilab/rng.hpp"

namespace flakilab {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

// Full 64x64 -> 128-bit product as (high, low) words.
struct Wide {
  std::uint64_t hi;
  std::uint64_t lo;
};

constexpr Wide multiply(std::uint64_t a, std::uint64_t b) noexcept {
  const std::uint64_t a_lo = a & 0xffffffffULL, a_hi = a >> 32;
  const std::uint64_t b_lo = b & 0xffffffffULL, b_hi = b >> 32;
  const std::uint64_t ll = a_lo * b_lo;
  const std::uint64_t lh = a_lo * b_hi;
  const std::uint64_t hl = a_hi * b_lo;
  const std::uint64_t hh = a_hi * b_hi;
  const std::uint64_t mid = (ll >> 32) + (lh & 0xffffffffULL) + (hl & 0xffffffffULL);
  return {hh + (lh >> 32) + (hl >> 32) + (mid >> 32), (mid << 32) | (ll & 0xffffffffULL)};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t state = mix64(seed) ^ mix64(stream_id ^ 0x6a09e667f3bcc909ULL);
  for (auto& word : s_) {
    word = mix64(state);
    state += 0x9e3779b97f4a7c15ULL;
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  Wide m = multiply(next_u64(), n);
  if (m.lo < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (m.lo < threshold) m = multiply(next_u64(), n);
  }
  return m.hi;
}

RngStream RngStream::substream(std::uint64_t key) const noexcept {
  return RngStream(seed_, mix64(stream_id_ * 0xd1342543de82ef95ULL + mix64(key)));
}

}  // namespace flakilab

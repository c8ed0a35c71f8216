#pragma once

#include <cstdint>

namespace eprsim {

// Counter-based pseudo-random stream (SplitMix64). Each draw hashes an
// incrementing counter, so a stream is fully determined by its initial
// state and the number of draws made, independent of platform or thread.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
  z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
  return z ^ (z >> 33);
}
} // namespace detail

// Derives the substream for one trial. Trials never share a stream, so the
// runner may execute them in any order or in parallel without changing
// any drawn value.
inline SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
  return SplitMix64(detail::mix64(detail::mix64(seed) ^ (trial + 0x9E3779B97F4A7C15ull)));
}

} // namespace eprsim

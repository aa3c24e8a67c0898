#ifndef SARSA_PD_RNG_HPP
#define SARSA_PD_RNG_HPP

#include <cstdint>
#include <limits>

namespace sarsa_pd {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream keyed by (seed, stream, epoch).
///
/// Every agent draws from its own stream for a given epoch, so the values it
/// sees do not depend on which thread runs it or in what order agents are
/// visited. The n-th draw of a stream is mix64(key + n * golden), i.e. a
/// SplitMix64 sequence started at a key derived from the three coordinates.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t epoch)
      : key_(mix64(mix64(mix64(seed ^ 0x6A09E667F3BCC908ULL) + stream) + epoch)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n > 0. Lemire's multiply-shift with rejection.
  std::uint32_t below(std::uint32_t n) {
    std::uint64_t m = (next_u64() >> 32) * n;
    auto low = static_cast<std::uint32_t>(m);
    if (low < n) {
      const std::uint32_t threshold = static_cast<std::uint32_t>(-n) % n;
      while (low < threshold) {
        m = (next_u64() >> 32) * n;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Reserved epoch tags for streams that are not part of an epoch sweep.
inline constexpr std::uint64_t kInitLatticeTag = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kAssignKindsTag = 0xFFFF'FFFF'0000'0002ULL;
inline constexpr std::uint64_t kInitAgentsTag = 0xFFFF'FFFF'0000'0003ULL;

}  // namespace sarsa_pd

#endif  // SARSA_PD_RNG_HPP

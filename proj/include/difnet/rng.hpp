#pragma once

#include <cstdint>
#include <limits>

namespace difnet {

/// Counter-based 64-bit generator: the output is a bijective hash of an
/// incrementing counter, so streams are cheap to split by hashing a
/// (seed, stream) pair into a fresh starting counter.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream seed for `stream` derived from `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return SplitMix64::mix(SplitMix64::mix(base ^ 0x6A09E667F3BCC909ULL) + stream * 0x9E3779B97F4A7C15ULL);
}

// Fixed stream tags so that, e.g., the graph and the regressor data drawn
// from the same user seed never share a stream.
namespace stream_tag {
inline constexpr std::uint64_t graph = 1;
inline constexpr std::uint64_t profile = 2;
inline constexpr std::uint64_t data = 3;
inline constexpr std::uint64_t informed = 4;
}  // namespace stream_tag

}  // namespace difnet

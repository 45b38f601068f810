#pragma once

#include <cstdint>
#include <limits>

namespace gvcp {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t absorb(std::uint64_t state, std::uint64_t word) {
  return mix64(state + kGolden + mix64(word));
}

}  // namespace detail

/// Which phase of a generation consumes a stream.
enum class StreamRole : std::uint64_t { Init = 0, Map = 1, Reduce = 2 };

/// Counter-based random stream: draw i is a pure function of (key, i), so a
/// stream yields the same sequence no matter which thread consumes it.
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit RngStream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    ++counter_;
    return detail::mix64(key_ ^ detail::mix64(counter_ * detail::kGolden));
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

constexpr RngStream derive_rng_stream(std::uint64_t master_seed, std::uint64_t generation, StreamRole role,
                                      std::uint64_t unit_index) {
  std::uint64_t k = detail::mix64(master_seed);
  k = detail::absorb(k, generation);
  k = detail::absorb(k, static_cast<std::uint64_t>(role));
  k = detail::absorb(k, unit_index);
  return RngStream(k);
}

// The helpers below use only raw 64-bit draws so results are identical across
// standard library implementations (std distributions are not).

/// Uniform double in [0, 1) from the top 53 bits of one draw.
template <typename Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
template <typename Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

template <typename Rng>
bool bernoulli(Rng& rng, double p) {
  return uniform01(rng) < p;
}

}  // namespace gvcp

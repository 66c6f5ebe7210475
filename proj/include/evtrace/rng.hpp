#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace evtrace {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the stream is a pure function of the key, so a
/// (seed, frame, x, y, ...) key gives every work item its own reproducible
/// stream regardless of how work is scheduled. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t k : key) h = splitmix64(h ^ splitmix64(k));
    state_ = h;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64(state_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(CounterRng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace evtrace

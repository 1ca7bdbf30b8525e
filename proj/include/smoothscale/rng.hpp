#pragma once

#include <cmath>
#include <cstdint>

namespace smoothscale {

// Counter-based generator: the splitmix64 finalizer applied to
// key + golden * counter, where key itself is the finalizer applied to
// seed ^ (golden * (stream + 1)).
//
// Draw n of stream s is a pure function of (seed, s, n), so substreams can
// be handed to workers in any order and still reproduce the exact sequence
// a single-threaded run would see.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ (kGolden * (stream + 1)))) {}

  std::uint64_t next_u64() { return mix(key_ + kGolden * (++counter_)); }

  // Uniform on [0,1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0, ..., bound-1} via multiply-shift (bias < bound / 2^64).
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Exponential with rate 1, by inversion.
  double next_exponential() { return -std::log1p(-next_double()); }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace smoothscale

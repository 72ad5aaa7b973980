#pragma once

#include <cmath>
#include <cstdint>

namespace ouc {

// Counter-based random stream: the state is derived by hashing
// (seed, stream, substream), so sample i of a given (path, step) pair is
// independent of evaluation order and of any parallel schedule.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
             std::uint64_t substream = 0)
      : state_(mix(mix(mix(seed + kGamma) ^ rotl(stream, 24)) ^
                   rotl(substream, 48))) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on (0,1); never returns 0 or 1 exactly.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller, pairs cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ouc

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace capflow {

/// Counter-based random stream: the n-th draw is a pure function of
/// (seed, stream, n), so replicas can run on any thread in any order.
///
/// The mixing function is the SplitMix64 finalizer applied to a Weyl
/// sequence keyed by seed and stream.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return at(counter_++); }

  /// Draw number `index` of this stream, without advancing it.
  [[nodiscard]] result_type at(std::uint64_t index) const noexcept {
    return mix(key_ + (index + 1) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on (0, 1]; never returns 0 so -log(u) is finite.
  double uniform_open() noexcept { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double exponential(double rate) noexcept { return -std::log(uniform_open()) / rate; }

  [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace capflow

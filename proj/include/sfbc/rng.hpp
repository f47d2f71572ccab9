#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace sfbc {

// Stream tags keep the per-trial random streams disjoint.
enum class StreamTag : std::uint64_t {
  data = 1,
  channel = 2,
  noise = 3,
  doppler = 4,
  theory = 5,
  misc = 6,
};

// Mixes (master seed, trial index, stream tag) into an independent sub-seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, StreamTag tag);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

// Counter-based generator: output n is a SplitMix64 finalizer applied to
// key + n * golden-ratio increment. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform in (0, 1), never exactly 0.
  double uniform() noexcept;
  // Standard normal (polar method, second value cached).
  double gaussian() noexcept;
  // Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_gaussian(double variance) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace sfbc

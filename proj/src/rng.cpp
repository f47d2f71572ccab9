#include "sfbc/rng.hpp"

#include <cmath>
#include <numbers>

namespace sfbc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(master + kGolden);
  h = mix64(h ^ (a + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (b + 0x85157AF5ULL * kGolden));
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, StreamTag tag) {
  return derive_seed(master, index, static_cast<std::uint64_t>(tag));
}

CounterRng::result_type CounterRng::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
  // 53 random bits, shifted off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::gaussian() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_ = v * f;
  has_cached_ = true;
  return u * f;
}

std::complex<double> CounterRng::complex_gaussian(double variance) noexcept {
  const double s = std::sqrt(0.5 * variance);
  const double re = gaussian();
  const double im = gaussian();
  return {s * re, s * im};
}

}  // namespace sfbc

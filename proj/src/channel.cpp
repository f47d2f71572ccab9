#include "sfbc/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "sfbc/errors.hpp"

namespace sfbc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Phasors advance by recursion and are re-anchored exactly this often.
constexpr std::size_t kPhasorResync = 256;

double doppler_frequency(double doppler, int m) {
  const double angle = kTwoPi * (m + 0.5) / kDopplerSinusoids;
  return doppler * std::cos(angle);
}

std::vector<cplx> convolve_static(std::span<const cplx> x, std::span<const cplx> taps) {
  std::vector<cplx> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    cplx acc{};
    const std::size_t reach = std::min<std::size_t>(taps.size(), n + 1);
    for (std::size_t t = 0; t < reach; ++t) acc += taps[t] * x[n - t];
    y[n] = acc;
  }
  return y;
}

void check_link_counts(const TimeFrame& frame, const ChannelRealization& ch) {
  if (frame.antennas() != ch.tx_antennas()) {
    throw ConfigError("frame has " + std::to_string(frame.antennas()) +
                      " antennas but the channel expects " + std::to_string(ch.tx_antennas()));
  }
}

}  // namespace

PowerDelayProfile PowerDelayProfile::exponential(int taps, double decay) {
  if (taps < 1) throw ConfigError("power delay profile needs at least one tap");
  PowerDelayProfile pdp;
  for (int tau = 0; tau < taps; ++tau) pdp.variances.push_back(std::exp(-tau / decay));
  return pdp;
}

FrequencyResponse ChannelRealization::frequency_response(int subcarriers) const {
  FrequencyResponse h(subcarriers, tx_, rx_);
  for (int k = 0; k < subcarriers; ++k) {
    for (int r = 0; r < rx_; ++r) {
      for (int t = 0; t < tx_; ++t) {
        cplx acc{};
        for (int tau = 0; tau < taps_; ++tau) {
          const double phase = -kTwoPi * static_cast<double>(k) * tau / subcarriers;
          acc += tap(t, r, tau) * std::polar(1.0, phase);
        }
        h(k, r, t) = acc;
      }
    }
  }
  return h;
}

void ImpairmentConfig::validate() const {
  if (!(clock_offset >= 0.0 && clock_offset < 1.0)) {
    throw ConfigError("clock offset must lie in [0, 1)");
  }
  if (!(doppler >= 0.0)) throw ConfigError("Doppler frequency must be non-negative");
  if (!std::isfinite(cfo)) throw ConfigError("CFO must be finite");
}

NoiseConfig NoiseConfig::from_snr_db(double snr_db, double total_power) {
  return {total_power * std::pow(10.0, -snr_db / 10.0)};
}

ChannelRealization draw_channel(int tx, int rx, const PowerDelayProfile& pdp, std::uint64_t seed) {
  if (tx < 1 || rx < 1) throw ConfigError("channel needs at least one antenna per side");
  for (double v : pdp.variances) {
    if (!(v > 0.0)) throw ConfigError("power delay profile variances must be positive");
  }
  ChannelRealization ch(tx, rx, pdp.variances);
  CounterRng rng(seed);
  for (int t = 0; t < tx; ++t) {
    for (int r = 0; r < rx; ++r) {
      for (int tau = 0; tau < pdp.taps(); ++tau) {
        ch.tap(t, r, tau) = rng.complex_gaussian(pdp.variances[tau]);
      }
    }
  }
  return ch;
}

std::vector<cplx> apply_clock_offset(std::span<const cplx> samples, double s) {
  if (!(s >= 0.0 && s < 1.0)) throw ConfigError("clock offset must lie in [0, 1)");
  std::vector<cplx> out(samples.begin(), samples.end());
  if (s == 0.0) return out;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    out[n] = (1.0 - s) * samples[n] + (n > 0 ? s * samples[n - 1] : cplx{});
  }
  return out;
}

TimeFrame apply_sto(const TimeFrame& frame, int sto, int subcarriers, int cp) {
  if (std::abs(sto) >= subcarriers + cp) {
    throw ConfigError("|STO| must be smaller than one OFDM symbol (N + cp)");
  }
  TimeFrame out(frame.antennas(), frame.length());
  const auto len = static_cast<std::ptrdiff_t>(frame.length());
  for (int a = 0; a < frame.antennas(); ++a) {
    auto src = frame.antenna(a);
    auto dst = out.antenna(a);
    for (std::ptrdiff_t m = 0; m < len; ++m) {
      const std::ptrdiff_t from = m + sto;
      dst[m] = (from >= 0 && from < len) ? src[from] : cplx{};
    }
  }
  return out;
}

std::vector<cplx> apply_cfo(std::span<const cplx> samples, double cfo, int subcarriers) {
  std::vector<cplx> out(samples.begin(), samples.end());
  if (cfo == 0.0) return out;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const double phase = kTwoPi * cfo * static_cast<double>(n) / subcarriers;
    out[n] *= std::polar(1.0, phase);
  }
  return out;
}

std::vector<cplx> doppler_tap_trajectory(cplx static_tap, double variance, double doppler,
                                         std::size_t length, CounterRng& rng) {
  // Gaussian sinusoid amplitudes conditioned on summing to the static tap:
  // a_m = h0 / M + (b_m - mean(b)), b_m ~ CN(0, variance / M).
  constexpr int M = kDopplerSinusoids;
  std::array<cplx, M> amp{};
  cplx mean{};
  for (auto& b : amp) {
    b = rng.complex_gaussian(variance / M);
    mean += b;
  }
  mean /= static_cast<double>(M);
  for (auto& b : amp) b = static_tap / static_cast<double>(M) + (b - mean);

  std::array<cplx, M> step{};
  std::array<cplx, M> phasor{};
  for (int m = 0; m < M; ++m) step[m] = std::polar(1.0, kTwoPi * doppler_frequency(doppler, m));

  std::vector<cplx> h(length);
  for (std::size_t n = 0; n < length; ++n) {
    if (n % kPhasorResync == 0) {
      for (int m = 0; m < M; ++m) {
        phasor[m] = std::polar(1.0, kTwoPi * doppler_frequency(doppler, m) * static_cast<double>(n));
      }
    }
    cplx acc{};
    for (int m = 0; m < M; ++m) {
      acc += amp[m] * phasor[m];
      phasor[m] *= step[m];
    }
    h[n] = acc;
  }
  return h;
}

cplx doppler_model_autocorrelation(double doppler, double lag) {
  cplx acc{};
  for (int m = 0; m < kDopplerSinusoids; ++m) {
    acc += std::polar(1.0, kTwoPi * doppler_frequency(doppler, m) * lag);
  }
  return acc / static_cast<double>(kDopplerSinusoids);
}

TimeFrame apply_doppler(const TimeFrame& frame, const ChannelRealization& ch, double doppler,
                        std::uint64_t seed) {
  check_link_counts(frame, ch);
  if (!(doppler >= 0.0)) throw ConfigError("Doppler frequency must be non-negative");
  const std::size_t len = frame.length();
  TimeFrame out(ch.rx_antennas(), len);

  if (doppler == 0.0) {
    std::vector<cplx> taps(ch.taps());
    for (int r = 0; r < ch.rx_antennas(); ++r) {
      auto dst = out.antenna(r);
      for (int t = 0; t < ch.tx_antennas(); ++t) {
        for (int tau = 0; tau < ch.taps(); ++tau) taps[tau] = ch.tap(t, r, tau);
        const auto y = convolve_static(frame.antenna(t), taps);
        for (std::size_t n = 0; n < len; ++n) dst[n] += y[n];
      }
    }
    return out;
  }

  CounterRng rng(seed);
  for (int r = 0; r < ch.rx_antennas(); ++r) {
    auto dst = out.antenna(r);
    for (int t = 0; t < ch.tx_antennas(); ++t) {
      auto x = frame.antenna(t);
      for (int tau = 0; tau < ch.taps(); ++tau) {
        const auto h = doppler_tap_trajectory(ch.tap(t, r, tau), ch.tap_variance(tau), doppler,
                                              len, rng);
        for (std::size_t n = static_cast<std::size_t>(tau); n < len; ++n) {
          dst[n] += h[n] * x[n - tau];
        }
      }
    }
  }
  return out;
}

TimeFrame apply_channel(const TimeFrame& frame, const ChannelRealization& ch,
                        const NoiseConfig& noise, const ImpairmentConfig& imp,
                        std::uint64_t seed, int subcarriers) {
  check_link_counts(frame, ch);
  imp.validate();
  if (noise.variance < 0.0) throw ConfigError("noise variance must be non-negative");

  TimeFrame out = apply_doppler(frame, ch, imp.doppler, derive_seed(seed, 0, StreamTag::doppler));
  CounterRng noise_rng(derive_seed(seed, 0, StreamTag::noise));
  for (int r = 0; r < out.antennas(); ++r) {
    auto stream = out.antenna(r);
    if (imp.clock_offset != 0.0) {
      const auto y = apply_clock_offset(stream, imp.clock_offset);
      std::copy(y.begin(), y.end(), stream.begin());
    }
    if (imp.cfo != 0.0) {
      const auto y = apply_cfo(stream, imp.cfo, subcarriers);
      std::copy(y.begin(), y.end(), stream.begin());
    }
    if (noise.variance > 0.0) {
      for (auto& v : stream) v += noise_rng.complex_gaussian(noise.variance);
    }
  }
  return out;
}

}  // namespace sfbc

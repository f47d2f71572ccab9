#pragma once

#include <cstdint>
#include <vector>

#include "sfbc/txchain.hpp"

namespace sfbc {

struct PowerDelayProfile {
  std::vector<double> variances;

  // sigma_tau^2 = exp(-tau / decay), tau = 0 .. taps-1.
  static PowerDelayProfile exponential(int taps = 4, double decay = 5.0);
  int taps() const noexcept { return static_cast<int>(variances.size()); }
};

// Per-sub-carrier N_r x N_t channel matrices H_k for one FFT size.
class FrequencyResponse {
 public:
  FrequencyResponse(int subcarriers, int tx, int rx)
      : subcarriers_(subcarriers), tx_(tx), rx_(rx),
        data_(static_cast<std::size_t>(subcarriers) * tx * rx) {}

  int subcarriers() const noexcept { return subcarriers_; }
  int tx_antennas() const noexcept { return tx_; }
  int rx_antennas() const noexcept { return rx_; }

  // H_k^(tx, rx) with 0-based bin k (sub-carrier k+1), tx and rx.
  cplx& operator()(int k, int rx, int tx) { return data_[(k * rx_ + rx) * tx_ + tx]; }
  const cplx& operator()(int k, int rx, int tx) const { return data_[(k * rx_ + rx) * tx_ + tx]; }

 private:
  int subcarriers_;
  int tx_;
  int rx_;
  std::vector<cplx> data_;
};

// Time-domain taps per (tx, rx) link, plus the delay profile they were drawn from.
class ChannelRealization {
 public:
  ChannelRealization(int tx, int rx, std::vector<double> tap_variances)
      : tx_(tx), rx_(rx), taps_(static_cast<int>(tap_variances.size())),
        variances_(std::move(tap_variances)),
        h_(static_cast<std::size_t>(tx) * rx * taps_) {}

  int tx_antennas() const noexcept { return tx_; }
  int rx_antennas() const noexcept { return rx_; }
  int taps() const noexcept { return taps_; }

  cplx& tap(int tx, int rx, int tau) { return h_[(tx * rx_ + rx) * taps_ + tau]; }
  const cplx& tap(int tx, int rx, int tau) const { return h_[(tx * rx_ + rx) * taps_ + tau]; }
  double tap_variance(int tau) const { return variances_[tau]; }

  // Length-N DFT of every link's taps (non-normalized, so y_k = H_k s_k).
  FrequencyResponse frequency_response(int subcarriers) const;

 private:
  int tx_;
  int rx_;
  int taps_;
  std::vector<double> variances_;
  std::vector<cplx> h_;
};

struct ImpairmentConfig {
  double clock_offset = 0.0;  // two-path [1 - s, s] sampling clock model, s in [0, 1)
  int sto = 0;                // FFT window offset in samples, positive = late
  double cfo = 0.0;           // fraction of the sub-carrier spacing
  double doppler = 0.0;       // maximum Doppler, fraction of the sampling rate

  void validate() const;
  bool none() const noexcept {
    return clock_offset == 0.0 && sto == 0 && cfo == 0.0 && doppler == 0.0;
  }
};

struct NoiseConfig {
  double variance = 0.0;  // per time-domain sample, per receive antenna

  // sigma_n^2 = P * 10^(-SNR/10).
  static NoiseConfig from_snr_db(double snr_db, double total_power = 1.0);
};

// Number of sinusoids in the sum-of-sinusoids Doppler model.
inline constexpr int kDopplerSinusoids = 16;

ChannelRealization draw_channel(int tx, int rx, const PowerDelayProfile& pdp, std::uint64_t seed);

// Linear convolution with the taps (static, or time-varying when
// imp.doppler > 0), then clock offset, CFO and AWGN. The output has the
// input's length; the STO is not applied here (see apply_sto).
TimeFrame apply_channel(const TimeFrame& frame, const ChannelRealization& ch,
                        const NoiseConfig& noise, const ImpairmentConfig& imp,
                        std::uint64_t seed, int subcarriers);

// out[n] = (1 - s) in[n] + s in[n - 1].
std::vector<cplx> apply_clock_offset(std::span<const cplx> samples, double s);

// Shifts every stream so a receiver window placed at the nominal symbol
// boundary actually starts `sto` samples later. Samples that fall outside
// the capture are zero. |sto| must be < N + cp.
TimeFrame apply_sto(const TimeFrame& frame, int sto, int subcarriers, int cp);

// Multiplies sample n by exp(j 2 pi cfo n / N).
std::vector<cplx> apply_cfo(std::span<const cplx> samples, double cfo, int subcarriers);

// Noise-free convolution with sum-of-sinusoids time-varying taps whose
// value at sample 0 equals the static taps. f_d == 0 gives the static path.
TimeFrame apply_doppler(const TimeFrame& frame, const ChannelRealization& ch, double doppler,
                        std::uint64_t seed);

// Time-varying tap trajectory used by apply_doppler, exposed for testing:
// taps(tx, rx, tau) over `length` samples.
std::vector<cplx> doppler_tap_trajectory(cplx static_tap, double variance, double doppler,
                                         std::size_t length, CounterRng& rng);

// Model autocorrelation E[h(t + lag) h*(t)] / variance of the sum-of-sinusoids process.
cplx doppler_model_autocorrelation(double doppler, double lag);

}  // namespace sfbc

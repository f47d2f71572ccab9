#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sfbc/channel.hpp"
#include "sfbc/classify.hpp"
#include "sfbc/errors.hpp"
#include "sfbc/features.hpp"
#include "sfbc/harness.hpp"
#include "sfbc/numerics.hpp"
#include "sfbc/theory.hpp"

using namespace sfbc;
using doctest::Approx;

namespace {

// y_k = H_k s_k + w_k directly in the frequency domain.
ResourceGrid received(const ResourceGrid& s, const FrequencyResponse& h, double noise_var,
                      std::uint64_t seed) {
  ResourceGrid y(h.rx_antennas(), s.subcarriers(), s.symbols());
  CounterRng rng(seed);
  for (int r = 0; r < h.rx_antennas(); ++r)
    for (int k = 0; k < s.subcarriers(); ++k)
      for (int n = 0; n < s.symbols(); ++n) {
        cplx acc{};
        for (int t = 0; t < h.tx_antennas(); ++t) acc += h(k, r, t) * s(t, k, n);
        y(r, k, n) = acc + (noise_var > 0 ? rng.complex_gaussian(noise_var) : cplx{});
      }
  return y;
}

ResourceGrid coded(CodeId code, int n, int nb, std::uint64_t seed) {
  CounterRng rng(seed);
  const auto shape = code_shape(code);
  const auto syms =
      map_symbols(rng, ModulationScheme::qpsk(), std::size_t(nb) * (n / shape.length) * shape.block_symbols);
  return assemble_grid(code, syms, n, nb, unit_power_scale(code));
}

double ks_chi2(std::vector<double> x, int dof) {
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = numerics::chi_square_cdf(x[i], dof);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

const AntennaPairSet kDefaultPairs({{1, 2}, {2, 1}});

}  // namespace

TEST_CASE("antenna pair sets") {
  AntennaPairSet s({{2, 1}, {1, 2}});
  CHECK(s.size() == 2);
  CHECK(s.pairs()[0] == AntennaPair{1, 2});
  CHECK(s.to_string() == "1-2,2-1");
  CHECK(AntennaPairSet::all_pairs(3).size() == 6);
  CHECK(AntennaPairSet::all_pairs(4).size() == 12);
  CHECK(AntennaPairSet::parse("2-3,1-2").pairs()[0] == AntennaPair{1, 2});
  CHECK_THROWS_AS(AntennaPairSet({{1, 1}}), ConfigError);
  CHECK_THROWS_AS(AntennaPairSet({{1, 2}, {1, 2}}), ConfigError);
  CHECK_THROWS_AS(AntennaPairSet({}), ConfigError);
  CHECK_THROWS_AS(AntennaPairSet::parse("12"), ConfigError);
}

TEST_CASE("grouping config") {
  GroupingConfig g{8};
  CHECK_NOTHROW(g.validate(512));
  CHECK(g.sub_block(512) == 64);
  CHECK(g.dof(2) == 32);
  CHECK_THROWS_AS(GroupingConfig{3}.validate(512), ConfigError);
  CHECK_THROWS_AS(GroupingConfig{0}.validate(512), ConfigError);
  CHECK_THROWS_AS(GroupingConfig{4}.validate(12), ConfigError);  // N' = 3 is odd
}

TEST_CASE("demodulation") {
  ResourceGrid s(2, 32, 3);
  CounterRng rng(1);
  for (auto& v : s.raw()) v = rng.complex_gaussian(1.0);
  const auto y = demodulate(ofdm_modulate(s, 5), 32, 5);
  for (std::size_t i = 0; i < s.raw().size(); ++i) CHECK(std::abs(y.raw()[i] - s.raw()[i]) < 1e-10);
  const auto z = demodulate(TimeFrame(2, 74), 32, 5);
  for (auto v : z.raw()) CHECK(v == cplx{});
  CHECK_THROWS_AS(demodulate(TimeFrame(2, 75), 32, 5), FrameError);
  CHECK_THROWS_AS(demodulate(TimeFrame(2, 0), 32, 5), FrameError);
}

TEST_CASE("cross-correlation estimator") {
  ResourceGrid g(2, 4, 1);
  g(0, 0, 0) = {1, 2};
  g(1, 2, 0) = {3, -1};
  CHECK(xcorr_estimate(g, 1, 2, 1, 3) == cplx(1, 2) * cplx(3, -1));
  CounterRng rng(2);
  ResourceGrid h(3, 8, 5);
  for (auto& v : h.raw()) v = rng.complex_gaussian(1.0);
  for (int k1 = 1; k1 <= 8; ++k1)
    for (int k2 = 1; k2 <= 8; ++k2) CHECK(xcorr_estimate(h, 1, 3, k1, k2) == xcorr_estimate(h, 3, 1, k2, k1));
  CHECK_THROWS_AS(xcorr_estimate(h, 1, 2, 0, 1), IndexError);
  CHECK_THROWS_AS(xcorr_estimate(h, 1, 4, 1, 1), IndexError);
  CHECK_THROWS_AS(xcorr_estimate(h, 1, 2, 1, 9), IndexError);
}

TEST_CASE("cross-correlation limits for SM and AL with a fixed channel") {
  const int n = 4, nb = 100000;
  const auto ch = draw_channel(2, 2, PowerDelayProfile::exponential(), 3);
  const auto h = ch.frequency_response(n);
  const double s2 = 0.5;
  std::vector<cplx> r1{h(0, 0, 0), h(0, 0, 1)}, r2{h(1, 1, 0), h(1, 1, 1)};
  const double se = std::sqrt(theory::sigma_epsilon_sq(r1, r2, s2, 0.0, nb));

  const auto ysm = received(coded(CodeId::sm, n, nb, 4), h, 0.0, 0);
  const cplx rsm = xcorr_estimate(ysm, 1, 2, 1, 2);
  CHECK(std::abs(rsm.real()) < 3 * se);
  CHECK(std::abs(rsm.imag()) < 3 * se);

  const auto yal = received(coded(CodeId::al, n, nb, 5), h, 0.0, 0);
  const cplx ral = xcorr_estimate(yal, 1, 2, 1, 2);
  const cplx expect = s2 * (h(0, 0, 0) * h(1, 1, 1) - h(0, 0, 1) * h(1, 1, 0));
  CHECK(std::abs(ral.real() - expect.real()) < 3 * se);
  CHECK(std::abs(ral.imag() - expect.imag()) < 3 * se);
  CHECK(std::abs(expect) > 10 * se);
}

TEST_CASE("estimator variance halves when N_b doubles") {
  const auto h = draw_channel(2, 2, PowerDelayProfile::exponential(), 6).frequency_response(4);
  auto var_at = [&](int nb) {
    double s = 0, s2 = 0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      const auto y = received(coded(CodeId::sm, 4, nb, 1000 + t), h, 0.1, 5000 + t);
      const double v = xcorr_estimate(y, 1, 2, 1, 2).real();
      s += v;
      s2 += v * v;
    }
    return s2 / trials - (s / trials) * (s / trials);
  };
  CHECK(var_at(10) / var_at(20) == Approx(2.0).epsilon(0.15));
}

TEST_CASE("stacked vectors") {
  CounterRng rng(7);
  ResourceGrid g(2, 8, 3);
  for (auto& v : g.raw()) v = rng.complex_gaussian(1.0);
  const auto r = stack_r(g, AntennaPairSet({{1, 2}}), 1, 2);
  const cplx c = xcorr_estimate(g, 1, 2, 1, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == c.real());
  CHECK(r[1] == c.imag());
  const auto r2 = stack_r(g, kDefaultPairs, 3, 4);
  REQUIRE(r2.size() == 4);
  CHECK(r2[1] == xcorr_estimate(g, 2, 1, 3, 4).real());
  CHECK(r2[3] == xcorr_estimate(g, 2, 1, 3, 4).imag());
  const auto t = stack_t(g, kDefaultPairs, 3, 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(t[i] == std::abs(r2[i]));

  ResourceGrid re(2, 8, 3);
  for (auto& v : re.raw()) v = rng.gaussian();
  const auto rr = stack_r(re, kDefaultPairs, 1, 2);
  CHECK(rr[2] == 0.0);
  CHECK(rr[3] == 0.0);
  CHECK_THROWS_AS(stack_r(g, AntennaPairSet({{1, 3}}), 1, 2), IndexError);
}

TEST_CASE("group vectors and covariance estimate on constant correlations") {
  const int n = 16;
  ResourceGrid g(2, n, 2);
  const cplx c = std::sqrt(cplx(1.0, 1.0));  // every product equals 1 + i
  for (auto& v : g.raw()) v = c;
  const auto vs = group_vectors(g, AntennaPairSet({{1, 2}}), GroupingConfig{2});
  REQUIRE(vs.size() == 2);
  for (const auto& v : vs) {
    CHECK(v[0] == Approx(std::sqrt(4.0)));
    CHECK(v[1] == Approx(std::sqrt(4.0)));
  }
  const auto one = group_vectors(g, AntennaPairSet({{1, 2}}), GroupingConfig{1});
  CHECK(one.size() == 1);
  CHECK(one[0][0] == Approx(std::sqrt(8.0)));
  const auto psi = estimate_psi(g, kDefaultPairs);
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(psi[i] == Approx(double(n - 2) / (n - 3)));
  const auto mu = estimate_mu(g, kDefaultPairs);
  for (double m : mu) CHECK(m == Approx(1.0));
  // |r| never varies, so the magnitude covariance is degenerate.
  CHECK_THROWS_AS(estimate_phi(g, kDefaultPairs, mu), SingularCovarianceError);
}

TEST_CASE("degenerate captures raise singular-covariance errors") {
  ResourceGrid zero(2, 64, 4);
  CHECK_THROWS_AS(statistic_u(zero, kDefaultPairs, GroupingConfig{1}), SingularCovarianceError);
  CHECK_THROWS_AS(statistic_t(zero, kDefaultPairs), SingularCovarianceError);
  CHECK_THROWS_AS(statistic_u(zero, kDefaultPairs, GroupingConfig{3}), ConfigError);
}

TEST_CASE("covariance estimate tracks the theoretical variance under SM") {
  const int n = 64, nb = 50;
  const auto h = draw_channel(2, 2, PowerDelayProfile{{1.0}}, 8).frequency_response(n);
  const double s2 = 0.5, w2 = 0.2;
  std::vector<cplx> r1{h(0, 0, 0), h(0, 0, 1)}, r2{h(0, 1, 0), h(0, 1, 1)};
  const double expect = theory::sigma_epsilon_sq(r1, r2, s2, w2, nb);
  double acc = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto y = received(coded(CodeId::sm, n, nb, 100 + t), h, w2, 9000 + t);
    acc += estimate_psi(y, AntennaPairSet({{1, 2}}))[0];
  }
  CHECK(acc / trials == Approx(expect).epsilon(0.10));
}

TEST_CASE("T is invariant to conjugation and to per-sub-carrier sign flips") {
  const int n = 64;
  const auto h = draw_channel(2, 2, PowerDelayProfile::exponential(), 10).frequency_response(n);
  const auto y = received(coded(CodeId::al, n, 20, 11), h, 0.1, 12);
  const double t0 = statistic_t(y, kDefaultPairs).value;
  ResourceGrid conj = y, flip = y;
  for (auto& v : conj.raw()) v = std::conj(v);
  CounterRng rng(13);
  for (int k = 0; k < n; ++k) {
    const double s = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int a = 0; a < 2; ++a)
      for (auto& v : flip.cell(a, k)) v *= s;
  }
  CHECK(statistic_t(conj, kDefaultPairs).value == Approx(t0).epsilon(1e-12));
  CHECK(statistic_t(flip, kDefaultPairs).value == Approx(t0).epsilon(1e-12));
  CHECK(statistic_t(y, kDefaultPairs).dof == 4);
  CHECK(statistic_t(y, kDefaultPairs).kind == StatisticKind::t);
}

TEST_CASE("statistic kinds and dispatch") {
  CHECK(parse_statistic_kind("U_C1") == StatisticKind::u_c1);
  CHECK_THROWS_AS(parse_statistic_kind("V"), ConfigError);
  const auto h = draw_channel(2, 2, PowerDelayProfile::exponential(), 14).frequency_response(64);
  const auto y = received(coded(CodeId::sm, 64, 10, 15), h, 0.1, 16);
  const auto u = compute_statistic(StatisticKind::u, y, kDefaultPairs, GroupingConfig{2});
  CHECK(u.value == statistic_u(y, kDefaultPairs, GroupingConfig{2}).value);
  CHECK(u.dof == 8);
  CHECK(u.value >= 0.0);
  CHECK(compute_statistic(StatisticKind::u_c2, y, kDefaultPairs, GroupingConfig{2}).kind ==
        StatisticKind::u_c2);
}

TEST_CASE("null statistics follow chi-square and coded signals exceed the threshold") {
  ExperimentConfig cfg;
  cfg.subcarriers = 256;
  cfg.symbols = 100;
  cfg.groups = 1;
  cfg.snr_db = 0.0;
  cfg.seed = 77;
  const GroupingConfig g{1};
  const int trials = 1000;
  std::vector<double> u, c1, c2;
  for (int t = 0; t < trials; ++t) {
    const auto y = simulate_grid(cfg, CodeId::sm, t);
    u.push_back(statistic_u(y, cfg.pairs, g).value);
    c1.push_back(statistic_u_c1(y, cfg.pairs, g).value);
    c2.push_back(statistic_u_c2(y, cfg.pairs, g).value);
  }
  const double crit = 1.628 / std::sqrt(double(trials));  // KS at the 1 % level
  CHECK(ks_chi2(u, 4) < crit);
  CHECK(ks_chi2(c1, 4) < crit);
  CHECK(ks_chi2(c2, 4) < crit);

  const double eta = compute_threshold(1e-3, 4);
  cfg.snr_db = 10.0;
  std::vector<double> al_u, s1_c1, s2_c1, s2_c2;
  for (int t = 0; t < 60; ++t) {
    al_u.push_back(statistic_u(simulate_grid(cfg, CodeId::al, t), cfg.pairs, g).value);
    const auto y1 = simulate_grid(cfg, CodeId::sfbc1, t);
    s1_c1.push_back(statistic_u_c1(y1, cfg.pairs, g).value);
    const auto y2 = simulate_grid(cfg, CodeId::sfbc2, t);
    s2_c1.push_back(statistic_u_c1(y2, cfg.pairs, g).value);
    s2_c2.push_back(statistic_u_c2(y2, cfg.pairs, g).value);
  }
  CHECK(median(al_u) > eta);
  CHECK(median(s1_c1) > eta);
  CHECK(median(s2_c2) > eta);
  CHECK(median(s2_c1) < eta);
}

#include "sfbc/theory.hpp"

#include <cmath>

#include "sfbc/classify.hpp"
#include "sfbc/errors.hpp"
#include "sfbc/rng.hpp"

namespace sfbc::theory {

double pr_sm_given_sm(double eta, int dof) {
  if (dof < 2 || dof % 2 != 0) throw DomainError("degrees of freedom must be even and >= 2");
  if (!(eta >= 0.0)) throw DomainError("threshold must be non-negative");
  // Terms accumulated in the log domain so large thresholds do not overflow.
  const double h = 0.5 * eta;
  double sum = 0.0;
  for (int m = 1; m <= dof / 2; ++m) {
    const double lt = (m - 1) * (h > 0 ? std::log(h) : 0.0) - h - std::lgamma(m);
    if (m == 1 || h > 0) sum += std::exp(lt);
  }
  return std::max(0.0, 1.0 - sum);
}

double sigma_epsilon_sq(std::span<const cplx> h1, std::span<const cplx> h2, double sigma_s2,
                        double sigma_w2, int symbols) {
  if (h1.size() != h2.size()) throw ConfigError("channel rows differ in length");
  if (symbols < 1) throw DomainError("need at least one OFDM symbol");
  double n1 = 0.0, n2 = 0.0;
  for (auto v : h1) n1 += std::norm(v);
  for (auto v : h2) n2 += std::norm(v);
  const double nb2 = 2.0 * symbols;
  return sigma_s2 * sigma_s2 * n1 * n2 / nb2 + sigma_s2 * sigma_w2 * (n1 + n2) / nb2 +
         sigma_w2 * sigma_w2 / nb2;
}

TheoryScenario make_scenario(int subcarriers, int symbols, double snr_db, double pr_false_alarm,
                             std::uint64_t channel_seed) {
  auto ch = draw_channel(2, 2, PowerDelayProfile::exponential(), channel_seed);
  const double s = unit_power_scale(CodeId::al);
  return {ch.frequency_response(subcarriers), s * s, NoiseConfig::from_snr_db(snr_db).variance,
          symbols, compute_threshold(pr_false_alarm, 2)};
}

AlCoefficients al_coefficients(const TheoryScenario& s) {
  const auto& h = s.response;
  const int n = h.subcarriers();
  if (n < 2 || n % 2 != 0) throw ConfigError("sub-carrier count must be even");
  if (h.tx_antennas() != 2 || h.rx_antennas() < 2) throw ConfigError("scenario needs a 2x2 channel");
  std::vector<cplx> r1(2), r2(2);
  double var = 0.0;
  cplx acc{};
  for (int j = 0; j < n / 2; ++j) {
    const int k = 2 * j;  // sub-carriers k+1, k+2 in 1-based terms
    for (int t = 0; t < 2; ++t) {
      r1[t] = h(k, 0, t);
      r2[t] = h(k + 1, 1, t);
    }
    var += sigma_epsilon_sq(r1, r2, s.sigma_s2, s.sigma_w2, s.symbols);
    acc += s.sigma_s2 * (h(k, 0, 0) * h(k + 1, 1, 1) - h(k, 0, 1) * h(k + 1, 1, 0));
  }
  var /= n / 2;
  const double se = std::sqrt(var);
  const double norm = std::sqrt(n / 2.0) * se;
  return {acc.real() / norm, acc.imag() / norm, se};
}

double cdf_quadratic_gaussian(double y, double beta) {
  if (!std::isfinite(beta)) throw DomainError("beta must be finite");
  if (std::isnan(y)) throw DomainError("y is NaN");
  const double shift = 0.25 * beta * beta;
  if (y < -shift) return 0.0;
  if (std::isinf(y)) return 1.0;
  const double r = std::sqrt(y + shift);
  const double h = 0.5 * beta;
  const double v = 0.5 * (numerics::erfc((h - r) / M_SQRT2) - numerics::erfc((h + r) / M_SQRT2));
  return std::clamp(v, 0.0, 1.0);
}

double pr_al_given_al(const AlCoefficients& a, double eta, const numerics::ToleranceConfig& tol) {
  tol.validate();
  if (!(eta >= 0.0)) throw DomainError("threshold must be non-negative");
  const double b1 = 2.0 * a.a1, b2 = 2.0 * a.a2;
  const double c = eta - a.a1 * a.a1 - a.a2 * a.a2;
  const double lo1 = -a.a1 * a.a1;  // support of Y1 starts here
  const double lo2 = -a.a2 * a.a2;
  if (c < lo1 + lo2) return 1.0;  // Y1 + Y2 >= lo1 + lo2 > c always

  constexpr double kDensityFloor = 1e-8;
  constexpr long kMaxSteps = 200'000'000;
  const double step = tol.integration_step;
  double y = lo2;
  double f_prev = 0.0;  // F_{Y2}(lo2)
  double integral = 0.0;
  for (long i = 0;; ++i) {
    if (i >= kMaxSteps) throw IntegrationError("Stieltjes sum did not reach its truncation point");
    const double y_next = y + step;
    const double f_next = cdf_quadratic_gaussian(y_next, b2);
    const double mid = y + 0.5 * step;
    const double inner = c - mid;
    if (inner < lo1) break;  // F_{Y1} vanishes from here on
    const double df = f_next - f_prev;
    integral += cdf_quadratic_gaussian(inner, b1) * df;
    // Stop in the upper tail once the density of Y2 is negligible.
    if (f_next > 0.5 && df / step < kDensityFloor) break;
    y = y_next;
    f_prev = f_next;
  }
  if (!std::isfinite(integral)) throw IntegrationError("non-finite Stieltjes sum");
  return std::clamp(1.0 - integral, 0.0, 1.0);
}

double pr_al_given_al(const TheoryScenario& s, const numerics::ToleranceConfig& tol) {
  return pr_al_given_al(al_coefficients(s), s.eta, tol);
}

MonteCarloEstimate pr_al_general(std::span<const double> a, double eta, std::uint64_t seed,
                                 std::size_t draws) {
  if (a.empty() || a.size() % 2 != 0) throw DomainError("coefficient vector length must be even");
  if (draws < 2) throw DomainError("need at least two draws");
  CounterRng rng(seed);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    double s = 0.0;
    for (double am : a) {
      const double v = am + rng.gaussian();
      s += v * v;
    }
    if (s >= eta) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(draws);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(draws))};
}

double noncentral_cdf(double lambda, int pair_count, double dmu_norm) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  if (pair_count < 1) throw DomainError("D must be at least 1");
  if (!(dmu_norm >= 0.0)) throw DomainError("mean-shift norm must be non-negative");
  return std::clamp(1.0 - numerics::marcum_q(pair_count, dmu_norm, std::sqrt(lambda)), 0.0, 1.0);
}

}  // namespace sfbc::theory

#pragma once

#include <cstdint>
#include <span>

#include "sfbc/channel.hpp"
#include "sfbc/numerics.hpp"

namespace sfbc::theory {

// Pr(SM|SM) = 1 - exp(-eta/2) sum_{m=1}^{q/2} (eta/2)^(m-1) / (m-1)!.
double pr_sm_given_sm(double eta, int dof);

// Variance of the real (or imaginary) part of the cross-correlation
// estimation error for two receive rows h1 = H_k1(i1, :), h2 = H_k2(i2, :).
double sigma_epsilon_sq(std::span<const cplx> h1, std::span<const cplx> h2, double sigma_s2,
                        double sigma_w2, int symbols);

// Fixed, known channel for the single-pair (1, 2), single-group analysis.
struct TheoryScenario {
  FrequencyResponse response;
  double sigma_s2;
  double sigma_w2;
  int symbols;
  double eta;
};

// The standard scenario used for theory curves: channel drawn with
// `channel_seed`, AL symbol variance, noise from SNR, threshold from Pr_f.
TheoryScenario make_scenario(int subcarriers, int symbols, double snr_db, double pr_false_alarm,
                             std::uint64_t channel_seed);

struct AlCoefficients {
  double a1;
  double a2;
  double sigma_epsilon;
};

// a1 (a2): summed real (imaginary) AL cross-correlations over pairs
// (2j-1, 2j), normalized by sqrt(N/2) sigma_eps. sigma_eps^2 is averaged
// over those pairs.
AlCoefficients al_coefficients(const TheoryScenario& s);

// Pr(X^2 + beta X <= y), X standard normal.
double cdf_quadratic_gaussian(double y, double beta);

// 1 - Pr(Y1 + Y2 < eta - a1^2 - a2^2) with Y_m = 2 a_m X_m + X_m^2, by a
// Riemann-Stieltjes sum over the distribution of Y2.
double pr_al_given_al(const AlCoefficients& a, double eta, const numerics::ToleranceConfig& tol = {});
double pr_al_given_al(const TheoryScenario& s, const numerics::ToleranceConfig& tol = {});

struct MonteCarloEstimate {
  double value;
  double std_error;
};

// Pr(sum (a_m + X_m)^2 >= eta) by sampling.
MonteCarloEstimate pr_al_general(std::span<const double> a, double eta, std::uint64_t seed,
                                 std::size_t draws = 1'000'000);

// 1 - Q_D(dmu, sqrt(lambda)).
double noncentral_cdf(double lambda, int pair_count, double dmu_norm);

}  // namespace sfbc::theory

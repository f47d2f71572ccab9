#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sfbc::numerics {

struct ToleranceConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_iter = 200;
  double integration_step = 1e-3;

  void validate() const;
};

// Diagonal covariance matrix stored as its diagonal.
class DiagonalCovariance {
 public:
  DiagonalCovariance() = default;
  explicit DiagonalCovariance(std::vector<double> diag);

  std::size_t size() const noexcept { return diag_.size(); }
  double operator[](std::size_t i) const { return diag_[i]; }
  std::span<const double> diag() const noexcept { return diag_; }

  // True when every entry exceeds the singularity guard.
  bool invertible() const noexcept;

 private:
  std::vector<double> diag_;
};

// Entries at or below this value are treated as zero when inverting.
inline constexpr double kSingularityGuard = 1e-300;

double erfc(double x);

// (m-1)! as a double. Exact for m <= 20.
double gamma_integer(int m);

// Regularized lower incomplete gamma P(alpha, beta) = gamma(alpha, beta) / Gamma(alpha).
double regularized_lower_gamma(double alpha, double beta);

// Unregularized lower incomplete gamma: integral_0^beta t^(alpha-1) e^-t dt.
double lower_incomplete_gamma(double alpha, double beta);

// CDF of a central chi-square variable with an even number of degrees of freedom.
double chi_square_cdf(double x, int dof);

// Modified Bessel function of the first kind, integer order, by power series.
double bessel_i(int order, double x);

// Generalized Marcum Q-function of integer order m.
//
// Evaluated by integrating t^m exp(-(t^2+a^2)/2) I_{m-1}(a t) / a^(m-1) over
// [b, inf) with a series Bessel evaluation carried in the log domain. The
// upper limit is placed where the integrand drops below 1e-12 of its peak.
double marcum_q(int m, double a, double b);

// Root of a function that changes sign on [lo, hi]. When f(lo) and f(hi)
// share a sign, hi is doubled up to tol.max_iter times before giving up.
double bisection_solve(const std::function<double(double)>& f, double lo, double hi,
                       const ToleranceConfig& tol = {});

// Midpoint-rule integral of f over [a, b].
double riemann_integrate(const std::function<double(double)>& f, double a, double b,
                         double step);

// Upper integration limit for a decaying integrand: walks right from `start`
// in `step` increments until |f| < threshold.
double truncation_point(const std::function<double(double)>& f, double start, double step,
                        double threshold, int max_steps = 100000000);

// v^T diag(cov)^-1 v.
double mahalanobis_quadratic(std::span<const double> v, const DiagonalCovariance& cov);

}  // namespace sfbc::numerics

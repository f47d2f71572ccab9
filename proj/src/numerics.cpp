#include "sfbc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfbc/errors.hpp"

namespace sfbc::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kGammaMaxIter = 100000;

double gamma_series(double a, double x) {
  // P(a, x) for x < a + 1.
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw IntegrationError("incomplete gamma series did not converge");
}

double gamma_continued_fraction(double a, double x) {
  // Q(a, x) for x >= a + 1, modified Lentz.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw IntegrationError("incomplete gamma continued fraction did not converge");
}

// log of sum_k z^k / (k! (k+m-1)!) for z >= 0.
double log_bessel_series(int m, double z) {
  if (z == 0.0) return -std::lgamma(static_cast<double>(m));
  const double log_z = std::log(z);
  double log_term = -std::lgamma(static_cast<double>(m));
  double max_log = log_term;
  double scaled_sum = 1.0;  // sum of exp(log_term - max_log)
  for (int k = 0; k < 100000; ++k) {
    log_term += log_z - std::log(static_cast<double>(k + 1)) -
                std::log(static_cast<double>(k + m));
    if (log_term > max_log) {
      scaled_sum = scaled_sum * std::exp(max_log - log_term) + 1.0;
      max_log = log_term;
    } else {
      const double rel = std::exp(log_term - max_log);
      scaled_sum += rel;
      // Past the peak the ratio is < 1 and shrinking; stop once negligible.
      if (rel < 1e-17 * scaled_sum && z < (k + 1.0) * (k + m)) break;
    }
  }
  return max_log + std::log(scaled_sum);
}

// log of t^m exp(-(t^2 + a^2)/2) I_{m-1}(a t) / a^(m-1).
double log_marcum_integrand(int m, double a, double t) {
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  const double half_t = 0.5 * t;
  const double z = (a * half_t) * (a * half_t);
  return m * std::log(t) - 0.5 * (t * t + a * a) + (m - 1) * std::log(half_t) +
         log_bessel_series(m, z);
}

}  // namespace

void ToleranceConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(integration_step > 0.0)) {
    throw DomainError("tolerances must be strictly positive");
  }
  if (max_iter < 1) throw DomainError("max_iter must be at least 1");
}

DiagonalCovariance::DiagonalCovariance(std::vector<double> diag) : diag_(std::move(diag)) {
  for (double d : diag_) {
    if (!std::isfinite(d) || d < 0.0) {
      throw DomainError("covariance diagonal entries must be finite and non-negative");
    }
  }
}

bool DiagonalCovariance::invertible() const noexcept {
  return std::all_of(diag_.begin(), diag_.end(), [](double d) { return d > kSingularityGuard; });
}

double erfc(double x) {
  if (!std::isfinite(x)) throw DomainError("erfc: non-finite argument");
  return std::erfc(x);
}

double gamma_integer(int m) {
  if (m < 1) throw DomainError("gamma_integer: m must be >= 1");
  if (m > 171) throw DomainError("gamma_integer: (m-1)! not representable");
  double result = 1.0;
  for (int i = 2; i < m; ++i) result *= i;
  return result;
}

double regularized_lower_gamma(double alpha, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("incomplete gamma: alpha must be positive");
  }
  if (std::isnan(beta) || beta < 0.0) {
    throw DomainError("incomplete gamma: beta must be non-negative");
  }
  if (beta == 0.0) return 0.0;
  if (std::isinf(beta)) return 1.0;
  if (beta < alpha + 1.0) return gamma_series(alpha, beta);
  return 1.0 - gamma_continued_fraction(alpha, beta);
}

double lower_incomplete_gamma(double alpha, double beta) {
  const double p = regularized_lower_gamma(alpha, beta);
  if (p == 0.0) return 0.0;
  return std::exp(std::log(p) + std::lgamma(alpha));
}

double chi_square_cdf(double x, int dof) {
  if (dof <= 0 || dof % 2 != 0) {
    throw DomainError("chi_square_cdf: degrees of freedom must be even and positive");
  }
  if (std::isnan(x) || x < 0.0) throw DomainError("chi_square_cdf: x must be non-negative");
  return regularized_lower_gamma(0.5 * dof, 0.5 * x);
}

double bessel_i(int order, double x) {
  if (order < 0) throw DomainError("bessel_i: negative order");
  const double half = 0.5 * x;
  double term = std::pow(half, order) / gamma_integer(order + 1);
  double sum = term;
  const double z = half * half;
  for (int k = 0; k < 10000; ++k) {
    term *= z / ((k + 1.0) * (k + 1.0 + order));
    sum += term;
    if (term < kEps * sum) break;
  }
  return sum;
}

double marcum_q(int m, double a, double b) {
  if (m < 1) throw DomainError("marcum_q: order must be >= 1");
  if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
    throw DomainError("marcum_q: arguments must be finite and non-negative");
  }
  if (b == 0.0) return 1.0;

  auto log_f = [&](double t) { return log_marcum_integrand(m, a, t); };

  // Locate the peak of the integrand over (0, inf) by a coarse scan.
  const double scan_end = a + 2.0 * std::sqrt(static_cast<double>(m)) + 10.0;
  double peak_t = 0.0;
  double peak_log = -std::numeric_limits<double>::infinity();
  for (double t = 0.01; t <= scan_end; t += 0.01) {
    const double v = log_f(t);
    if (v > peak_log) {
      peak_log = v;
      peak_t = t;
    }
  }
  const double start = std::max(b, peak_t);
  const double ref_log = b > peak_t ? log_f(b) : peak_log;
  const double cutoff = ref_log + std::log(1e-12);
  double upper = start;
  while (log_f(upper) > cutoff) upper += 0.25;
  if (upper <= b) return 0.0;

  // Composite Simpson on [b, upper].
  constexpr double target_step = 1e-3;
  int n = static_cast<int>(std::ceil((upper - b) / target_step));
  if (n % 2 != 0) ++n;
  const double h = (upper - b) / n;
  double sum = std::exp(log_f(b)) + std::exp(log_f(upper));
  for (int i = 1; i < n; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * std::exp(log_f(b + i * h));
  }
  return std::clamp(sum * h / 3.0, 0.0, 1.0);
}

double bisection_solve(const std::function<double(double)>& f, double lo, double hi,
                       const ToleranceConfig& tol) {
  tol.validate();
  if (!(hi > lo)) throw DomainError("bisection_solve: hi must exceed lo");
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  int expansions = 0;
  while (std::signbit(f_lo) == std::signbit(f_hi) && f_hi != 0.0) {
    if (++expansions > tol.max_iter) {
      throw NoBracketError("bisection_solve: could not bracket a root");
    }
    hi = lo + 2.0 * (hi - lo);
    f_hi = f(hi);
  }
  if (f_hi == 0.0) return hi;

  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 10000; ++i) {
    mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (std::abs(f_mid) <= tol.abs_tol || (hi - lo) <= tol.abs_tol) break;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

double riemann_integrate(const std::function<double(double)>& f, double a, double b,
                         double step) {
  if (!(step > 0.0)) throw DomainError("riemann_integrate: step must be positive");
  if (b < a) throw DomainError("riemann_integrate: requires a <= b");
  if (b == a) return 0.0;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / step));
  const double h = (b - a) / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f(a + (static_cast<double>(i) + 0.5) * h);
    if (!std::isfinite(v)) throw IntegrationError("riemann_integrate: non-finite integrand");
    sum += v;
  }
  return sum * h;
}

double truncation_point(const std::function<double(double)>& f, double start, double step,
                        double threshold, int max_steps) {
  double t = start;
  for (int i = 0; i < max_steps; ++i) {
    if (std::abs(f(t)) < threshold) return t;
    t += step;
  }
  throw IntegrationError("truncation_point: integrand did not decay");
}

double mahalanobis_quadratic(std::span<const double> v, const DiagonalCovariance& cov) {
  if (v.size() != cov.size()) throw DomainError("mahalanobis_quadratic: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(cov[i] > kSingularityGuard)) {
      throw SingularCovarianceError("singular covariance: zero diagonal entry");
    }
    acc += v[i] * v[i] / cov[i];
  }
  return acc;
}

}  // namespace sfbc::numerics

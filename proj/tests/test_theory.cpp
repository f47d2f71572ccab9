#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sfbc/classify.hpp"
#include "sfbc/errors.hpp"
#include "sfbc/rng.hpp"
#include "sfbc/theory.hpp"

using namespace sfbc;
using namespace sfbc::theory;
using doctest::Approx;

TEST_CASE("probability of correct SM detection") {
  CHECK(pr_sm_given_sm(0.0, 2) == Approx(0.0));
  CHECK(pr_sm_given_sm(13.8155, 2) == Approx(0.999).epsilon(1e-5));
  CHECK(pr_sm_given_sm(2.0, 4) == Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-12));
  for (double p : {1e-1, 1e-2, 1e-3})
    for (int q : {2, 4, 32}) CHECK(pr_sm_given_sm(compute_threshold(p, q), q) == Approx(1.0 - p).epsilon(1e-7));
  CHECK(pr_sm_given_sm(1e4, 32) == Approx(1.0));
  CHECK_THROWS_AS(pr_sm_given_sm(1.0, 3), DomainError);
  CHECK_THROWS_AS(pr_sm_given_sm(-1.0, 2), DomainError);
}

TEST_CASE("estimation-error variance") {
  const std::vector<cplx> u{{1, 0}, {0, 0}}, v{{0, 0}, {1, 0}};
  CHECK(sigma_epsilon_sq(u, v, 0.0, 1.0, 1) == Approx(0.5));
  CHECK(sigma_epsilon_sq(u, v, 1.0, 1.0, 1) == Approx(2.0));
  CHECK(sigma_epsilon_sq(u, v, 1.0, 1.0, 4) == Approx(0.5));
  CHECK(sigma_epsilon_sq(u, v, 1.0, 0.0, 1) == Approx(0.5));
  CHECK_THROWS_AS(sigma_epsilon_sq(u, std::vector<cplx>{{1, 0}}, 1, 1, 1), ConfigError);
}

TEST_CASE("quadratic-Gaussian cdf") {
  CHECK(cdf_quadratic_gaussian(1.0, 0.0) == Approx(std::erf(std::sqrt(0.5))).epsilon(1e-12));
  CHECK(cdf_quadratic_gaussian(3.0, 2.0) == Approx(0.8399948480369128).epsilon(1e-10));
  CHECK(cdf_quadratic_gaussian(-2.0, 2.0) == 0.0);
  CHECK(cdf_quadratic_gaussian(INFINITY, 2.0) == 1.0);
  for (double beta : {0.0, 1.0, -2.5}) {
    CounterRng rng(40 + static_cast<std::uint64_t>(beta * 10 + 100));
    std::vector<double> y(20000);
    for (auto& v : y) {
      const double x = rng.gaussian();
      v = x * x + beta * x;
    }
    std::sort(y.begin(), y.end());
    double d = 0;
    const double n = double(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double f = cdf_quadratic_gaussian(y[i], beta);
      d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    CHECK(d < 0.012);  // KS at 1 % for 2e4 draws
  }
}

TEST_CASE("AL detection probability limits and monotonicity") {
  const double eta = compute_threshold(1e-2, 2);
  CHECK(pr_al_given_al(AlCoefficients{0, 0, 1}, eta) == Approx(1e-2).epsilon(0.02));
  CHECK(pr_al_given_al(AlCoefficients{30, 0, 1}, eta) == Approx(1.0));
  double prev = 0.0;
  for (double a : {0.0, 0.5, 1.0, 2.0, 3.0, 4.0}) {
    const double p = pr_al_given_al(AlCoefficients{a, 0.5 * a, 1}, eta);
    CHECK(p >= prev - 1e-6);
    prev = p;
  }
  CHECK_THROWS_AS(pr_al_given_al(AlCoefficients{1, 1, 1}, -1.0), DomainError);
}

TEST_CASE("AL detection probability agrees with sampling") {
  const double eta = compute_threshold(1e-2, 2);
  for (auto [a1, a2] : {std::pair{1.0, -0.5}, std::pair{2.0, 1.5}, std::pair{0.3, 2.2}}) {
    const std::vector<double> a{a1, a2};
    const auto mc = pr_al_general(a, eta, 99, 400000);
    CHECK(std::abs(pr_al_given_al(AlCoefficients{a1, a2, 1}, eta) - mc.value) < 4 * mc.std_error + 2e-3);
  }
  const std::vector<double> central(8, 0.0);
  const auto mc = pr_al_general(central, compute_threshold(1e-1, 8), 3, 200000);
  CHECK(mc.value == Approx(0.1).epsilon(0.05));
  CHECK_THROWS_AS(pr_al_general(std::vector<double>{1.0}, 1.0, 1), DomainError);
}

TEST_CASE("scenario coefficients") {
  const auto s = make_scenario(64, 100, 0.0, 1e-2, 7);
  CHECK(s.sigma_s2 == Approx(0.5));
  CHECK(s.sigma_w2 == Approx(1.0));
  CHECK(s.eta == Approx(compute_threshold(1e-2, 2)));
  const auto a = al_coefficients(s);
  CHECK(a.sigma_epsilon > 0.0);
  // More symbols shrink the estimation error and raise detection.
  const auto s2 = make_scenario(64, 400, 0.0, 1e-2, 7);
  const auto b = al_coefficients(s2);
  CHECK(b.sigma_epsilon == Approx(a.sigma_epsilon / 2.0).epsilon(1e-9));
  CHECK(std::hypot(b.a1, b.a2) == Approx(2.0 * std::hypot(a.a1, a.a2)).epsilon(1e-9));
  CHECK(pr_al_given_al(s2) >= pr_al_given_al(s));
}

TEST_CASE("noncentral chi cdf") {
  CHECK(noncentral_cdf(0.0, 2, 0.0) == Approx(0.0));
  CHECK(noncentral_cdf(1e4, 1, 1.0) == Approx(1.0));
  CHECK(1.0 - noncentral_cdf(4.0, 2, 1.0) == Approx(0.5301469080839657).epsilon(1e-8));
  // D = 1: ||z + dmu||^2 <= lambda with z ~ N(0, I_2).
  CounterRng rng(5);
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gaussian() + 1.0, y = rng.gaussian();
    if (x * x + y * y <= 4.0) ++hits;
  }
  CHECK(std::abs(noncentral_cdf(4.0, 1, 1.0) - double(hits) / n) < 0.005);
  CHECK_THROWS_AS(noncentral_cdf(-1.0, 1, 0.0), DomainError);
  CHECK_THROWS_AS(noncentral_cdf(1.0, 0, 0.0), DomainError);
}

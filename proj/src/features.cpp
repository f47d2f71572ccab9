#include "sfbc/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfbc/dft.hpp"
#include "sfbc/errors.hpp"

namespace sfbc {

AntennaPairSet::AntennaPairSet(std::vector<AntennaPair> pairs) : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw ConfigError("antenna pair set is empty");
  for (const auto& p : pairs_) {
    if (p.first < 1 || p.second < 1) throw ConfigError("antenna indices are 1-based");
    if (p.first == p.second) throw ConfigError("antenna pair must use distinct antennas");
  }
  std::sort(pairs_.begin(), pairs_.end());
  if (std::adjacent_find(pairs_.begin(), pairs_.end()) != pairs_.end())
    throw ConfigError("duplicate antenna pair");
}

AntennaPairSet AntennaPairSet::all_pairs(int rx_antennas) {
  if (rx_antennas < 2) throw ConfigError("need at least two receive antennas");
  std::vector<AntennaPair> out;
  for (int i = 1; i <= rx_antennas; ++i)
    for (int j = 1; j <= rx_antennas; ++j)
      if (i != j) out.push_back({i, j});
  return AntennaPairSet(std::move(out));
}

AntennaPairSet AntennaPairSet::parse(const std::string& text) {
  std::vector<AntennaPair> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto dash = item.find('-');
    if (dash == std::string::npos) throw ConfigError("bad antenna pair '" + item + "'");
    try {
      out.push_back({std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1))});
    } catch (const std::logic_error&) {
      throw ConfigError("bad antenna pair '" + item + "'");
    }
  }
  return AntennaPairSet(std::move(out));
}

int AntennaPairSet::max_antenna() const noexcept {
  int m = 0;
  for (const auto& p : pairs_) m = std::max({m, p.first, p.second});
  return m;
}

std::string AntennaPairSet::to_string() const {
  std::string s;
  for (const auto& p : pairs_) {
    if (!s.empty()) s += ',';
    s += std::to_string(p.first) + "-" + std::to_string(p.second);
  }
  return s;
}

void GroupingConfig::validate(int subcarriers) const {
  if (groups < 1) throw ConfigError("group count must be positive");
  if (subcarriers % groups != 0) throw ConfigError("groups must divide the sub-carrier count");
  if ((subcarriers / groups) % 2 != 0) throw ConfigError("sub-block length must be even");
}

std::string to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::u: return "U";
    case StatisticKind::t: return "T";
    case StatisticKind::u_c1: return "U_C1";
    case StatisticKind::u_c2: return "U_C2";
    case StatisticKind::t_c1: return "T_C1";
    case StatisticKind::t_c2: return "T_C2";
  }
  return "?";
}

StatisticKind parse_statistic_kind(const std::string& name) {
  for (auto k : {StatisticKind::u, StatisticKind::t, StatisticKind::u_c1, StatisticKind::u_c2,
                 StatisticKind::t_c1, StatisticKind::t_c2})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown statistic '" + name + "'");
}

PairingScheme PairingScheme::adjacent() { return {2, {{1, 2}}, 2}; }
PairingScheme PairingScheme::lag4() { return {8, {{1, 5}, {2, 6}, {3, 7}, {4, 8}}, 9}; }
PairingScheme PairingScheme::lag2() { return {4, {{1, 3}, {2, 4}}, 5}; }

ResourceGrid demodulate(const TimeFrame& frame, int subcarriers, int cp, int window_offset) {
  if (subcarriers < 1 || cp < 0) throw ConfigError("bad OFDM dimensions");
  const std::size_t sym_len = static_cast<std::size_t>(subcarriers + cp);
  if (frame.length() == 0 || frame.length() % sym_len != 0)
    throw FrameError("frame length is not a whole number of OFDM symbols");
  const int nb = static_cast<int>(frame.length() / sym_len);
  ResourceGrid grid(frame.antennas(), subcarriers, nb);
  std::vector<cplx> win(subcarriers), spec(subcarriers);
  const auto len = static_cast<long long>(frame.length());
  for (int a = 0; a < frame.antennas(); ++a) {
    auto s = frame.antenna(a);
    for (int n = 0; n < nb; ++n) {
      const long long start = static_cast<long long>(n) * (long long)sym_len + cp + window_offset;
      for (int m = 0; m < subcarriers; ++m) {
        const long long idx = start + m;
        win[m] = (idx >= 0 && idx < len) ? s[static_cast<std::size_t>(idx)] : cplx{};
      }
      unitary_dft(win, spec);
      for (int k = 0; k < subcarriers; ++k) grid(a, k, n) = spec[k];
    }
  }
  return grid;
}

namespace {

void check_pairs(const ResourceGrid& grid, const AntennaPairSet& pairs) {
  if (pairs.max_antenna() > grid.antennas())
    throw IndexError("antenna pair exceeds receive antenna count");
  if (grid.symbols() < 1) throw FrameError("grid has no OFDM symbols");
}

cplx xcorr0(const ResourceGrid& grid, int a1, int a2, int k1, int k2) {
  auto x = grid.cell(a1, k1);
  auto y = grid.cell(a2, k2);
  cplx acc{};
  for (std::size_t n = 0; n < x.size(); ++n) acc += x[n] * y[n];
  return acc / static_cast<double>(x.size());
}

// r(k1, k2) into out[0 .. 2D), 1-based sub-carriers, no bounds checks.
void fill_r(const ResourceGrid& grid, const AntennaPairSet& pairs, int k1, int k2, double* out) {
  const std::size_t d = pairs.size();
  for (std::size_t i = 0; i < d; ++i) {
    const auto& p = pairs.pairs()[i];
    cplx c = xcorr0(grid, p.first - 1, p.second - 1, k1 - 1, k2 - 1);
    out[i] = c.real();
    out[d + i] = c.imag();
  }
}

int null_span(const ResourceGrid& grid, const PairingScheme& scheme) {
  const int n = grid.subcarriers() - scheme.null_lag;
  if (n < 2) throw ConfigError("too few sub-carriers for the covariance estimate");
  return n;
}

// Visits every scheme pair (k1, k2), 1-based, of the block range [first, first + len).
template <class F>
int for_each_pair(const PairingScheme& scheme, int first, int len, F&& f) {
  const int blocks = len / scheme.block;
  for (int j = 0; j < blocks; ++j) {
    const int base = first + j * scheme.block - 1;
    for (const auto& [a, b] : scheme.offsets) f(base + a, base + b);
  }
  return blocks * static_cast<int>(scheme.offsets.size());
}

double quad(std::span<const double> v, const numerics::DiagonalCovariance& cov) {
  return numerics::mahalanobis_quadratic(v, cov);
}

}  // namespace

cplx xcorr_estimate(const ResourceGrid& grid, int i1, int i2, int k1, int k2) {
  if (i1 < 1 || i2 < 1 || i1 > grid.antennas() || i2 > grid.antennas())
    throw IndexError("antenna index out of range");
  if (k1 < 1 || k2 < 1 || k1 > grid.subcarriers() || k2 > grid.subcarriers())
    throw IndexError("sub-carrier index out of range");
  if (grid.symbols() < 1) throw FrameError("grid has no OFDM symbols");
  return xcorr0(grid, i1 - 1, i2 - 1, k1 - 1, k2 - 1);
}

std::vector<double> stack_r(const ResourceGrid& grid, const AntennaPairSet& pairs, int k1, int k2) {
  check_pairs(grid, pairs);
  if (k1 < 1 || k2 < 1 || k1 > grid.subcarriers() || k2 > grid.subcarriers())
    throw IndexError("sub-carrier index out of range");
  std::vector<double> r(2 * pairs.size());
  fill_r(grid, pairs, k1, k2, r.data());
  return r;
}

std::vector<double> stack_t(const ResourceGrid& grid, const AntennaPairSet& pairs, int k1, int k2) {
  auto r = stack_r(grid, pairs, k1, k2);
  for (auto& x : r) x = std::abs(x);
  return r;
}

std::vector<std::vector<double>> group_vectors(const ResourceGrid& grid,
                                               const AntennaPairSet& pairs,
                                               const GroupingConfig& grouping,
                                               const PairingScheme& scheme) {
  check_pairs(grid, pairs);
  const int n = grid.subcarriers();
  grouping.validate(n);
  const int np = grouping.sub_block(n);
  if (np < scheme.block) throw ConfigError("sub-block shorter than the code block");
  const std::size_t dim = 2 * pairs.size();
  std::vector<std::vector<double>> out(grouping.groups, std::vector<double>(dim, 0.0));
  std::vector<double> r(dim);
  for (int g = 0; g < grouping.groups; ++g) {
    auto& v = out[g];
    const int count = for_each_pair(scheme, g * np + 1, np, [&](int k1, int k2) {
      fill_r(grid, pairs, k1, k2, r.data());
      for (std::size_t i = 0; i < dim; ++i) v[i] += r[i];
    });
    const double s = 1.0 / std::sqrt(static_cast<double>(count));
    for (auto& x : v) x *= s;
  }
  return out;
}

numerics::DiagonalCovariance estimate_psi(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                          const PairingScheme& scheme) {
  check_pairs(grid, pairs);
  const int span = null_span(grid, scheme);
  const std::size_t dim = 2 * pairs.size();
  std::vector<double> acc(dim, 0.0), r(dim);
  for (int k = 1; k <= span; ++k) {
    fill_r(grid, pairs, k, k + scheme.null_lag, r.data());
    for (std::size_t i = 0; i < dim; ++i) acc[i] += r[i] * r[i];
  }
  for (auto& x : acc) {
    x /= static_cast<double>(span - 1);
    if (!(x > numerics::kSingularityGuard)) throw SingularCovarianceError("zero covariance entry");
  }
  return numerics::DiagonalCovariance(std::move(acc));
}

std::vector<double> estimate_mu(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                const PairingScheme& scheme) {
  check_pairs(grid, pairs);
  const int span = null_span(grid, scheme);
  const std::size_t dim = 2 * pairs.size();
  std::vector<double> acc(dim, 0.0), r(dim);
  for (int k = 1; k <= span; ++k) {
    fill_r(grid, pairs, k, k + scheme.null_lag, r.data());
    for (std::size_t i = 0; i < dim; ++i) acc[i] += std::abs(r[i]);
  }
  for (auto& x : acc) x /= static_cast<double>(span);
  return acc;
}

numerics::DiagonalCovariance estimate_phi(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                          std::span<const double> mu,
                                          const PairingScheme& scheme) {
  check_pairs(grid, pairs);
  const std::size_t dim = 2 * pairs.size();
  if (mu.size() != dim) throw ConfigError("mean vector has the wrong length");
  const int span = null_span(grid, scheme);
  std::vector<double> acc(dim, 0.0), r(dim);
  for (int k = 1; k <= span; ++k) {
    fill_r(grid, pairs, k, k + scheme.null_lag, r.data());
    for (std::size_t i = 0; i < dim; ++i) {
      const double e = std::abs(r[i]) - mu[i];
      acc[i] += e * e;
    }
  }
  for (auto& x : acc) {
    x /= static_cast<double>(span - 1);
    if (!(x > numerics::kSingularityGuard)) throw SingularCovarianceError("zero covariance entry");
  }
  return numerics::DiagonalCovariance(std::move(acc));
}

std::vector<double> abs_sum_vector(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                   std::span<const double> mu, const PairingScheme& scheme) {
  check_pairs(grid, pairs);
  const std::size_t dim = 2 * pairs.size();
  if (mu.size() != dim) throw ConfigError("mean vector has the wrong length");
  if (grid.subcarriers() < scheme.block) throw ConfigError("band shorter than the code block");
  std::vector<double> q(dim, 0.0), r(dim);
  const int count = for_each_pair(scheme, 1, grid.subcarriers(), [&](int k1, int k2) {
    fill_r(grid, pairs, k1, k2, r.data());
    for (std::size_t i = 0; i < dim; ++i) q[i] += std::abs(r[i]) - mu[i];
  });
  const double s = 1.0 / std::sqrt(static_cast<double>(count));
  for (auto& x : q) x *= s;
  return q;
}

namespace {

StatisticResult u_family(StatisticKind kind, const PairingScheme& scheme, const ResourceGrid& grid,
                         const AntennaPairSet& pairs, const GroupingConfig& grouping) {
  auto vs = group_vectors(grid, pairs, grouping, scheme);
  auto psi = estimate_psi(grid, pairs, scheme);
  double u = 0.0;
  for (const auto& v : vs) u += quad(v, psi);
  return {u, grouping.dof(pairs.size()), kind};
}

StatisticResult t_family(StatisticKind kind, const PairingScheme& scheme, const ResourceGrid& grid,
                         const AntennaPairSet& pairs) {
  auto mu = estimate_mu(grid, pairs, scheme);
  auto phi = estimate_phi(grid, pairs, mu, scheme);
  auto q = abs_sum_vector(grid, pairs, mu, scheme);
  return {quad(q, phi), static_cast<int>(2 * pairs.size()), kind};
}

}  // namespace

StatisticResult statistic_u(const ResourceGrid& grid, const AntennaPairSet& pairs,
                            const GroupingConfig& grouping) {
  return u_family(StatisticKind::u, PairingScheme::adjacent(), grid, pairs, grouping);
}
StatisticResult statistic_u_c1(const ResourceGrid& grid, const AntennaPairSet& pairs,
                               const GroupingConfig& grouping) {
  return u_family(StatisticKind::u_c1, PairingScheme::lag4(), grid, pairs, grouping);
}
StatisticResult statistic_u_c2(const ResourceGrid& grid, const AntennaPairSet& pairs,
                               const GroupingConfig& grouping) {
  return u_family(StatisticKind::u_c2, PairingScheme::lag2(), grid, pairs, grouping);
}

StatisticResult statistic_t(const ResourceGrid& grid, const AntennaPairSet& pairs) {
  return t_family(StatisticKind::t, PairingScheme::adjacent(), grid, pairs);
}
StatisticResult statistic_t_c1(const ResourceGrid& grid, const AntennaPairSet& pairs) {
  return t_family(StatisticKind::t_c1, PairingScheme::lag4(), grid, pairs);
}
StatisticResult statistic_t_c2(const ResourceGrid& grid, const AntennaPairSet& pairs) {
  return t_family(StatisticKind::t_c2, PairingScheme::lag2(), grid, pairs);
}

StatisticResult compute_statistic(StatisticKind kind, const ResourceGrid& grid,
                                  const AntennaPairSet& pairs, const GroupingConfig& grouping) {
  switch (kind) {
    case StatisticKind::u: return statistic_u(grid, pairs, grouping);
    case StatisticKind::u_c1: return statistic_u_c1(grid, pairs, grouping);
    case StatisticKind::u_c2: return statistic_u_c2(grid, pairs, grouping);
    case StatisticKind::t: return statistic_t(grid, pairs);
    case StatisticKind::t_c1: return statistic_t_c1(grid, pairs);
    case StatisticKind::t_c2: return statistic_t_c2(grid, pairs);
  }
  throw ConfigError("unknown statistic");
}

}  // namespace sfbc

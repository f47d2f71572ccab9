#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "sfbc/numerics.hpp"
#include "sfbc/txchain.hpp"

namespace sfbc {

// Ordered receive-antenna pair (i1, i2), 1-based, i1 != i2.
struct AntennaPair {
  int first = 1;
  int second = 2;

  friend auto operator<=>(const AntennaPair&, const AntennaPair&) = default;
};

// The set Omega of receive-antenna pairs, kept in lexicographic order so
// stacked vectors and covariance diagonals line up.
class AntennaPairSet {
 public:
  explicit AntennaPairSet(std::vector<AntennaPair> pairs);

  // Every ordered pair of distinct antennas, D = N_r (N_r - 1).
  static AntennaPairSet all_pairs(int rx_antennas);
  static AntennaPairSet parse(const std::string& text);  // "1-2,2-1"

  std::size_t size() const noexcept { return pairs_.size(); }
  const std::vector<AntennaPair>& pairs() const noexcept { return pairs_; }
  int max_antenna() const noexcept;
  std::string to_string() const;

 private:
  std::vector<AntennaPair> pairs_;
};

// G sub-blocks of N' = N / G sub-carriers each.
struct GroupingConfig {
  int groups = 8;

  void validate(int subcarriers) const;
  int sub_block(int subcarriers) const { return subcarriers / groups; }
  int dof(std::size_t pair_count) const { return 2 * static_cast<int>(pair_count) * groups; }
};

enum class StatisticKind { u, t, u_c1, u_c2, t_c1, t_c2 };

std::string to_string(StatisticKind kind);
StatisticKind parse_statistic_kind(const std::string& name);

struct StatisticResult {
  double value = 0.0;
  int dof = 0;
  StatisticKind kind = StatisticKind::u;
};

// Sub-carrier pairing of one decision node: within every block of `block`
// consecutive sub-carriers, the correlated pairs `offsets` (1-based), and the
// lag whose correlation is zero under the node's null hypothesis (used for
// the covariance and mean estimates).
struct PairingScheme {
  int block;
  std::vector<std::pair<int, int>> offsets;
  int null_lag;

  // Pairs (2j-1, 2j); null lag 2. Bottom node (SM vs AL).
  static PairingScheme adjacent();
  // Pairs (8j-7, 8j-3) .. (8j-4, 8j); null lag 9. Top node (SFBC1).
  static PairingScheme lag4();
  // Pairs (4j-3, 4j-1), (4j-2, 4j); null lag 5. Middle node (SFBC2).
  static PairingScheme lag2();
};

// Strips the cyclic prefix and applies the unitary DFT per symbol. The FFT
// window of symbol n starts at n (N + cp) + cp + window_offset; samples
// outside the capture read as zero.
ResourceGrid demodulate(const TimeFrame& frame, int subcarriers, int cp, int window_offset = 0);

// (1 / N_b) sum_n y_k1^(i1)(n) y_k2^(i2)(n), no conjugation. All indices 1-based.
cplx xcorr_estimate(const ResourceGrid& grid, int i1, int i2, int k1, int k2);

// Real parts over Omega, then imaginary parts; length 2D.
std::vector<double> stack_r(const ResourceGrid& grid, const AntennaPairSet& pairs, int k1, int k2);

// Elementwise |stack_r|.
std::vector<double> stack_t(const ResourceGrid& grid, const AntennaPairSet& pairs, int k1, int k2);

// The G vectors v_i: sums of r over the scheme's pairs inside group i,
// divided by sqrt(number of pairs in the group).
std::vector<std::vector<double>> group_vectors(const ResourceGrid& grid,
                                               const AntennaPairSet& pairs,
                                               const GroupingConfig& grouping,
                                               const PairingScheme& scheme = PairingScheme::adjacent());

// diag of sum_{k=1}^{N-l} r(k, k+l)^2 / (N - l - 1), l = scheme.null_lag.
numerics::DiagonalCovariance estimate_psi(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                          const PairingScheme& scheme = PairingScheme::adjacent());

// Mean of t(k, k+l) over k = 1 .. N-l.
std::vector<double> estimate_mu(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                const PairingScheme& scheme = PairingScheme::adjacent());

// diag of sum_{k=1}^{N-l} (t(k, k+l) - mu)^2 / (N - l - 1).
numerics::DiagonalCovariance estimate_phi(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                          std::span<const double> mu,
                                          const PairingScheme& scheme = PairingScheme::adjacent());

// The centred absolute-value sum over every scheme pair in the band,
// divided by sqrt(pair count).
std::vector<double> abs_sum_vector(const ResourceGrid& grid, const AntennaPairSet& pairs,
                                   std::span<const double> mu,
                                   const PairingScheme& scheme = PairingScheme::adjacent());

// U = sum_i v_i^T Psi^-1 v_i with q = 2 D G degrees of freedom.
StatisticResult statistic_u(const ResourceGrid& grid, const AntennaPairSet& pairs,
                            const GroupingConfig& grouping);
StatisticResult statistic_u_c1(const ResourceGrid& grid, const AntennaPairSet& pairs,
                               const GroupingConfig& grouping);
StatisticResult statistic_u_c2(const ResourceGrid& grid, const AntennaPairSet& pairs,
                               const GroupingConfig& grouping);

// T = q^T Phi^-1 q over the whole band (no grouping), 2D degrees of freedom.
StatisticResult statistic_t(const ResourceGrid& grid, const AntennaPairSet& pairs);
StatisticResult statistic_t_c1(const ResourceGrid& grid, const AntennaPairSet& pairs);
StatisticResult statistic_t_c2(const ResourceGrid& grid, const AntennaPairSet& pairs);

// Dispatch by kind; `grouping` is ignored for the T family.
StatisticResult compute_statistic(StatisticKind kind, const ResourceGrid& grid,
                                  const AntennaPairSet& pairs, const GroupingConfig& grouping);

}  // namespace sfbc

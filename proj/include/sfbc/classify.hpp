#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sfbc/features.hpp"
#include "sfbc/numerics.hpp"
#include "sfbc/txchain.hpp"

namespace sfbc {

// Threshold eta with chi_square_cdf(eta, q) = 1 - pr_false_alarm, by bisection.
double compute_threshold(double pr_false_alarm, int dof,
                         const numerics::ToleranceConfig& tol = {});

struct HtConfig {
  double pr_false_alarm = 1e-3;
  GroupingConfig grouping{};
  AntennaPairSet pairs = AntennaPairSet({{1, 2}, {2, 1}});

  void validate(int subcarriers) const;
  double threshold() const { return compute_threshold(pr_false_alarm, grouping.dof(pairs.size())); }
};

// AL iff U >= eta.
CodeId ht_decide(const StatisticResult& stat, double eta);

// Per-node thresholds of the three-level tree (lag-4, lag-2, lag-1 nodes).
struct TreeThresholds {
  double c1;
  double c2;
  double al;

  static TreeThresholds uniform(double eta) { return {eta, eta, eta}; }
};

// Statistics evaluated on the way down the tree; nodes that were not
// reached stay empty.
struct TreeTrace {
  std::optional<double> c1, c2, al;
};

CodeId decision_tree_classify(const ResourceGrid& grid, const AntennaPairSet& pairs,
                              const GroupingConfig& grouping, const TreeThresholds& eta,
                              TreeTrace* trace = nullptr);
CodeId decision_tree_classify(const ResourceGrid& grid, const AntennaPairSet& pairs,
                              const GroupingConfig& grouping, double eta);

// ---------------------------------------------------------------------------
// Linear SVM on a scalar feature.

struct TrainingSample {
  double feature;
  CodeId label;
};

struct TrainingSet {
  std::vector<TrainingSample> samples;
  StatisticKind kind = StatisticKind::t;
  int pair_count = 2;   // D of the antenna-pair set the features came from
  std::string digest;   // description of the generating protocol
};

struct SvmOptions {
  double c = 1.0;
  double tolerance = 1e-6;
  long max_iter = 10'000'000;
  bool record_objective = true;
};

struct SvmModel {
  double w = 0.0;
  double b = 0.0;
  double c = 1.0;
  int pair_count = 2;
  StatisticKind kind = StatisticKind::t;
  CodeId positive = CodeId::al;
  CodeId negative = CodeId::sm;
  std::string digest;
  bool trained = false;

  // Feature value where w x + b = 0.
  double boundary() const;

  std::string to_json() const;
  static SvmModel from_json(const std::string& text);
  void save(const std::string& path) const;
  // Throws ConfigError when the stored D differs from `expected_pair_count` (if > 0).
  static SvmModel load(const std::string& path, int expected_pair_count = 0);
};

struct SvmReport {
  long iterations = 0;
  double final_gap = 0.0;                // max KKT violation m(alpha) - M(alpha)
  std::vector<double> objective;         // dual objective after every update
  std::vector<double> alpha;
};

// Soft-margin SVM with a linear kernel, solved by SMO (maximal violating
// pair) on the dual. The feature is divided by its training standard
// deviation before solving, so C applies in standardized units and the
// learned boundary is equivariant to rescaling the feature.
SvmModel svm_train(const TrainingSet& data, CodeId positive, CodeId negative,
                   const SvmOptions& opt = {}, SvmReport* report = nullptr);

// positive iff w T + b > 0; ties go to the negative label.
CodeId svm_predict(const SvmModel& model, const StatisticResult& stat);
CodeId svm_predict(const SvmModel& model, double feature);

struct SvmTree {
  std::optional<SvmModel> c1;  // T_C1: SFBC1 vs rest
  std::optional<SvmModel> c2;  // T_C2: SFBC2 vs rest
  std::optional<SvmModel> al;  // T: AL vs SM
};

CodeId svm_decision_tree(const ResourceGrid& grid, const AntennaPairSet& pairs,
                         const SvmTree& models, TreeTrace* trace = nullptr);

}  // namespace sfbc

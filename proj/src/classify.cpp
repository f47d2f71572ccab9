#include "sfbc/classify.hpp"

#include <cmath>

#include "sfbc/errors.hpp"

namespace sfbc {

double compute_threshold(double pr_false_alarm, int dof, const numerics::ToleranceConfig& tol) {
  if (!(pr_false_alarm > 0.0 && pr_false_alarm < 1.0))
    throw DomainError("false-alarm probability must lie in (0, 1)");
  if (dof < 2 || dof % 2 != 0) throw DomainError("degrees of freedom must be even and >= 2");
  const double target = 1.0 - pr_false_alarm;
  return numerics::bisection_solve(
      [&](double eta) { return numerics::chi_square_cdf(eta, dof) - target; }, 0.0,
      2.0 * dof, tol);
}

void HtConfig::validate(int subcarriers) const {
  if (!(pr_false_alarm > 0.0 && pr_false_alarm < 1.0))
    throw ConfigError("false-alarm probability must lie in (0, 1)");
  grouping.validate(subcarriers);
}

CodeId ht_decide(const StatisticResult& stat, double eta) {
  return stat.value >= eta ? CodeId::al : CodeId::sm;
}

CodeId decision_tree_classify(const ResourceGrid& grid, const AntennaPairSet& pairs,
                              const GroupingConfig& grouping, const TreeThresholds& eta,
                              TreeTrace* trace) {
  TreeTrace local;
  TreeTrace& tr = trace ? *trace : local;
  tr = {};
  tr.c1 = statistic_u_c1(grid, pairs, grouping).value;
  if (*tr.c1 >= eta.c1) return CodeId::sfbc1;
  tr.c2 = statistic_u_c2(grid, pairs, grouping).value;
  if (*tr.c2 >= eta.c2) return CodeId::sfbc2;
  tr.al = statistic_u(grid, pairs, grouping).value;
  if (*tr.al >= eta.al) return CodeId::al;
  return CodeId::sm;
}

CodeId decision_tree_classify(const ResourceGrid& grid, const AntennaPairSet& pairs,
                              const GroupingConfig& grouping, double eta) {
  return decision_tree_classify(grid, pairs, grouping, TreeThresholds::uniform(eta));
}

// ---------------------------------------------------------------------------

double SvmModel::boundary() const {
  if (!trained) throw StateError("SVM model is not trained");
  if (w == 0.0) throw StateError("SVM model has a zero weight");
  return -b / w;
}

SvmModel svm_train(const TrainingSet& data, CodeId positive, CodeId negative,
                   const SvmOptions& opt, SvmReport* report) {
  if (positive == negative) throw TrainingError("positive and negative labels coincide");
  if (!(opt.c > 0.0)) throw TrainingError("C must be positive");
  const std::size_t n = data.samples.size();
  std::vector<double> y(n), x(n);
  std::size_t npos = 0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = data.samples[i];
    if (!std::isfinite(s.feature)) throw TrainingError("non-finite training feature");
    if (s.label == positive) {
      y[i] = 1.0;
      ++npos;
    } else if (s.label == negative) {
      y[i] = -1.0;
    } else {
      throw TrainingError("training sample carries a label outside the binary problem");
    }
    x[i] = s.feature;
    mean += s.feature;
  }
  if (npos == 0 || npos == n) throw TrainingError("training data must contain both classes");
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  double scale = std::sqrt(var / static_cast<double>(n));
  if (!(scale > 0.0)) scale = 1.0;

  // z_i = y_i x_i / scale; Q_ij = z_i z_j; gradient G_i = z_i v - 1 with v = sum alpha_j z_j.
  std::vector<double> z(n), alpha(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) z[i] = y[i] * x[i] / scale;
  const double cc = opt.c;
  double v = 0.0, alpha_sum = 0.0;
  auto grad = [&](std::size_t t) { return z[t] * v - 1.0; };
  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < cc) || (y[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < cc);
  };
  constexpr double kTau = 1e-12;

  SvmReport rep;
  long iter = 0;
  double gap = 0.0;
  for (;;) {
    double gmax = -HUGE_VAL, gmin = HUGE_VAL;
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double yg = -y[t] * grad(t);
      if (in_up(t) && yg > gmax) { gmax = yg; i = t; }
      if (in_low(t) && yg < gmin) { gmin = yg; j = t; }
    }
    gap = gmax - gmin;
    if (i == n || j == n || gap < opt.tolerance) break;
    if (iter >= opt.max_iter) throw TrainingError("SVM solver did not converge");
    ++iter;

    const double gi = grad(i), gj = grad(j);
    const double qii = z[i] * z[i], qjj = z[j] * z[j], qij = z[i] * z[j];
    const double ai = alpha[i], aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-gi - gj) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > cc) { alpha[i] = cc; alpha[j] = cc - diff; }
      } else {
        if (alpha[j] > cc) { alpha[j] = cc; alpha[i] = cc + diff; }
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (gi - gj) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > cc) {
        if (alpha[i] > cc) { alpha[i] = cc; alpha[j] = sum - cc; }
        if (alpha[j] > cc) { alpha[j] = cc; alpha[i] = sum - cc; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    v += z[i] * di + z[j] * dj;
    alpha_sum += di + dj;
    if (opt.record_objective) rep.objective.push_back(0.5 * v * v - alpha_sum);
  }

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = HUGE_VAL, lb = -HUGE_VAL, sum_free = 0.0;
  std::size_t nfree = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad(t);
    if (alpha[t] >= cc) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nfree;
      sum_free += yg;
    }
  }
  const double rho = nfree > 0 ? sum_free / static_cast<double>(nfree) : 0.5 * (ub + lb);

  SvmModel m;
  m.w = v / scale;
  m.b = -rho;
  m.c = cc;
  m.pair_count = data.pair_count;
  m.kind = data.kind;
  m.positive = positive;
  m.negative = negative;
  m.digest = data.digest;
  m.trained = true;
  if (report) {
    rep.iterations = iter;
    rep.final_gap = gap;
    rep.alpha = std::move(alpha);
    *report = std::move(rep);
  }
  return m;
}

CodeId svm_predict(const SvmModel& model, double feature) {
  if (!model.trained) throw StateError("SVM model is not trained");
  return model.w * feature + model.b > 0.0 ? model.positive : model.negative;
}

CodeId svm_predict(const SvmModel& model, const StatisticResult& stat) {
  if (!model.trained) throw StateError("SVM model is not trained");
  if (stat.kind != model.kind) throw ConfigError("statistic kind does not match the SVM model");
  if (stat.dof != 2 * model.pair_count)
    throw ConfigError("SVM model was trained for a different antenna-pair count; retrain it");
  return svm_predict(model, stat.value);
}

CodeId svm_decision_tree(const ResourceGrid& grid, const AntennaPairSet& pairs,
                         const SvmTree& models, TreeTrace* trace) {
  if (!models.c1 || !models.c2 || !models.al) throw StateError("SVM tree is missing a node model");
  TreeTrace local;
  TreeTrace& tr = trace ? *trace : local;
  tr = {};
  auto s1 = statistic_t_c1(grid, pairs);
  tr.c1 = s1.value;
  if (svm_predict(*models.c1, s1) == models.c1->positive) return CodeId::sfbc1;
  auto s2 = statistic_t_c2(grid, pairs);
  tr.c2 = s2.value;
  if (svm_predict(*models.c2, s2) == models.c2->positive) return CodeId::sfbc2;
  auto s3 = statistic_t(grid, pairs);
  tr.al = s3.value;
  return svm_predict(*models.al, s3) == models.al->positive ? CodeId::al : CodeId::sm;
}

}  // namespace sfbc

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "sfbc/classify.hpp"
#include "sfbc/errors.hpp"
#include "sfbc/numerics.hpp"
#include "sfbc/rng.hpp"

using namespace sfbc;
using doctest::Approx;

namespace {

TrainingSet separated(double lo_max, double hi_min, int per_class = 40) {
  TrainingSet ts;
  for (int i = 0; i < per_class; ++i) {
    ts.samples.push_back({lo_max - 0.1 * i, CodeId::sm});
    ts.samples.push_back({hi_min + 0.1 * i, CodeId::al});
  }
  return ts;
}

TrainingSet overlapping(std::uint64_t seed, int per_class = 200) {
  CounterRng rng(seed);
  TrainingSet ts;
  for (int i = 0; i < per_class; ++i) {
    ts.samples.push_back({3.0 + rng.gaussian(), CodeId::sm});
    ts.samples.push_back({5.0 + rng.gaussian(), CodeId::al});
  }
  return ts;
}

}  // namespace

TEST_CASE("threshold inverts the chi-square cdf") {
  CHECK(compute_threshold(0.5, 2) == Approx(2.0 * std::log(2.0)).epsilon(1e-8));
  CHECK(compute_threshold(1e-3, 2) == Approx(-2.0 * std::log(1e-3)).epsilon(1e-7));
  CHECK(compute_threshold(1e-3, 32) == Approx(62.487219057088474).epsilon(1e-7));
  CHECK(compute_threshold(1e-2, 32) == Approx(53.48577183623535).epsilon(1e-7));
  CHECK(compute_threshold(1e-3, 4) == Approx(18.46682695290317).epsilon(1e-7));
  double prev = 0.0;
  for (double p : {0.5, 0.1, 1e-2, 1e-3, 1e-4}) {
    const double eta = compute_threshold(p, 32);
    CHECK(eta > prev);
    CHECK(1.0 - numerics::chi_square_cdf(eta, 32) == Approx(p).epsilon(1e-6));
    prev = eta;
  }
  CHECK_THROWS_AS(compute_threshold(0.0, 2), DomainError);
  CHECK_THROWS_AS(compute_threshold(1.0, 2), DomainError);
  CHECK_THROWS_AS(compute_threshold(0.1, 3), DomainError);
}

TEST_CASE("hypothesis test decision") {
  CHECK(ht_decide({13.0, 2, StatisticKind::u}, 13.8155) == CodeId::sm);
  CHECK(ht_decide({13.8155, 2, StatisticKind::u}, 13.8155) == CodeId::al);
  CHECK(ht_decide({50.0, 32, StatisticKind::u}, 62.487) == CodeId::sm);
  CHECK(ht_decide({70.0, 32, StatisticKind::u}, 62.487) == CodeId::al);
  HtConfig cfg;
  CHECK(cfg.threshold() == Approx(62.487219057088474).epsilon(1e-7));
  CHECK_THROWS_AS(HtConfig{0.0}.validate(512), ConfigError);
}

TEST_CASE("decision tree on a noise-only grid ends at SM for a huge threshold") {
  CounterRng rng(3);
  ResourceGrid g(2, 64, 10);
  for (auto& v : g.raw()) v = rng.complex_gaussian(1.0);
  TreeTrace tr;
  const auto pairs = AntennaPairSet({{1, 2}, {2, 1}});
  CHECK(decision_tree_classify(g, pairs, GroupingConfig{1}, TreeThresholds::uniform(1e9), &tr) ==
        CodeId::sm);
  CHECK(tr.c1.has_value());
  CHECK(tr.c2.has_value());
  CHECK(tr.al.has_value());
  // A zero threshold stops at the first node.
  CHECK(decision_tree_classify(g, pairs, GroupingConfig{1}, TreeThresholds::uniform(0.0), &tr) ==
        CodeId::sfbc1);
  CHECK(!tr.c2.has_value());
  CHECK(decision_tree_classify(g, pairs, GroupingConfig{1}, TreeThresholds{1e9, 1e9, 0.0}) ==
        CodeId::al);
}

TEST_CASE("SVM on separable data places the boundary at the gap midpoint") {
  SvmReport rep;
  const auto m = svm_train(separated(4.0, 6.0), CodeId::al, CodeId::sm, {}, &rep);
  CHECK(m.trained);
  CHECK(m.boundary() == Approx(5.0).epsilon(1e-3));
  CHECK(m.w > 0.0);
  CHECK(rep.final_gap <= 1e-5);
  CHECK(svm_predict(m, 5.5) == CodeId::al);
  CHECK(svm_predict(m, 4.5) == CodeId::sm);
  CHECK(svm_predict(m, m.boundary()) == CodeId::sm);  // ties go to the negative class
}

TEST_CASE("SVM dual objective never increases and ends within tolerance") {
  SvmReport rep;
  svm_train(overlapping(5), CodeId::al, CodeId::sm, {}, &rep);
  REQUIRE(rep.objective.size() > 1);
  for (std::size_t i = 1; i < rep.objective.size(); ++i)
    CHECK(rep.objective[i] <= rep.objective[i - 1] + 1e-12);
  CHECK(rep.final_gap <= 1e-5);
  for (double a : rep.alpha) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0 + 1e-12);
  }
}

TEST_CASE("SVM label swap mirrors the weight and keeps the boundary") {
  const auto ts = overlapping(6);
  const auto a = svm_train(ts, CodeId::al, CodeId::sm);
  const auto b = svm_train(ts, CodeId::sm, CodeId::al);
  CHECK(b.w == Approx(-a.w).epsilon(1e-6));
  CHECK(b.boundary() == Approx(a.boundary()).epsilon(1e-6));
  CHECK(a.boundary() > 3.0);
  CHECK(a.boundary() < 5.0);
}

TEST_CASE("SVM boundary scales with the features") {
  auto ts = overlapping(7);
  const auto a = svm_train(ts, CodeId::al, CodeId::sm);
  for (auto& s : ts.samples) s.feature *= 10.0;
  const auto b = svm_train(ts, CodeId::al, CodeId::sm);
  CHECK(b.boundary() == Approx(10.0 * a.boundary()).epsilon(1e-5));
}

TEST_CASE("SVM training errors") {
  TrainingSet one;
  for (int i = 0; i < 10; ++i) one.samples.push_back({double(i), CodeId::sm});
  CHECK_THROWS_AS(svm_train(one, CodeId::al, CodeId::sm), TrainingError);
  auto bad = separated(1, 2);
  bad.samples.push_back({1.0, CodeId::sfbc1});
  CHECK_THROWS_AS(svm_train(bad, CodeId::al, CodeId::sm), TrainingError);
  auto nan = separated(1, 2);
  nan.samples.push_back({std::nan(""), CodeId::al});
  CHECK_THROWS_AS(svm_train(nan, CodeId::al, CodeId::sm), TrainingError);
  CHECK_THROWS_AS(svm_train(separated(1, 2), CodeId::al, CodeId::al), TrainingError);
  SvmModel untrained;
  CHECK_THROWS_AS(svm_predict(untrained, 1.0), StateError);
  CHECK_THROWS_AS(untrained.to_json(), StateError);
}

TEST_CASE("SVM prediction checks the statistic") {
  const auto m = svm_train(separated(4.0, 6.0), CodeId::al, CodeId::sm);
  CHECK(svm_predict(m, StatisticResult{7.0, 4, StatisticKind::t}) == CodeId::al);
  CHECK_THROWS_AS(svm_predict(m, StatisticResult{7.0, 6, StatisticKind::t}), ConfigError);
  CHECK_THROWS_AS(svm_predict(m, StatisticResult{7.0, 4, StatisticKind::u}), ConfigError);
  SvmTree tree;
  tree.al = m;
  ResourceGrid g(2, 64, 2);
  CHECK_THROWS_AS(svm_decision_tree(g, AntennaPairSet({{1, 2}, {2, 1}}), tree), StateError);
}

TEST_CASE("SVM model persistence") {
  auto m = svm_train(overlapping(8), CodeId::al, CodeId::sm);
  m.digest = "unit";
  const auto back = SvmModel::from_json(m.to_json());
  CHECK(back.w == m.w);
  CHECK(back.b == m.b);
  CHECK(back.c == m.c);
  CHECK(back.pair_count == 2);
  CHECK(back.kind == StatisticKind::t);
  CHECK(back.positive == CodeId::al);
  CHECK(back.digest == "unit");
  CHECK(back.trained);

  const auto path = (std::filesystem::temp_directory_path() / "sfbc_svm_unit.json").string();
  m.save(path);
  CHECK(SvmModel::load(path, 2).w == m.w);
  CHECK_THROWS_AS(SvmModel::load(path, 3), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(SvmModel::load(path), ConfigError);
  CHECK_THROWS_AS(SvmModel::from_json("{\"format\":\"other\"}"), ConfigError);
  CHECK_THROWS_AS(SvmModel::from_json("not json"), ConfigError);
}

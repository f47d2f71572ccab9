#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfbc/channel.hpp"
#include "sfbc/classify.hpp"
#include "sfbc/features.hpp"
#include "sfbc/txchain.hpp"

namespace sfbc {

enum class Algorithm { ht, svm, both };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
  std::vector<CodeId> codes{CodeId::sm, CodeId::al};
  int subcarriers = 512;
  int cp = 10;
  int symbols = 20;
  int rx_antennas = 2;
  AntennaPairSet pairs = AntennaPairSet({{1, 2}, {2, 1}});
  int groups = 8;
  ModulationScheme modulation = ModulationScheme::qpsk();
  double pr_false_alarm = 1e-3;
  double snr_db = 10.0;                 // operating point of a single run
  std::vector<double> snr_grid{0, 2, 4, 6, 8, 10};
  ImpairmentConfig impairments{};
  int trials = 1000;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::ht;
  bool tree = false;                    // four-way decision tree instead of SM/AL
  int sm_antennas = 2;
  std::optional<std::uint64_t> fixed_channel_seed;  // same channel in every trial
  PowerDelayProfile pdp = PowerDelayProfile::exponential();

  GroupingConfig grouping() const { return {groups}; }
  int dof() const { return grouping().dof(pairs.size()); }
  double threshold() const { return compute_threshold(pr_false_alarm, dof()); }

  // Checks every module precondition the run will hit.
  void validate() const;

  std::string to_json() const;
  // Fields missing from `text` keep their current values.
  void merge_json(const std::string& text);
  static ExperimentConfig load(const std::string& path);
};

// Trained SVM models a run may need.
struct Classifiers {
  std::optional<SvmModel> svm;
  std::optional<SvmTree> svm_tree;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  CodeId truth = CodeId::sm;
  std::optional<CodeId> ht;
  std::optional<CodeId> svm;
  std::optional<double> u;   // U (or the last tree statistic reached)
  std::optional<double> t;
  TreeTrace ht_trace, svm_trace;
  double threshold = 0.0;
  double runtime_s = 0.0;    // wall clock, not part of the deterministic outcome
  bool failed = false;
  std::string error;

  // Equality of everything except the runtime.
  bool same_outcome(const TrialRecord& o) const;
};

// Key of one trial; sub-seeds for data, channel and noise derive from it.
std::uint64_t trial_key(std::uint64_t master, CodeId code, std::uint64_t index);

// Transmit -> channel -> impairments -> STO, as received samples.
TimeFrame simulate_frame(const ExperimentConfig& cfg, CodeId code, std::uint64_t index);
ResourceGrid simulate_grid(const ExperimentConfig& cfg, CodeId code, std::uint64_t index);

// Classifies one received grid with the configured algorithm(s).
void classify_grid(const ExperimentConfig& cfg, const Classifiers& cls, const ResourceGrid& grid,
                   TrialRecord& rec);

TrialRecord run_trial(const ExperimentConfig& cfg, CodeId code, std::uint64_t index,
                      const Classifiers& cls = {});

// Every (code, trial) of the config, in code-major order. Executed on the
// worker pool; results do not depend on the worker count.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, const Classifiers& cls = {});

// Worker count: SFBC_WORKERS if set, else the hardware concurrency.
int worker_count();
// Calls fn(i) for i in [0, n) on the worker pool.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct RateEstimate {
  std::size_t successes = 0;
  std::size_t trials = 0;     // trials that completed
  std::size_t failures = 0;   // trials excluded because of an error

  double pr() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
  // Wilson score interval at 95 %.
  std::pair<double, double> ci() const;
};

struct SweepPoint {
  std::string axis_value;
  Algorithm algorithm;
  std::vector<std::pair<CodeId, RateEstimate>> per_code;
  RateEstimate aggregate;  // pooled over codes
};

enum class SweepAxis { snr, subcarriers, symbols, rx_antennas, modulation, clock_offset, sto, cfo,
                       doppler };

std::string to_string(SweepAxis a);
SweepAxis parse_axis(const std::string& name);

// Sets one axis of the config from its textual value.
void apply_axis(ExperimentConfig& cfg, SweepAxis axis, const std::string& value);

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepPoint> points;

  std::string to_csv() const;
};

// Tallies per-code and pooled correct-identification rates.
std::vector<SweepPoint> summarize(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg,
                                  const std::string& axis_value);

// Runs every value of the axis. When the algorithm includes the SVM and no
// models are given, they are trained per point with the standard protocol.
SweepResult run_sweep(const ExperimentConfig& cfg, SweepAxis axis,
                      const std::vector<std::string>& values, const Classifiers* cls = nullptr);

struct TrainingProtocol {
  double snr_lo = 0.0;
  double snr_hi = 15.0;
  double snr_step = 1.0;
  int trials_per_snr = 50;

  std::string digest(const ExperimentConfig& cfg) const;
};

// Labeled features of `kind` for `negative` and `positive` transmissions
// over the protocol's SNR grid. Impairments are not applied.
TrainingSet generate_training_set(const ExperimentConfig& cfg, StatisticKind kind, CodeId negative,
                                  CodeId positive, const TrainingProtocol& protocol = {});

// The model(s) the config's algorithm needs: one AL-vs-SM model, or three
// node models for the tree.
Classifiers train_classifiers(const ExperimentConfig& cfg, const TrainingProtocol& protocol = {});

struct FlopsReport {
  long long ht_flops;
  long long svm_flops;
  double ht_seconds_per_trial;
  double svm_seconds_per_trial;
};

// Operation count 8 N_b N D of the statistics, plus measured wall clock of
// the statistic computation averaged over `timing_trials` trials.
FlopsReport flops_report(const ExperimentConfig& cfg, int timing_trials = 5);
long long flops_count(const ExperimentConfig& cfg);

struct TheoryRow {
  double snr_db;
  double pr_false_alarm;
  double pr_sm;
  double pr_al;
};

// Analytic Pr(SM|SM) and Pr(AL|AL) for the single-pair, single-group case with a
// fixed channel drawn from `channel_seed`.
std::vector<TheoryRow> theory_table(int subcarriers, int symbols, const std::vector<double>& snr_db,
                                    const std::vector<double>& pr_false_alarm,
                                    std::uint64_t channel_seed);

}  // namespace sfbc

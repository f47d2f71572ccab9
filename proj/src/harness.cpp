#include "sfbc/harness.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sfbc/errors.hpp"
#include "sfbc/theory.hpp"

namespace sfbc {

using nlohmann::json;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ht: return "HT";
    case Algorithm::svm: return "SVM";
    case Algorithm::both: return "both";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "HT" || name == "ht") return Algorithm::ht;
  if (name == "SVM" || name == "svm") return Algorithm::svm;
  if (name == "both") return Algorithm::both;
  throw ConfigError("unknown algorithm '" + name + "'");
}

namespace {

bool uses_ht(Algorithm a) { return a != Algorithm::svm; }
bool uses_svm(Algorithm a) { return a != Algorithm::ht; }

}  // namespace

void ExperimentConfig::validate() const {
  if (codes.empty()) throw ConfigError("no codes selected");
  if (subcarriers < 5) throw ConfigError("N must be at least 5");
  if (cp < 0 || cp > subcarriers) throw ConfigError("cyclic prefix must lie in [0, N]");
  if (symbols < 1) throw ConfigError("N_b must be at least 1");
  if (rx_antennas < 2) throw ConfigError("N_r must be at least 2");
  if (pairs.max_antenna() > rx_antennas) throw ConfigError("antenna pair exceeds N_r");
  grouping().validate(subcarriers);
  for (auto c : codes) {
    if (!tree && (c == CodeId::sfbc1 || c == CodeId::sfbc2))
      throw ConfigError("3-antenna codes need the decision tree");
    if (subcarriers % code_shape(c, sm_antennas).length != 0)
      throw ConfigError("code length does not divide N for " + to_string(c));
  }
  if (tree && grouping().sub_block(subcarriers) < 8)
    throw ConfigError("decision tree needs at least 8 sub-carriers per group");
  modulation.constellation();
  if (!(pr_false_alarm > 0.0 && pr_false_alarm < 1.0))
    throw ConfigError("Pr_f must lie in (0, 1)");
  if (trials < 1) throw ConfigError("trials must be positive");
  if (sm_antennas < 1) throw ConfigError("SM needs at least one antenna");
  impairments.validate();
  if (std::abs(impairments.sto) >= subcarriers + cp) throw ConfigError("|STO| must be < N + nu");
  if (pdp.variances.empty()) throw ConfigError("empty power delay profile");
  for (double v : pdp.variances)
    if (!(v > 0.0)) throw ConfigError("power delay profile entries must be positive");
}

std::string ExperimentConfig::to_json() const {
  json j;
  std::vector<std::string> cs;
  for (auto c : codes) cs.push_back(to_string(c));
  j["codes"] = cs;
  j["N"] = subcarriers;
  j["nu"] = cp;
  j["N_b"] = symbols;
  j["N_r"] = rx_antennas;
  j["pairs"] = pairs.to_string();
  j["G"] = groups;
  j["modulation"] = modulation.name();
  j["pr_false_alarm"] = pr_false_alarm;
  j["snr_db"] = snr_db;
  j["snr_grid"] = snr_grid;
  j["impairments"] = {{"clock_offset", impairments.clock_offset},
                      {"sto", impairments.sto},
                      {"cfo", impairments.cfo},
                      {"doppler", impairments.doppler}};
  j["trials"] = trials;
  j["seed"] = seed;
  j["algorithm"] = to_string(algorithm);
  j["tree"] = tree;
  j["sm_antennas"] = sm_antennas;
  j["fixed_channel_seed"] = fixed_channel_seed ? json(*fixed_channel_seed) : json(nullptr);
  j["pdp"] = pdp.variances;
  return j.dump(2);
}

void ExperimentConfig::merge_json(const std::string& text) {
  try {
    auto j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be an object");
    if (j.contains("codes")) {
      codes.clear();
      for (const auto& c : j["codes"]) codes.push_back(parse_code(c.get<std::string>()));
    }
    if (j.contains("N")) subcarriers = j["N"].get<int>();
    if (j.contains("nu")) cp = j["nu"].get<int>();
    if (j.contains("N_b")) symbols = j["N_b"].get<int>();
    if (j.contains("N_r")) {
      rx_antennas = j["N_r"].get<int>();
      if (!j.contains("pairs")) pairs = AntennaPairSet::all_pairs(rx_antennas);
    }
    if (j.contains("pairs")) pairs = AntennaPairSet::parse(j["pairs"].get<std::string>());
    if (j.contains("G")) groups = j["G"].get<int>();
    if (j.contains("modulation")) modulation = ModulationScheme::parse(j["modulation"].get<std::string>());
    if (j.contains("pr_false_alarm")) pr_false_alarm = j["pr_false_alarm"].get<double>();
    if (j.contains("snr_db")) snr_db = j["snr_db"].get<double>();
    if (j.contains("snr_grid")) snr_grid = j["snr_grid"].get<std::vector<double>>();
    if (j.contains("impairments")) {
      const auto& im = j["impairments"];
      impairments.clock_offset = im.value("clock_offset", impairments.clock_offset);
      impairments.sto = im.value("sto", impairments.sto);
      impairments.cfo = im.value("cfo", impairments.cfo);
      impairments.doppler = im.value("doppler", impairments.doppler);
    }
    if (j.contains("trials")) trials = j["trials"].get<int>();
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("algorithm")) algorithm = parse_algorithm(j["algorithm"].get<std::string>());
    if (j.contains("tree")) tree = j["tree"].get<bool>();
    if (j.contains("sm_antennas")) sm_antennas = j["sm_antennas"].get<int>();
    if (j.contains("fixed_channel_seed")) {
      if (j["fixed_channel_seed"].is_null()) fixed_channel_seed.reset();
      else fixed_channel_seed = j["fixed_channel_seed"].get<std::uint64_t>();
    }
    if (j.contains("pdp")) pdp.variances = j["pdp"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  ExperimentConfig cfg;
  cfg.merge_json(ss.str());
  return cfg;
}

bool TrialRecord::same_outcome(const TrialRecord& o) const {
  return seed == o.seed && truth == o.truth && ht == o.ht && svm == o.svm && u == o.u &&
         t == o.t && ht_trace.c1 == o.ht_trace.c1 && ht_trace.c2 == o.ht_trace.c2 &&
         ht_trace.al == o.ht_trace.al && svm_trace.c1 == o.svm_trace.c1 &&
         svm_trace.c2 == o.svm_trace.c2 && svm_trace.al == o.svm_trace.al &&
         threshold == o.threshold && failed == o.failed && error == o.error;
}

std::uint64_t trial_key(std::uint64_t master, CodeId code, std::uint64_t index) {
  return derive_seed(master, static_cast<std::uint64_t>(code) + 1, index);
}

TimeFrame simulate_frame(const ExperimentConfig& cfg, CodeId code, std::uint64_t index) {
  const auto key = trial_key(cfg.seed, code, index);
  const auto shape = code_shape(code, cfg.sm_antennas);
  const double scale = unit_power_scale(code, cfg.sm_antennas);
  CounterRng data(derive_seed(key, 0, StreamTag::data));
  const std::size_t blocks =
      static_cast<std::size_t>(cfg.symbols) * (cfg.subcarriers / shape.length);
  auto syms = map_symbols(data, cfg.modulation, blocks * shape.block_symbols);
  auto grid = assemble_grid(code, syms, cfg.subcarriers, cfg.symbols, scale, cfg.sm_antennas);
  auto tx = ofdm_modulate(grid, cfg.cp);
  const auto ch_seed =
      cfg.fixed_channel_seed ? *cfg.fixed_channel_seed : derive_seed(key, 0, StreamTag::channel);
  auto ch = draw_channel(shape.tx_antennas, cfg.rx_antennas, cfg.pdp, ch_seed);
  auto rx = apply_channel(tx, ch, NoiseConfig::from_snr_db(cfg.snr_db), cfg.impairments,
                          derive_seed(key, 0, StreamTag::noise), cfg.subcarriers);
  if (cfg.impairments.sto != 0) rx = apply_sto(rx, cfg.impairments.sto, cfg.subcarriers, cfg.cp);
  return rx;
}

ResourceGrid simulate_grid(const ExperimentConfig& cfg, CodeId code, std::uint64_t index) {
  return demodulate(simulate_frame(cfg, code, index), cfg.subcarriers, cfg.cp);
}

void classify_grid(const ExperimentConfig& cfg, const Classifiers& cls, const ResourceGrid& grid,
                   TrialRecord& rec) {
  const auto grouping = cfg.grouping();
  rec.threshold = cfg.threshold();
  if (uses_ht(cfg.algorithm)) {
    if (cfg.tree) {
      rec.ht = decision_tree_classify(grid, cfg.pairs, grouping,
                                      TreeThresholds::uniform(rec.threshold), &rec.ht_trace);
      rec.u = rec.ht_trace.al ? rec.ht_trace.al : rec.ht_trace.c2 ? rec.ht_trace.c2 : rec.ht_trace.c1;
    } else {
      auto u = statistic_u(grid, cfg.pairs, grouping);
      rec.u = u.value;
      rec.ht = ht_decide(u, rec.threshold);
    }
  }
  if (uses_svm(cfg.algorithm)) {
    if (cfg.tree) {
      if (!cls.svm_tree) throw StateError("SVM tree models are missing");
      rec.svm = svm_decision_tree(grid, cfg.pairs, *cls.svm_tree, &rec.svm_trace);
      rec.t = rec.svm_trace.al ? rec.svm_trace.al : rec.svm_trace.c2 ? rec.svm_trace.c2 : rec.svm_trace.c1;
    } else {
      if (!cls.svm) throw StateError("SVM model is missing");
      auto t = statistic_t(grid, cfg.pairs);
      rec.t = t.value;
      rec.svm = svm_predict(*cls.svm, t);
    }
  }
}

TrialRecord run_trial(const ExperimentConfig& cfg, CodeId code, std::uint64_t index,
                      const Classifiers& cls) {
  TrialRecord rec;
  rec.seed = trial_key(cfg.seed, code, index);
  rec.truth = code;
  const auto start = std::chrono::steady_clock::now();
  try {
    auto grid = simulate_grid(cfg, code, index);
    classify_grid(cfg, cls, grid, rec);
  } catch (const Error& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.ht.reset();
    rec.svm.reset();
  }
  rec.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

int worker_count() {
  if (const char* env = std::getenv("SFBC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 1024L));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int workers = static_cast<int>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!first_error) first_error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, const Classifiers& cls) {
  cfg.validate();
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> out(cfg.codes.size() * per);
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = run_trial(cfg, cfg.codes[i / per], i % per, cls);
  });
  return out;
}

std::pair<double, double> RateEstimate::ci() const {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = pr();
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::snr: return "snr";
    case SweepAxis::subcarriers: return "N";
    case SweepAxis::symbols: return "N_b";
    case SweepAxis::rx_antennas: return "N_r";
    case SweepAxis::modulation: return "modulation";
    case SweepAxis::clock_offset: return "clock_offset";
    case SweepAxis::sto: return "sto";
    case SweepAxis::cfo: return "cfo";
    case SweepAxis::doppler: return "doppler";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  for (auto a : {SweepAxis::snr, SweepAxis::subcarriers, SweepAxis::symbols, SweepAxis::rx_antennas,
                 SweepAxis::modulation, SweepAxis::clock_offset, SweepAxis::sto, SweepAxis::cfo,
                 SweepAxis::doppler})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

namespace {

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v)) throw ConfigError("expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

// Axes that change what the SVM should be trained on.
bool axis_needs_retraining(SweepAxis a) {
  return a == SweepAxis::subcarriers || a == SweepAxis::symbols || a == SweepAxis::rx_antennas ||
         a == SweepAxis::modulation;
}

}  // namespace

void apply_axis(ExperimentConfig& cfg, SweepAxis axis, const std::string& value) {
  switch (axis) {
    case SweepAxis::snr: cfg.snr_db = to_double(value); break;
    case SweepAxis::subcarriers: cfg.subcarriers = to_int(value); break;
    case SweepAxis::symbols: cfg.symbols = to_int(value); break;
    case SweepAxis::rx_antennas:
      cfg.rx_antennas = to_int(value);
      cfg.pairs = AntennaPairSet::all_pairs(cfg.rx_antennas);
      break;
    case SweepAxis::modulation: cfg.modulation = ModulationScheme::parse(value); break;
    case SweepAxis::clock_offset: cfg.impairments.clock_offset = to_double(value); break;
    case SweepAxis::sto: cfg.impairments.sto = to_int(value); break;
    case SweepAxis::cfo: cfg.impairments.cfo = to_double(value); break;
    case SweepAxis::doppler: cfg.impairments.doppler = to_double(value); break;
  }
}

std::vector<SweepPoint> summarize(const std::vector<TrialRecord>& records,
                                  const ExperimentConfig& cfg, const std::string& axis_value) {
  std::vector<SweepPoint> out;
  for (auto alg : {Algorithm::ht, Algorithm::svm}) {
    if (alg == Algorithm::ht ? !uses_ht(cfg.algorithm) : !uses_svm(cfg.algorithm)) continue;
    SweepPoint p{axis_value, alg, {}, {}};
    for (auto code : cfg.codes) {
      RateEstimate r;
      for (const auto& rec : records) {
        if (rec.truth != code) continue;
        if (rec.failed) {
          ++r.failures;
          continue;
        }
        const auto& d = alg == Algorithm::ht ? rec.ht : rec.svm;
        ++r.trials;
        if (d && *d == code) ++r.successes;
      }
      p.aggregate.successes += r.successes;
      p.aggregate.trials += r.trials;
      p.aggregate.failures += r.failures;
      p.per_code.emplace_back(code, r);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string SweepResult::to_csv() const {
  std::string s = "axis,code,algorithm,pr,ci_low,ci_high,trials,failures\n";
  char buf[256];
  auto row = [&](const SweepPoint& p, const std::string& code, const RateEstimate& r) {
    auto [lo, hi] = r.ci();
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6f,%.6f,%.6f,%zu,%zu\n", p.axis_value.c_str(),
                  code.c_str(), to_string(p.algorithm).c_str(), r.pr(), lo, hi, r.trials,
                  r.failures);
    s += buf;
  };
  for (const auto& p : points) {
    for (const auto& [code, r] : p.per_code) row(p, to_string(code), r);
    row(p, "aggregate", p.aggregate);
  }
  return s;
}

SweepResult run_sweep(const ExperimentConfig& cfg, SweepAxis axis,
                      const std::vector<std::string>& values, const Classifiers* cls) {
  SweepResult res{axis, {}};
  std::optional<Classifiers> trained;
  for (const auto& v : values) {
    ExperimentConfig point = cfg;
    apply_axis(point, axis, v);
    point.validate();
    const Classifiers* use = cls;
    if (!use && uses_svm(point.algorithm)) {
      if (!trained || axis_needs_retraining(axis)) trained = train_classifiers(point);
      use = &*trained;
    }
    static const Classifiers none;
    auto records = run_trials(point, use ? *use : none);
    for (auto& p : summarize(records, point, v)) res.points.push_back(std::move(p));
  }
  return res;
}

std::string TrainingProtocol::digest(const ExperimentConfig& cfg) const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "snr=%g:%g:%g trials=%d N=%d nu=%d N_b=%d N_r=%d pairs=%s G=%d mod=%s seed=%llu",
                snr_lo, snr_step, snr_hi, trials_per_snr, cfg.subcarriers, cfg.cp, cfg.symbols,
                cfg.rx_antennas, cfg.pairs.to_string().c_str(), cfg.groups,
                cfg.modulation.name().c_str(), static_cast<unsigned long long>(cfg.seed));
  return buf;
}

TrainingSet generate_training_set(const ExperimentConfig& cfg, StatisticKind kind, CodeId negative,
                                  CodeId positive, const TrainingProtocol& protocol) {
  if (protocol.trials_per_snr < 1 || !(protocol.snr_step > 0) || protocol.snr_hi < protocol.snr_lo)
    throw ConfigError("bad training protocol");
  std::vector<double> snrs;
  for (int i = 0;; ++i) {
    const double s = protocol.snr_lo + i * protocol.snr_step;
    if (s > protocol.snr_hi + 1e-9) break;
    snrs.push_back(s);
  }
  ExperimentConfig base = cfg;
  base.impairments = {};
  base.seed = derive_seed(cfg.seed, 0x747261696eULL, StreamTag::misc);
  const std::size_t per = static_cast<std::size_t>(protocol.trials_per_snr);
  const std::array<CodeId, 2> labels{negative, positive};
  TrainingSet set;
  set.kind = kind;
  set.pair_count = static_cast<int>(cfg.pairs.size());
  set.digest = protocol.digest(cfg);
  set.samples.resize(snrs.size() * per * 2);
  parallel_for(set.samples.size(), [&](std::size_t i) {
    ExperimentConfig c = base;
    c.snr_db = snrs[i / (2 * per)];
    const CodeId code = labels[i % 2];
    const std::uint64_t index = i / 2;
    auto grid = simulate_grid(c, code, index);
    set.samples[i] = {compute_statistic(kind, grid, c.pairs, c.grouping()).value, code};
  });
  return set;
}

Classifiers train_classifiers(const ExperimentConfig& cfg, const TrainingProtocol& protocol) {
  Classifiers out;
  if (!uses_svm(cfg.algorithm)) return out;
  auto train = [&](StatisticKind kind, CodeId positive) {
    return svm_train(generate_training_set(cfg, kind, CodeId::sm, positive, protocol), positive,
                     CodeId::sm, SvmOptions{.record_objective = false});
  };
  if (cfg.tree) {
    SvmTree t;
    t.c1 = train(StatisticKind::t_c1, CodeId::sfbc1);
    t.c2 = train(StatisticKind::t_c2, CodeId::sfbc2);
    t.al = train(StatisticKind::t, CodeId::al);
    out.svm_tree = std::move(t);
  } else {
    out.svm = train(StatisticKind::t, CodeId::al);
  }
  return out;
}

long long flops_count(const ExperimentConfig& cfg) {
  return 8LL * cfg.symbols * cfg.subcarriers * static_cast<long long>(cfg.pairs.size());
}

FlopsReport flops_report(const ExperimentConfig& cfg, int timing_trials) {
  cfg.validate();
  FlopsReport r{flops_count(cfg), flops_count(cfg), 0.0, 0.0};
  if (timing_trials < 1) return r;
  const double eta = cfg.threshold();
  double ht = 0.0, svm = 0.0;
  volatile double sink = 0.0;
  for (int i = 0; i < timing_trials; ++i) {
    auto grid = simulate_grid(cfg, cfg.codes.front(), static_cast<std::uint64_t>(i));
    auto t0 = std::chrono::steady_clock::now();
    sink = sink + (statistic_u(grid, cfg.pairs, cfg.grouping()).value >= eta);
    auto t1 = std::chrono::steady_clock::now();
    sink = sink + statistic_t(grid, cfg.pairs).value;
    auto t2 = std::chrono::steady_clock::now();
    ht += std::chrono::duration<double>(t1 - t0).count();
    svm += std::chrono::duration<double>(t2 - t1).count();
  }
  r.ht_seconds_per_trial = ht / timing_trials;
  r.svm_seconds_per_trial = svm / timing_trials;
  return r;
}

std::vector<TheoryRow> theory_table(int subcarriers, int symbols, const std::vector<double>& snr_db,
                                    const std::vector<double>& pr_false_alarm,
                                    std::uint64_t channel_seed) {
  std::vector<TheoryRow> rows;
  for (double pf : pr_false_alarm) {
    for (double snr : snr_db) {
      auto s = theory::make_scenario(subcarriers, symbols, snr, pf, channel_seed);
      rows.push_back({snr, pf, theory::pr_sm_given_sm(s.eta, 2), theory::pr_al_given_al(s)});
    }
  }
  return rows;
}

}  // namespace sfbc

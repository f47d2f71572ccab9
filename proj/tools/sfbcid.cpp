// sfbcid: blind identification of SFBC codes in MIMO-OFDM.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sfbc/capture.hpp"
#include "sfbc/errors.hpp"
#include "sfbc/harness.hpp"
#include "sfbc/theory.hpp"

using namespace sfbc;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> codes, pairs, modulation, algorithm;
  std::optional<int> n, nu, nb, nr, g, trials, sm_antennas, sto;
  std::optional<double> prf, snr, clock_offset, cfo, doppler;
  std::optional<std::uint64_t> seed, fixed_channel;
  bool tree = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment config");
    app->add_option("--codes", codes, "comma-separated codes (SM,AL,SFBC1,SFBC2)");
    app->add_option("--N", n, "sub-carriers");
    app->add_option("--nu", nu, "cyclic prefix length");
    app->add_option("--N_b", nb, "OFDM symbols per observation");
    app->add_option("--N_r", nr, "receive antennas (pairs default to all ordered pairs)");
    app->add_option("--pairs", pairs, "antenna pairs, e.g. 1-2,2-1");
    app->add_option("--G", g, "groups");
    app->add_option("--modulation", modulation, "BPSK, QPSK, 8PSK, 16QAM, ...");
    app->add_option("--prf", prf, "probability of false alarm");
    app->add_option("--snr", snr, "SNR in dB");
    app->add_option("--trials", trials, "trials per point and code");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--algorithm", algorithm, "HT, SVM or both");
    app->add_flag("--tree", tree, "four-way decision tree");
    app->add_option("--sm-antennas", sm_antennas, "SM transmit antennas");
    app->add_option("--clock-offset", clock_offset, "sampling clock offset in [0, 1)");
    app->add_option("--sto", sto, "timing offset in samples (positive = late)");
    app->add_option("--cfo", cfo, "carrier frequency offset (sub-carrier spacings)");
    app->add_option("--doppler", doppler, "max Doppler (fraction of the sample rate)");
    app->add_option("--fixed-channel", fixed_channel, "use one channel drawn from this seed");
  }

  ExperimentConfig build() const {
    ExperimentConfig c = config.empty() ? ExperimentConfig{} : ExperimentConfig::load(config);
    if (codes) {
      c.codes.clear();
      std::stringstream ss(*codes);
      std::string item;
      while (std::getline(ss, item, ',')) c.codes.push_back(parse_code(item));
    }
    if (n) c.subcarriers = *n;
    if (nu) c.cp = *nu;
    if (nb) c.symbols = *nb;
    if (nr) {
      c.rx_antennas = *nr;
      c.pairs = AntennaPairSet::all_pairs(*nr);
    }
    if (pairs) c.pairs = AntennaPairSet::parse(*pairs);
    if (g) c.groups = *g;
    if (modulation) c.modulation = ModulationScheme::parse(*modulation);
    if (prf) c.pr_false_alarm = *prf;
    if (snr) c.snr_db = *snr;
    if (trials) c.trials = *trials;
    if (seed) c.seed = *seed;
    if (algorithm) c.algorithm = parse_algorithm(*algorithm);
    if (tree) c.tree = true;
    if (sm_antennas) c.sm_antennas = *sm_antennas;
    if (clock_offset) c.impairments.clock_offset = *clock_offset;
    if (sto) c.impairments.sto = *sto;
    if (cfo) c.impairments.cfo = *cfo;
    if (doppler) c.impairments.doppler = *doppler;
    if (fixed_channel) c.fixed_channel_seed = *fixed_channel;
    c.validate();
    return c;
  }
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& v : split(s)) out.push_back(std::stod(v));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

std::string tree_model_path(const std::string& base, const char* node) {
  auto dot = base.rfind(".json");
  std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
  return stem + "." + node + ".json";
}

Classifiers load_models(const ExperimentConfig& cfg, const std::string& model) {
  Classifiers cls;
  if (cfg.algorithm == Algorithm::ht) return cls;
  if (model.empty()) return train_classifiers(cfg);
  const int d = static_cast<int>(cfg.pairs.size());
  if (cfg.tree) {
    SvmTree t;
    t.c1 = SvmModel::load(tree_model_path(model, "c1"), d);
    t.c2 = SvmModel::load(tree_model_path(model, "c2"), d);
    t.al = SvmModel::load(tree_model_path(model, "al"), d);
    cls.svm_tree = std::move(t);
  } else {
    cls.svm = SvmModel::load(model, d);
  }
  return cls;
}

const char* label(const std::optional<CodeId>& c) {
  static std::string s;
  s = c ? to_string(*c) : "-";
  return s.c_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind identification of space-frequency block codes in MIMO-OFDM"};
  app.require_subcommand(1);

  Overrides sim_o, sweep_o, train_o, cls_o, flops_o;

  auto* sim = app.add_subcommand("simulate", "write one received capture (IQ + metadata)");
  sim_o.add_to(sim);
  std::string sim_code = "AL", sim_out;
  std::uint64_t sim_index = 0;
  sim->add_option("--code", sim_code, "transmitted code");
  sim->add_option("--index", sim_index, "trial index");
  sim->add_option("-o,--out", sim_out, "capture path")->required();

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep, CSV out");
  sweep_o.add_to(sweep);
  std::string axis = "snr", values, sweep_out, sweep_model;
  sweep->add_option("--axis", axis, "snr, N, N_b, N_r, modulation, clock_offset, sto, cfo, doppler");
  sweep->add_option("--values", values, "comma-separated axis values (default: the SNR grid)");
  sweep->add_option("-o,--out", sweep_out, "CSV path (default stdout)");
  sweep->add_option("--model", sweep_model, "SVM model file (trained on the fly if omitted)");

  auto* train = app.add_subcommand("train-svm", "train SVM model(s) with the 0-15 dB protocol");
  train_o.add_to(train);
  std::string train_out;
  TrainingProtocol protocol;
  train->add_option("-o,--out", train_out, "model path (tree: one file per node)")->required();
  train->add_option("--snr-lo", protocol.snr_lo);
  train->add_option("--snr-hi", protocol.snr_hi);
  train->add_option("--per-snr", protocol.trials_per_snr, "trials per SNR and code");

  auto* cls = app.add_subcommand("classify", "classify an IQ capture");
  cls_o.add_to(cls);
  std::string cls_in, cls_model;
  cls->add_option("-i,--input", cls_in, "capture path")->required();
  cls->add_option("--model", cls_model, "SVM model file");

  auto* th = app.add_subcommand("theory", "analytic Pr(SM|SM) and Pr(AL|AL), single pair, G=1");
  int th_n = 512, th_nb = 100;
  std::string th_snr = "-20,-15,-10,-5,0", th_prf = "0.1,0.01,0.001", th_out;
  std::uint64_t th_seed = 1;
  th->add_option("--N", th_n);
  th->add_option("--N_b", th_nb);
  th->add_option("--snr", th_snr, "comma-separated SNR grid (dB)");
  th->add_option("--prf", th_prf, "comma-separated false-alarm probabilities");
  th->add_option("--channel-seed", th_seed);
  th->add_option("-o,--out", th_out, "CSV path (default stdout)");

  auto* fl = app.add_subcommand("flops", "operation count of the statistics");
  flops_o.add_to(fl);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      auto cfg = sim_o.build();
      auto frame = simulate_frame(cfg, parse_code(sim_code), sim_index);
      write_capture(sim_out, frame,
                    {1, cfg.subcarriers, cfg.cp, cfg.symbols, cfg.rx_antennas, "cf32_le"});
      std::cerr << "wrote " << sim_out << " and " << metadata_path(sim_out) << "\n";
    } else if (*sweep) {
      auto cfg = sweep_o.build();
      std::vector<std::string> vals;
      if (!values.empty()) {
        vals = split(values);
      } else {
        for (double s : cfg.snr_grid) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%g", s);
          vals.emplace_back(buf);
        }
      }
      std::optional<Classifiers> models;
      if (!sweep_model.empty()) models = load_models(cfg, sweep_model);
      auto res = run_sweep(cfg, parse_axis(axis), vals, models ? &*models : nullptr);
      write_text(sweep_out, res.to_csv());
    } else if (*train) {
      auto cfg = train_o.build();
      if (cfg.algorithm == Algorithm::ht) cfg.algorithm = Algorithm::svm;
      auto c = train_classifiers(cfg, protocol);
      if (cfg.tree) {
        c.svm_tree->c1->save(tree_model_path(train_out, "c1"));
        c.svm_tree->c2->save(tree_model_path(train_out, "c2"));
        c.svm_tree->al->save(tree_model_path(train_out, "al"));
      } else {
        c.svm->save(train_out);
        std::cerr << "boundary T = " << c.svm->boundary() << "\n";
      }
    } else if (*cls) {
      auto cfg = cls_o.build();
      auto models = load_models(cfg, cls_model);
      auto r = classify_capture(cls_in, cfg, models);
      std::printf("HT: %s  SVM: %s", label(r.ht), label(r.svm));
      if (r.u) std::printf("  U=%.6g (eta=%.6g)", *r.u, r.threshold);
      if (r.t) std::printf("  T=%.6g", *r.t);
      std::printf("\n");
    } else if (*th) {
      auto rows = theory_table(th_n, th_nb, split_doubles(th_snr), split_doubles(th_prf), th_seed);
      std::string out = "snr_db,pr_false_alarm,pr_sm_sm,pr_al_al\n";
      char buf[160];
      for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%g,%g,%.6f,%.6f\n", r.snr_db, r.pr_false_alarm, r.pr_sm,
                      r.pr_al);
        out += buf;
      }
      write_text(th_out, out);
    } else if (*fl) {
      auto cfg = flops_o.build();
      auto r = flops_report(cfg);
      std::printf("algorithm,flops,seconds_per_trial\n");
      std::printf("HT,%lld,%.3e\nSVM,%lld,%.3e\n", r.ht_flops, r.ht_seconds_per_trial, r.svm_flops,
                  r.svm_seconds_per_trial);
    }
  } catch (const sfbc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

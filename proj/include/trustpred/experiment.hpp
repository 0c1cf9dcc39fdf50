#pragma once

// Experiment configuration and the CLI subcommand bodies. Each command is a
// pure function of (config, input files): rerunning one writes byte-identical
// outputs, including JSON key order.
//
// Config files are flat key=value lines with section prefixes, e.g.
//   loss.kind = ss
//   train.lr_max = 1e-5
// Command-line flags override file values. Exit codes: 0 success, 1 config
// error, 2 data error, 3 numeric abort.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trustpred/analysis.hpp"
#include "trustpred/data_io.hpp"
#include "trustpred/losses.hpp"
#include "trustpred/metrics.hpp"
#include "trustpred/oracle.hpp"

namespace trustpred {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class InitKind { Gaussian, Centroid };

struct ExperimentConfig {
  // data: exactly one source
  std::string data_path;
  bool use_synth = false;
  SynthConfig synth;
  double split_fraction = 0.8;

  LossSpec loss;
  TrainConfig train;
  HeadMode head_mode = HeadMode::SignedDistance;
  InitKind init = InitKind::Gaussian;
  double init_norm = 0.01;  // centroid init only

  double threshold_pos = 0.5;
  std::optional<double> threshold_neg;  // default: 1/K for TCP, else 0.5

  uint64_t seed = 0;
  std::string out_dir = "out";
  std::string head_path;  // eval/report input
  uint32_t bins = 50;     // report histogram
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw config_error("config key " + key + ": not a number: \"" + value + "\"");
  }
}

inline uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size() || value.find('-') != std::string::npos)
      throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw config_error("config key " + key + ": not a nonnegative integer: \"" + value + "\"");
  }
}

}  // namespace detail

inline LossKind parse_loss_kind(const std::string& name) {
  if (name == "ce") return LossKind::CrossEntropy;
  if (name == "focal") return LossKind::Focal;
  if (name == "tcp") return LossKind::Tcp;
  if (name == "ss") return LossKind::SteepSlope;
  throw config_error("unknown loss kind \"" + name + "\" (expected ce|focal|tcp|ss)");
}

inline std::string loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::CrossEntropy: return "ce";
    case LossKind::Focal: return "focal";
    case LossKind::Tcp: return "tcp";
    case LossKind::SteepSlope: return "ss";
  }
  return "?";
}

// Applies one key=value pair; shared by the file parser and flag overrides.
inline void apply_config_kv(ExperimentConfig& cfg, const std::string& key,
                            const std::string& value) {
  using detail::parse_double;
  using detail::parse_u64;
  if (key == "data.path") cfg.data_path = value;
  else if (key == "data.synth") {
    if (value == "true" || value == "1") cfg.use_synth = true;
    else if (value == "false" || value == "0") cfg.use_synth = false;
    else throw config_error("config key data.synth: expected true|false");
  } else if (key == "data.split") cfg.split_fraction = parse_double(key, value);
  else if (key == "synth.d") cfg.synth.dim = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "synth.n") cfg.synth.n = parse_u64(key, value);
  else if (key == "synth.imbalance") cfg.synth.imbalance = parse_double(key, value);
  else if (key == "synth.mean_separation") cfg.synth.mean_separation = parse_double(key, value);
  else if (key == "synth.sigma") cfg.synth.sigma = parse_double(key, value);
  else if (key == "loss.kind") cfg.loss.kind = parse_loss_kind(value);
  else if (key == "loss.gamma") cfg.loss.gamma = parse_double(key, value);
  else if (key == "loss.alpha_pos") cfg.loss.alpha_pos = parse_double(key, value);
  else if (key == "loss.alpha_neg") cfg.loss.alpha_neg = parse_double(key, value);
  else if (key == "loss.wrapper") {
    if (value == "none") cfg.loss.wrapper = WrapperKind::None;
    else if (value == "class_balanced") cfg.loss.wrapper = WrapperKind::ClassBalanced;
    else if (value == "fixed") cfg.loss.wrapper = WrapperKind::FixedWeights;
    else throw config_error("config key loss.wrapper: expected none|class_balanced|fixed");
  } else if (key == "loss.beta") cfg.loss.beta = parse_double(key, value);
  else if (key == "loss.w_pos") cfg.loss.w_pos = parse_double(key, value);
  else if (key == "loss.w_neg") cfg.loss.w_neg = parse_double(key, value);
  else if (key == "train.lr_max") cfg.train.lr_max = parse_double(key, value);
  else if (key == "train.momentum") cfg.train.momentum = parse_double(key, value);
  else if (key == "train.weight_decay") cfg.train.weight_decay = parse_double(key, value);
  else if (key == "train.batch_size") cfg.train.batch_size = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "train.epochs") cfg.train.epochs = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "train.schedule") {
    if (value == "one_cycle") cfg.train.schedule = Schedule::OneCycle;
    else if (value == "constant") cfg.train.schedule = Schedule::Constant;
    else throw config_error("config key train.schedule: expected one_cycle|constant");
  } else if (key == "train.init") {
    if (value == "gaussian") cfg.init = InitKind::Gaussian;
    else if (value == "centroid") cfg.init = InitKind::Centroid;
    else throw config_error("config key train.init: expected gaussian|centroid");
  } else if (key == "train.init_norm") cfg.init_norm = parse_double(key, value);
  else if (key == "head.mode") {
    if (value == "signed_distance") cfg.head_mode = HeadMode::SignedDistance;
    else if (value == "raw_linear") cfg.head_mode = HeadMode::RawLinear;
    else throw config_error("config key head.mode: expected signed_distance|raw_linear");
  } else if (key == "head.path") cfg.head_path = value;
  else if (key == "policy.threshold_pos") cfg.threshold_pos = parse_double(key, value);
  else if (key == "policy.threshold_neg") {
    if (value == "auto") cfg.threshold_neg.reset();
    else cfg.threshold_neg = parse_double(key, value);
  } else if (key == "report.bins") cfg.bins = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "seed") {
    // One top-level seed; every consumer derives its own stream from it.
    cfg.seed = parse_u64(key, value);
    cfg.train.seed = cfg.seed;
    cfg.synth.seed = cfg.seed;
  } else if (key == "out") cfg.out_dir = value;
  else throw config_error("unknown config key \"" + key + "\"");
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

inline void parse_config_text(ExperimentConfig& cfg, const std::string& text,
                              const std::string& name) {
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(name + ":" + std::to_string(line_no) + ": expected key = value");
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file_bytes(path);
  } catch (const io_error& e) {
    throw config_error(e.what());
  }
  parse_config_text(cfg, text, path.string());
}

// "ss", "ss:2:5", "focal:0.5", "ce", "tcp". Bare kinds inherit the base
// spec's parameters.
inline LossSpec parse_loss_token(const LossSpec& base, const std::string& token) {
  LossSpec spec = base;
  std::vector<std::string> parts;
  std::istringstream in(token);
  std::string part;
  while (std::getline(in, part, ':')) parts.push_back(part);
  if (parts.empty()) throw config_error("empty loss token");
  spec.kind = parse_loss_kind(parts[0]);
  auto num = [&](size_t i) { return detail::parse_double("loss token " + token, parts[i]); };
  switch (spec.kind) {
    case LossKind::Focal:
      if (parts.size() == 2) spec.gamma = num(1);
      else if (parts.size() > 2) throw config_error("loss token " + token + ": focal takes one parameter");
      break;
    case LossKind::SteepSlope:
      if (parts.size() == 3) {
        spec.alpha_pos = num(1);
        spec.alpha_neg = num(2);
      } else if (parts.size() != 1)
        throw config_error("loss token " + token + ": ss takes two parameters");
      break;
    default:
      if (parts.size() != 1)
        throw config_error("loss token " + token + ": takes no parameters");
      break;
  }
  return spec;
}

inline std::string loss_label(const LossSpec& spec) {
  std::string label = loss_kind_name(spec.kind);
  auto short_num = [](double v) {
    std::string s = format_double(v);
    for (auto& c : s)
      if (c == '.' || c == '-' || c == '+') c = 'p';
    return s;
  };
  if (spec.kind == LossKind::Focal) label += "_g" + short_num(spec.gamma);
  if (spec.kind == LossKind::SteepSlope)
    label += "_a" + short_num(spec.alpha_pos) + "_b" + short_num(spec.alpha_neg);
  return label;
}

// ---- JSON emission ----------------------------------------------------

using ojson = nlohmann::ordered_json;

inline ojson report_json(const MetricsReport& r) {
  ojson j;
  j["fpr_at_95tpr"] = r.fpr_at_95tpr;
  j["aupr_error"] = r.aupr_error;
  j["aupr_success"] = r.aupr_success;
  j["auc"] = r.auc;
  j["tpr"] = r.tpr;
  j["tnr"] = r.tnr;
  j["acc"] = r.acc;
  j["counts"] = ojson{{"tp", r.counts.tp},
                      {"fp", r.counts.fp},
                      {"tn", r.counts.tn},
                      {"fn", r.counts.fn},
                      {"abstain_pos", r.counts.abstain_pos},
                      {"abstain_neg", r.counts.abstain_neg}};
  return j;
}

inline ojson separability_json(const SeparabilityReport& s) {
  ojson j;
  j["mu_pos"] = s.pos.mu;
  j["sigma_pos"] = s.pos.sigma;
  j["mu_neg"] = s.neg.mu;
  j["sigma_neg"] = s.neg.sigma;
  j["avg_kl"] = s.avg_kl;
  j["bhattacharyya"] = s.bhattacharyya;
  return j;
}

inline std::string history_jsonl(const TrainHistory& h) {
  std::string out;
  for (const auto& s : h.steps) {
    ojson j;
    j["step"] = s.step;
    j["lr"] = s.lr;
    j["loss"] = s.loss;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void save_head(const OracleHead& head, const std::filesystem::path& path) {
  ojson j;
  j["mode"] = head.mode == HeadMode::SignedDistance ? "signed_distance" : "raw_linear";
  j["b"] = head.b;
  j["w"] = head.w;
  write_text_file(path, j.dump(2) + "\n");
}

inline OracleHead load_head(const std::filesystem::path& path) {
  std::string text = read_file_bytes(path);
  OracleHead head;
  try {
    auto j = ojson::parse(text);
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "signed_distance") head.mode = HeadMode::SignedDistance;
    else if (mode == "raw_linear") head.mode = HeadMode::RawLinear;
    else throw std::runtime_error("unknown head mode \"" + mode + "\"");
    head.b = j.at("b").get<double>();
    head.w = j.at("w").get<std::vector<double>>();
  } catch (const std::exception& e) {
    throw data_error(path.string() + ": invalid head file: " + e.what());
  }
  if (head.w.empty()) throw data_error(path.string() + ": head has no weights");
  return head;
}

inline std::string curve_csv(const char* xname, const char* yname,
                             std::span<const std::pair<double, double>> pts) {
  std::string out = std::string(xname) + "," + yname + "\n";
  for (const auto& [x, y] : pts) out += format_double(x) + "," + format_double(y) + "\n";
  return out;
}

// ---- command bodies ---------------------------------------------------

namespace detail {

inline Dataset resolve_dataset(const ExperimentConfig& cfg) {
  if (cfg.use_synth == !cfg.data_path.empty())
    throw config_error("exactly one data source required: set data.path or data.synth");
  if (cfg.use_synth) {
    try {
      return synth_generate(cfg.synth);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("synth: ") + e.what());
    }
  }
  try {
    if (cfg.data_path.size() > 4 && cfg.data_path.substr(cfg.data_path.size() - 4) == ".csv")
      return import_csv(cfg.data_path);
    return load_dataset(cfg.data_path);
  } catch (const io_error& e) {
    throw data_error(e.what());
  }
}

inline ThresholdPolicy resolve_policy(const ExperimentConfig& cfg, const LossSpec& spec,
                                      uint32_t num_classes) {
  ThresholdPolicy p;
  p.positive_threshold = cfg.threshold_pos;
  p.negative_threshold = cfg.threshold_neg.value_or(
      spec.kind == LossKind::Tcp ? 1.0 / static_cast<double>(num_classes) : 0.5);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("policy: ") + e.what());
  }
  return p;
}

inline OracleHead make_init(const ExperimentConfig& cfg, const Dataset& train_set) {
  if (cfg.init == InitKind::Gaussian)
    return init_head_gaussian(train_set.dim(), cfg.seed, cfg.head_mode);
  return init_head_centroid(train_set, cfg.init_norm, cfg.head_mode);
}

inline void check_tcp_data(const LossSpec& spec, const Dataset& ds) {
  if (spec.kind == LossKind::Tcp && !ds.has_p_star())
    throw data_error("TCP requires ground-truth-class probability");
}

struct TrainedRun {
  TrainHistory history;
  MetricsReport report;
  std::vector<ConfidenceRecord> records;
};

inline TrainedRun run_training(const ExperimentConfig& cfg, const LossSpec& spec,
                               const Dataset& train_set, const Dataset& eval_set,
                               const OracleHead& init) {
  check_tcp_data(spec, train_set);
  try {
    spec.validate();
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  TrainedRun run;
  run.history = train(train_set, spec, cfg.train, init);
  run.records = evaluate_records(run.history.final_head, eval_set);
  run.report = full_report(run.records, resolve_policy(cfg, spec, eval_set.num_classes()));
  return run;
}

inline void write_run_outputs(const std::filesystem::path& dir, const TrainedRun& run) {
  write_text_file(dir / "report.json", report_json(run.report).dump(2) + "\n");
  write_text_file(dir / "history.jsonl", history_jsonl(run.history));
  save_head(run.history.final_head, dir / "head.json");
}

inline std::vector<std::pair<double, double>> rc_pairs(std::span<const ConfidenceRecord> records) {
  auto rc = risk_coverage(records);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(rc.size());
  for (const auto& p : rc) pts.emplace_back(p.coverage, p.risk);
  return pts;
}

}  // namespace detail

inline int cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  Dataset ds = detail::resolve_dataset(cfg);
  auto [train_set, eval_set] = [&] {
    try {
      return split(ds, cfg.split_fraction, cfg.seed);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("split: ") + e.what());
    }
  }();
  OracleHead init = detail::make_init(cfg, train_set);
  detail::TrainedRun run = detail::run_training(cfg, cfg.loss, train_set, eval_set, init);
  detail::write_run_outputs(cfg.out_dir, run);
  log << "trained " << loss_label(cfg.loss) << " on " << train_set.size() << " samples, "
      << run.history.steps.size() << " steps; eval on " << eval_set.size() << "\n"
      << report_json(run.report).dump(2) << "\n";
  return 0;
}

inline int cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.head_path.empty()) throw config_error("eval requires head.path");
  Dataset ds = detail::resolve_dataset(cfg);
  OracleHead head = load_head(cfg.head_path);
  if (head.w.size() != ds.dim())
    throw data_error("head dimension " + std::to_string(head.w.size()) +
                     " does not match dataset dimension " + std::to_string(ds.dim()));
  auto records = evaluate_records(head, ds);
  MetricsReport rep = full_report(records, detail::resolve_policy(cfg, cfg.loss, ds.num_classes()));
  write_text_file(std::filesystem::path(cfg.out_dir) / "report.json",
                  report_json(rep).dump(2) + "\n");
  log << report_json(rep).dump(2) << "\n";
  return 0;
}

inline int cmd_report(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.head_path.empty()) throw config_error("report requires head.path");
  Dataset ds = detail::resolve_dataset(cfg);
  OracleHead head = load_head(cfg.head_path);
  if (head.w.size() != ds.dim())
    throw data_error("head dimension " + std::to_string(head.w.size()) +
                     " does not match dataset dimension " + std::to_string(ds.dim()));
  auto records = evaluate_records(head, ds);
  ThresholdPolicy policy = detail::resolve_policy(cfg, cfg.loss, ds.num_classes());
  MetricsReport rep = full_report(records, policy);
  std::filesystem::path out(cfg.out_dir);
  write_text_file(out / "report.json", report_json(rep).dump(2) + "\n");
  write_text_file(out / "separability.json", separability_json(separability(records)).dump(2) + "\n");

  auto roc = roc_points(records);
  std::vector<std::pair<double, double>> roc_xy;
  for (const auto& p : roc) roc_xy.emplace_back(p.fpr, p.tpr);
  write_text_file(out / "curves" / "roc.csv", curve_csv("fpr", "tpr", roc_xy));
  for (bool err : {false, true}) {
    auto pr = pr_points(records, err);
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : pr) xy.emplace_back(p.recall, p.precision);
    write_text_file(out / "curves" / (err ? "pr_error.csv" : "pr_success.csv"),
                    curve_csv("recall", "precision", xy));
  }
  write_text_file(out / "curves" / "risk_coverage.csv",
                  curve_csv("coverage", "risk", detail::rc_pairs(records)));

  HistogramSummary h = histogram(records, policy, cfg.bins);
  std::string csv = "bin_lo,bin_hi,tp,fp,tn,fn,abstain\n";
  for (uint32_t i = 0; i < cfg.bins; ++i) {
    csv += format_double(h.edges[i]) + "," + format_double(h.edges[i + 1]) + "," +
           std::to_string(h.tp[i]) + "," + std::to_string(h.fp[i]) + "," +
           std::to_string(h.tn[i]) + "," + std::to_string(h.fn[i]) + "," +
           std::to_string(h.abstain[i]) + "\n";
  }
  write_text_file(out / "histogram.csv", csv);
  log << "report written to " << out.string() << "\n";
  return 0;
}

inline int cmd_synth(const ExperimentConfig& cfg, std::ostream& log) {
  SynthConfig sc = cfg.synth;
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("synth: ") + e.what());
  }
  Dataset ds = synth_generate(sc);
  std::filesystem::path out(cfg.out_dir);
  if (out.extension().empty()) out /= "synth.twf";
  save_dataset(ds, out);
  log << "wrote " << ds.size() << " samples (" << ds.n_pos() << " pos, " << ds.n_neg()
      << " neg) to " << out.string() << "\n";
  return 0;
}

inline int cmd_bound(double loss_max, double hypotheses, double delta, uint64_t samples,
                     std::ostream& log) {
  double bound;
  try {
    bound = generalization_bound({loss_max, hypotheses, delta, samples});
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", bound);
  log << buf << "\n";
  return 0;
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::span<const double> grid, SweepPhase phase,
                     unsigned workers, std::ostream& log) {
  if (grid.empty()) throw config_error("sweep requires a nonempty --grid");
  if (cfg.loss.kind != LossKind::SteepSlope)
    throw config_error("sweep requires loss.kind = ss");
  Dataset ds = detail::resolve_dataset(cfg);
  auto [train_set, eval_set] = [&] {
    try {
      return split(ds, cfg.split_fraction, cfg.seed);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("split: ") + e.what());
    }
  }();
  OracleHead init = detail::make_init(cfg, train_set);
  auto rows = sweep_alpha(train_set, eval_set, cfg.loss, cfg.train, init, grid, phase, workers);
  std::string csv = "alpha,loss,tpr,tnr\n";
  size_t ok = 0;
  int first_fail = 0;
  for (const auto& r : rows) {
    if (r.ok) {
      csv += format_double(r.alpha) + "," + format_double(r.loss) + "," +
             format_double(r.tpr) + "," + format_double(r.tnr) + "\n";
      ++ok;
    } else {
      log << "grid point alpha=" << format_double(r.alpha) << " failed: " << r.error << "\n";
      if (first_fail == 0)
        first_fail = r.error.find("non-finite") != std::string::npos ? 3 : 2;
    }
  }
  write_text_file(std::filesystem::path(cfg.out_dir) / "sweep.csv", csv);
  log << "sweep complete: " << ok << "/" << rows.size() << " grid points";
  if (ok < rows.size()) log << " (partial results)";
  log << "\n";
  return ok == rows.size() ? 0 : first_fail;
}

// One training per loss under one shared TrainConfig/seed/init; refuses
// configs whose TrainConfig sections disagree.
inline int cmd_compare(const std::vector<ExperimentConfig>& cfgs,
                       const std::vector<LossSpec>& specs, std::ostream& log) {
  if (cfgs.empty() || specs.size() != cfgs.size() || specs.size() < 2)
    throw config_error("compare requires at least two losses");
  const ExperimentConfig& base = cfgs.front();
  for (const auto& c : cfgs) {
    const TrainConfig &a = base.train, &b = c.train;
    bool same = a.lr_max == b.lr_max && a.momentum == b.momentum &&
                a.weight_decay == b.weight_decay && a.batch_size == b.batch_size &&
                a.epochs == b.epochs && a.seed == b.seed && a.schedule == b.schedule &&
                base.seed == c.seed && base.head_mode == c.head_mode &&
                base.init == c.init && base.init_norm == c.init_norm &&
                base.split_fraction == c.split_fraction &&
                base.data_path == c.data_path && base.use_synth == c.use_synth;
    if (!same) throw config_error("compare: mismatched TrainConfig across losses");
  }
  Dataset ds = detail::resolve_dataset(base);
  auto [train_set, eval_set] = [&] {
    try {
      return split(ds, base.split_fraction, base.seed);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("split: ") + e.what());
    }
  }();
  OracleHead init = detail::make_init(base, train_set);
  std::filesystem::path out(base.out_dir);
  std::string csv = "loss,acc,fpr_at_95tpr,aupr_error,aupr_success,auc,tpr,tnr\n";
  for (size_t i = 0; i < specs.size(); ++i) {
    const LossSpec& spec = specs[i];
    std::string label = loss_label(spec);
    detail::TrainedRun run = detail::run_training(cfgs[i], spec, train_set, eval_set, init);
    std::filesystem::path dir = out / label;
    detail::write_run_outputs(dir, run);
    write_text_file(dir / "separability.json",
                    separability_json(separability(run.records)).dump(2) + "\n");
    write_text_file(dir / "curves" / "risk_coverage.csv",
                    curve_csv("coverage", "risk", detail::rc_pairs(run.records)));
    const MetricsReport& r = run.report;
    csv += label + "," + format_double(r.acc) + "," + format_double(r.fpr_at_95tpr) + "," +
           format_double(r.aupr_error) + "," + format_double(r.aupr_success) + "," +
           format_double(r.auc) + "," + format_double(r.tpr) + "," + format_double(r.tnr) + "\n";
    log << label << ": tpr=" << format_double(r.tpr) << " tnr=" << format_double(r.tnr)
        << " auc=" << format_double(r.auc) << "\n";
  }
  write_text_file(out / "compare.csv", csv);
  return 0;
}

// Maps exceptions to the documented exit codes.
template <typename Fn>
int run_command(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const numeric_error& e) {
    err << "numeric abort: " << e.what() << "\n";
    return 3;
  } catch (const data_error& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace trustpred

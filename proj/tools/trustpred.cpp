// trustpred: train and evaluate linear trustworthiness heads.
//
//   trustpred synth   --out data.twf --seed 42
//   trustpred train   --config exp.cfg --loss ss --alpha-pos 1 --alpha-neg 3
//   trustpred eval    --head out/head.json --data data.twf --out out
//   trustpred report  --head out/head.json --data data.twf --out out
//   trustpred sweep   --config exp.cfg --grid 1,3,5 --phase neg
//   trustpred compare --config exp.cfg --loss ce --loss focal --loss ss
//   trustpred bound   --alpha-pos 1 --alpha-neg 3 --hypotheses 1e6 \
//                     --delta 0.05 --samples 1281167

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trustpred/experiment.hpp"

namespace {

using namespace trustpred;

struct FlagOverrides {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> loss;
  std::optional<double> alpha_pos, alpha_neg, gamma, beta, w_pos, w_neg;
  std::optional<std::string> wrapper, head_mode, data, head, init;
  std::optional<double> threshold_neg, split, init_norm;
  std::optional<bool> synth_flag;
};

void add_common_flags(CLI::App* cmd, FlagOverrides& f) {
  cmd->add_option("--config", f.config_path, "key=value config file");
  cmd->add_option("--seed", f.seed, "top-level seed");
  cmd->add_option("--out", f.out, "output directory (or file for synth)");
  cmd->add_option("--loss", f.loss, "loss kind: ce|focal|tcp|ss");
  cmd->add_option("--alpha-pos", f.alpha_pos, "steep slope positive-slide exponent");
  cmd->add_option("--alpha-neg", f.alpha_neg, "steep slope negative-slide exponent");
  cmd->add_option("--gamma", f.gamma, "focal exponent");
  cmd->add_option("--wrapper", f.wrapper, "imbalance wrapper: none|class_balanced|fixed");
  cmd->add_option("--beta", f.beta, "class-balanced beta");
  cmd->add_option("--w-pos", f.w_pos, "fixed wrapper weight for o=1");
  cmd->add_option("--w-neg", f.w_neg, "fixed wrapper weight for o=0");
  cmd->add_option("--head-mode", f.head_mode, "signed_distance|raw_linear");
  cmd->add_option("--threshold-neg", f.threshold_neg, "negative threshold (default: auto)");
  cmd->add_option("--data", f.data, "dataset file (.twf or .csv)");
  cmd->add_flag("--synth", f.synth_flag, "generate the dataset from the synth.* config");
  cmd->add_option("--split", f.split, "train fraction of the dataset");
  cmd->add_option("--head", f.head, "head file for eval/report");
  cmd->add_option("--init", f.init, "head init: gaussian|centroid");
  cmd->add_option("--init-norm", f.init_norm, "centroid init weight norm");
}

// Config file first, then flags on top.
ExperimentConfig build_config(const FlagOverrides& f) {
  ExperimentConfig cfg;
  if (f.config_path) load_config_file(cfg, *f.config_path);
  auto set = [&cfg](const std::string& key, const std::string& value) {
    apply_config_kv(cfg, key, value);
  };
  if (f.seed) set("seed", std::to_string(*f.seed));
  if (f.out) set("out", *f.out);
  if (f.loss) set("loss.kind", *f.loss);
  if (f.alpha_pos) set("loss.alpha_pos", format_double(*f.alpha_pos));
  if (f.alpha_neg) set("loss.alpha_neg", format_double(*f.alpha_neg));
  if (f.gamma) set("loss.gamma", format_double(*f.gamma));
  if (f.wrapper) set("loss.wrapper", *f.wrapper);
  if (f.beta) set("loss.beta", format_double(*f.beta));
  if (f.w_pos) set("loss.w_pos", format_double(*f.w_pos));
  if (f.w_neg) set("loss.w_neg", format_double(*f.w_neg));
  if (f.head_mode) set("head.mode", *f.head_mode);
  if (f.threshold_neg) set("policy.threshold_neg", format_double(*f.threshold_neg));
  if (f.data) set("data.path", *f.data);
  if (f.synth_flag) set("data.synth", *f.synth_flag ? "true" : "false");
  if (f.split) set("data.split", format_double(*f.split));
  if (f.head) set("head.path", *f.head);
  if (f.init) set("train.init", *f.init);
  if (f.init_norm) set("train.init_norm", format_double(*f.init_norm));
  return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      size_t pos = 0;
      grid.push_back(std::stod(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw config_error("--grid: not a number: \"" + cell + "\"");
    }
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trustworthiness oracle training and evaluation"};
  app.require_subcommand(1);

  FlagOverrides flags;
  std::string grid_text = "1,3,5";
  std::string phase_text = "neg";
  unsigned workers = 1;
  std::vector<std::string> compare_losses;
  std::vector<std::string> compare_configs;
  double bound_loss_max = -1.0;
  double bound_hypotheses = 0.0;
  double bound_delta = 0.05;
  uint64_t bound_samples = 0;

  CLI::App* c_train = app.add_subcommand("train", "train a head and report eval metrics");
  add_common_flags(c_train, flags);
  CLI::App* c_eval = app.add_subcommand("eval", "evaluate an existing head");
  add_common_flags(c_eval, flags);
  CLI::App* c_report = app.add_subcommand("report", "full report bundle for an existing head");
  add_common_flags(c_report, flags);
  CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common_flags(c_synth, flags);
  CLI::App* c_sweep = app.add_subcommand("sweep", "alpha sweep for the steep slope loss");
  add_common_flags(c_sweep, flags);
  c_sweep->add_option("--grid", grid_text, "comma-separated alpha grid");
  c_sweep->add_option("--phase", phase_text, "neg (sweep alpha_neg) or pos");
  c_sweep->add_option("--workers", workers, "parallel trainings");
  CLI::App* c_compare = app.add_subcommand("compare", "train several losses on one setup");
  add_common_flags(c_compare, flags);
  c_compare->add_option("--losses", compare_losses,
                        "loss tokens, e.g. ce focal:2 ss:1:3 (repeatable)");
  c_compare->add_option("--configs", compare_configs,
                        "one config file per loss (must share TrainConfig)");
  CLI::App* c_bound = app.add_subcommand("bound", "finite-class generalization bound");
  c_bound->add_option("--loss-max", bound_loss_max, "loss supremum (overrides alphas)");
  c_bound->add_option("--alpha-pos", flags.alpha_pos, "steep slope positive exponent");
  c_bound->add_option("--alpha-neg", flags.alpha_neg, "steep slope negative exponent");
  c_bound->add_option("--hypotheses", bound_hypotheses, "hypothesis class size")->required();
  c_bound->add_option("--delta", bound_delta, "confidence parameter");
  c_bound->add_option("--samples", bound_samples, "training set size")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are config errors
  }

  using trustpred::run_command;
  if (c_bound->parsed()) {
    return run_command(
        [&] {
          double lm = bound_loss_max;
          if (lm < 0.0) {
            if (!flags.alpha_pos || !flags.alpha_neg)
              throw trustpred::config_error("bound needs --loss-max or both --alpha-pos/--alpha-neg");
            lm = trustpred::loss_range_max(*flags.alpha_pos, *flags.alpha_neg);
          }
          return trustpred::cmd_bound(lm, bound_hypotheses, bound_delta, bound_samples,
                                      std::cout);
        },
        std::cerr);
  }
  if (c_compare->parsed()) {
    return run_command(
        [&] {
          std::vector<trustpred::ExperimentConfig> cfgs;
          std::vector<trustpred::LossSpec> specs;
          if (!compare_configs.empty()) {
            for (const auto& path : compare_configs) {
              FlagOverrides per = flags;
              per.config_path = path;
              cfgs.push_back(build_config(per));
              specs.push_back(cfgs.back().loss);
            }
          } else {
            trustpred::ExperimentConfig base = build_config(flags);
            for (const auto& token : compare_losses) {
              cfgs.push_back(base);
              specs.push_back(trustpred::parse_loss_token(base.loss, token));
            }
          }
          return trustpred::cmd_compare(cfgs, specs, std::cout);
        },
        std::cerr);
  }
  return run_command(
      [&] {
        trustpred::ExperimentConfig cfg = build_config(flags);
        if (c_train->parsed()) return trustpred::cmd_train(cfg, std::cout);
        if (c_eval->parsed()) return trustpred::cmd_eval(cfg, std::cout);
        if (c_report->parsed()) return trustpred::cmd_report(cfg, std::cout);
        if (c_synth->parsed()) {
          if (!cfg.use_synth) cfg.use_synth = true;  // synth implies the synth source
          return trustpred::cmd_synth(cfg, std::cout);
        }
        if (c_sweep->parsed()) {
          auto grid = parse_grid(grid_text);
          trustpred::SweepPhase phase;
          if (phase_text == "neg") phase = trustpred::SweepPhase::NegFirst;
          else if (phase_text == "pos") phase = trustpred::SweepPhase::PosSecond;
          else throw trustpred::config_error("--phase must be neg or pos");
          return trustpred::cmd_sweep(cfg, grid, phase, workers, std::cout);
        }
        throw trustpred::config_error("no subcommand");
      },
      std::cerr);
}

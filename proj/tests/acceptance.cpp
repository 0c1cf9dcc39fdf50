// Release gate: nine self-contained checks, one PASS/FAIL line each, nonzero
// exit if any fails. Tolerances and decision thresholds are pinned here, not
// configurable. Runs standalone (no test framework).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "trustpred/experiment.hpp"

using namespace trustpred;

namespace {

// Direction-reproduction thresholds, locked at half the gaps observed when the
// suite was first calibrated at these exact settings. Calibration run: CE
// tpr 0.9890 tnr 0.1997 auc 0.8568 avg_kl 1.6746, focal tpr 0.9250 tnr 0.4826,
// steep slope tpr 0.8510 tnr 0.6837 auc 0.8570 avg_kl 1.2365. The detail line
// each criterion prints shows the current observations next to the locks.
constexpr double kInitNorm = 0.01;     // shared centroid init scale; results are
                                       // stable for norms in [0.002, 0.03]
constexpr double kTnrGap = 0.24;       // half the observed 0.4840 TNR gap
constexpr double kAucSlack = 0.02;     // steep slope AUC may trail CE AUC by at
                                       // most this (observed gap is +0.0002)
constexpr double kCeTprFloor = 0.95;   // overconfidence signature: near-total TPR;
                                       // midpoint of CE 0.9890 and focal 0.9250
constexpr double kCeTnrCeil = 0.34;    // ... with collapsed TNR; midpoint of CE
                                       // 0.1997 and the nearest competitor 0.4826

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int idx, const char* name, bool ok, double secs, double budget,
            const std::string& detail) {
  bool in_budget = budget <= 0.0 || secs <= budget;
  bool pass = ok && in_budget;
  if (!pass) ++g_failures;
  std::printf("[%s] criterion %d: %s (%.2f s%s) %s\n", pass ? "PASS" : "FAIL", idx, name, secs,
              in_budget ? "" : ", over budget", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---- criterion 1: unit values ------------------------------------------

void criterion_unit_values() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream what;
  auto expect = [&](const char* label, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) {
      ok = false;
      what << label << " got " << fmt(got) << " want " << fmt(want) << "; ";
    }
  };
  expect("ce(0,1)", loss_ce(0.0, 1).value, std::log(2.0), 1e-12);
  expect("focal(0,1,2)", loss_focal(0.0, 1, 2.0).value, 0.25 * std::log(2.0), 1e-12);
  expect("slope(0,1)", loss_steep_slope(0.0, 1, 1.0, 3.0).value, 1.0 - std::exp(-1.0), 1e-12);
  expect("slope sup o=1", loss_steep_slope(-1e12, 1, 1.0, 3.0).value,
         std::exp(1.0) - std::exp(-1.0), 1e-6);
  expect("slope sup o=0", loss_steep_slope(1e12, 0, 1.0, 3.0).value,
         std::exp(3.0) - std::exp(-3.0), 1e-6);
  expect("slope floor o=1", loss_steep_slope(1e12, 1, 1.0, 3.0).value, 0.0, 1e-6);
  expect("range_max(1,3)", loss_range_max(1.0, 3.0), std::exp(3.0) - std::exp(-3.0), 1e-12);
  expect("range_max(2,5)", loss_range_max(2.0, 5.0), 148.40642115557752, 1e-12);
  if (ok) what << "all frozen values within tolerance";
  report(1, "loss unit values", ok, seconds_since(t0), 1.0, what.str());
}

// ---- criterion 2: gradient suite ---------------------------------------

void criterion_gradients() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024, "acceptance.grad");
  int bad = 0;
  std::string first;
  auto check = [&](const char* label, const std::function<double(double)>& f, double z,
                   double analytic) {
    double fd = oracles::central_diff(f, z);
    if (!oracles::grad_close(analytic, fd, 1e-6, 1e-9)) {
      ++bad;
      if (first.empty())
        first = std::string(label) + " at z=" + fmt(z) + " analytic=" + fmt(analytic) +
                " fd=" + fmt(fd);
    }
  };
  for (int i = 0; i < 1000; ++i) {
    double z = (rng.uniform() - 0.5) * 30.0;
    int o = rng.uniform() < 0.5 ? 1 : 0;
    double gamma = rng.uniform() * 5.0;
    double ap = 0.5 + rng.uniform() * 4.0;
    double an = 0.5 + rng.uniform() * 4.0;
    double ps = rng.uniform();
    check("ce", [o](double v) { return loss_ce(v, o).value; }, z, loss_ce(z, o).grad_z);
    check("focal", [o, gamma](double v) { return loss_focal(v, o, gamma).value; }, z,
          loss_focal(z, o, gamma).grad_z);
    check("tcp", [ps](double v) { return loss_tcp(sigmoid(v), ps).value; }, z,
          loss_tcp(sigmoid(z), ps).grad_z);
    check("slope", [o, ap, an](double v) { return loss_steep_slope(v, o, ap, an).value; }, z,
          loss_steep_slope(z, o, ap, an).grad_z);
  }
  std::string detail = bad == 0 ? "4000 of 4000 gradient checks within 1e-6"
                                : std::to_string(bad) + " mismatches, first: " + first;
  report(2, "analytic gradients vs central differences", bad == 0, seconds_since(t0), 5.0,
         detail);
}

// ---- criterion 3: metric oracles ---------------------------------------

void criterion_metric_oracles() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024, "acceptance.metrics");
  int bad = 0, sets = 0;
  std::string first;
  auto flag = [&](const std::string& msg) {
    ++bad;
    if (first.empty()) first = msg;
  };
  while (sets < 500) {
    uint64_t n = 2 + rng.below(199);
    bool dyadic = sets % 2 == 0;
    std::vector<ConfidenceRecord> rs;
    rs.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      double c = dyadic ? static_cast<double>(rng.below(257)) / 256.0 : rng.uniform();
      rs.push_back({c, rng.uniform() < 0.6 ? 1 : 0});
    }
    bool pos = false, neg = false;
    for (const auto& r : rs) (r.o == 1 ? pos : neg) = true;
    if (!pos || !neg) continue;
    ++sets;

    double a = auc(rs), a_ref = oracles::auc_pairwise(rs);
    if (!(std::abs(a - a_ref) <= 1e-12))
      flag("auc " + fmt(a) + " vs " + fmt(a_ref) + " (n=" + std::to_string(n) + ")");
    for (bool err : {false, true}) {
      double p = aupr(rs, err), p_ref = oracles::ap_exhaustive(rs, err);
      if (!(std::abs(p - p_ref) <= 1e-12))
        flag(std::string("aupr_") + (err ? "error " : "success ") + fmt(p) + " vs " + fmt(p_ref));
    }
    auto rc = risk_coverage(rs);
    uint64_t wrong = 0;
    for (const auto& r : rs) wrong += static_cast<uint64_t>(1 - r.o);
    double exact = static_cast<double>(wrong) / static_cast<double>(n);
    if (rc.back().coverage != 1.0 || rc.back().risk != exact)
      flag("risk-coverage endpoint " + fmt(rc.back().risk) + " vs exact " + fmt(exact));
  }
  std::string detail = bad == 0 ? "500 record sets: auc, aupr within 1e-12, endpoints exact"
                                : std::to_string(bad) + " mismatches, first: " + first;
  report(3, "curve metrics vs brute force", bad == 0, seconds_since(t0), 30.0, detail);
}

// ---- criterion 4: deviation bound calculator ---------------------------

void criterion_bound() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024, "acceptance.bound");
  int bad = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    BoundInput in;
    in.loss_max = 0.1 + rng.uniform() * 100.0;
    in.hypothesis_count = 1.0 + rng.uniform() * 1e9;
    in.delta = 0.001 + rng.uniform() * 0.99;
    in.sample_count = 1 + rng.below(10000000);
    double b = generalization_bound(in);

    BoundInput quad = in;
    quad.sample_count = in.sample_count * 4;
    double half = generalization_bound(quad);
    if (!(std::abs(half - b / 2.0) <= 1e-15 * b)) {
      ++bad;
      if (first.empty()) first = "sqrt scaling: " + fmt(half) + " vs " + fmt(b / 2.0);
    }
    BoundInput richer = in;
    richer.hypothesis_count = in.hypothesis_count * (1.0 + rng.uniform() * 10.0);
    if (generalization_bound(richer) < b) {
      ++bad;
      if (first.empty()) first = "not monotone in hypothesis count";
    }
    BoundInput surer = in;
    surer.delta = in.delta * rng.uniform();
    if (surer.delta > 0.0 && generalization_bound(surer) < b) {
      ++bad;
      if (first.empty()) first = "not monotone in delta";
    }
  }
  std::string detail = bad == 0 ? "sqrt scaling exact to 1e-15, monotone over 1000 draws"
                                : std::to_string(bad) + " violations, first: " + first;
  report(4, "deviation bound scaling laws", bad == 0, seconds_since(t0), 1.0, detail);
}

// ---- criterion 5: separability formulas --------------------------------

void criterion_separability() {
  auto t0 = std::chrono::steady_clock::now();
  GaussianFit a{0.0, 1.0, 2}, b{1.0, 1.0, 2};
  bool ok = true;
  std::ostringstream what;
  double kl = kl_gaussian(a, b);
  double bh = bhattacharyya(a, b);
  if (!(std::abs(kl - 0.5) <= 1e-12)) {
    ok = false;
    what << "kl " << fmt(kl) << " want 0.5; ";
  }
  if (!(std::abs(bh - 0.125) <= 1e-12)) {
    ok = false;
    what << "bhattacharyya " << fmt(bh) << " want 0.125; ";
  }
  if (kl_gaussian(a, a) != 0.0 || bhattacharyya(b, b) != 0.0 || avg_kl(a, a) != 0.0) {
    ok = false;
    what << "identity not exactly 0; ";
  }
  if (ok) what << "kl=0.5, bhattacharyya=0.125, identities exactly 0";
  report(5, "gaussian separability formulas", ok, seconds_since(t0), 1.0, what.str());
}

// ---- criteria 6 and 7: direction reproduction --------------------------

struct HeadOutcome {
  double tpr, tnr, auc, avg_kl;
};

void criteria_direction() {
  auto t0 = std::chrono::steady_clock::now();

  SynthConfig sc;
  sc.dim = 16;
  sc.n = 60000;
  sc.imbalance = 0.85;
  sc.mean_separation = 1.5;
  sc.sigma = 1.0;
  sc.seed = 42;
  Dataset ds = synth_generate(sc);
  auto [train_set, eval_set] = split(ds, 5.0 / 6.0, 42);

  TrainConfig cfg;  // pinned schedule: 1 epoch, batch 40, lr 1e-5, momentum 0.05
  cfg.lr_max = 1e-5;
  cfg.momentum = 0.05;
  cfg.batch_size = 40;
  cfg.epochs = 1;
  cfg.seed = 42;

  // All heads start from one shared small-norm class-mean direction, the
  // stand-in for a pretrained backbone's informative features; with the
  // signed-distance head this keeps the pinned tiny learning rate effective.
  OracleHead init = init_head_centroid(train_set, kInitNorm, HeadMode::SignedDistance);

  auto run_one = [&](const LossSpec& spec) {
    TrainHistory h = train(train_set, spec, cfg, init);
    auto records = evaluate_records(h.final_head, eval_set);
    MetricsReport rep = full_report(records, ThresholdPolicy{});
    SeparabilityReport sep = separability(records);
    return HeadOutcome{rep.tpr, rep.tnr, rep.auc, sep.avg_kl};
  };
  LossSpec ce;
  LossSpec focal;
  focal.kind = LossKind::Focal;
  focal.gamma = 2.0;
  LossSpec slope;
  slope.kind = LossKind::SteepSlope;
  slope.alpha_pos = 1.0;
  slope.alpha_neg = 3.0;

  HeadOutcome r_ce = run_one(ce);
  HeadOutcome r_focal = run_one(focal);
  HeadOutcome r_ss = run_one(slope);
  double secs = seconds_since(t0);

  bool ok6 = r_ss.tnr >= r_ce.tnr + kTnrGap && r_ss.avg_kl > r_ce.avg_kl &&
             r_ss.auc >= r_ce.auc - kAucSlack;
  std::ostringstream d6;
  d6 << "tnr ce=" << fmt(r_ce.tnr) << " focal=" << fmt(r_focal.tnr) << " ss=" << fmt(r_ss.tnr)
     << " (gap " << fmt(r_ss.tnr - r_ce.tnr) << " >= " << fmt(kTnrGap) << "); avg_kl ce="
     << fmt(r_ce.avg_kl) << " ss=" << fmt(r_ss.avg_kl) << " (ss > ce required); auc ce="
     << fmt(r_ce.auc) << " ss=" << fmt(r_ss.auc);
  report(6, "steep slope recovers the untrustworthy class", ok6, secs, 120.0, d6.str());

  bool ok7 = r_ce.tpr > kCeTprFloor && r_ce.tnr < kCeTnrCeil;
  std::ostringstream d7;
  d7 << "ce tpr=" << fmt(r_ce.tpr) << " (> " << fmt(kCeTprFloor) << "), tnr=" << fmt(r_ce.tnr)
     << " (< " << fmt(kCeTnrCeil) << ")";
  report(7, "cross entropy shows the overconfidence signature", ok7, 0.0, 0.0, d7.str());
}

// ---- criterion 8: scale invariance -------------------------------------

void criterion_scale_invariance() {
  auto t0 = std::chrono::steady_clock::now();
  SynthConfig sc;
  sc.dim = 8;
  sc.n = 2000;
  sc.seed = 7;
  Dataset ds = synth_generate(sc);
  OracleHead head = init_head_gaussian(8, 3, HeadMode::SignedDistance);
  MetricsReport base = full_report(evaluate_records(head, ds), ThresholdPolicy{});

  bool ok = true;
  std::ostringstream what;
  for (double c : {1e-3, 1.0, 1e3}) {
    OracleHead scaled = head;
    for (auto& v : scaled.w) v *= c;
    scaled.b *= c;
    MetricsReport rep = full_report(evaluate_records(scaled, ds), ThresholdPolicy{});
    bool same = rep.fpr_at_95tpr == base.fpr_at_95tpr && rep.aupr_error == base.aupr_error &&
                rep.aupr_success == base.aupr_success && rep.auc == base.auc &&
                rep.tpr == base.tpr && rep.tnr == base.tnr && rep.acc == base.acc &&
                rep.counts.tp == base.counts.tp && rep.counts.fp == base.counts.fp &&
                rep.counts.tn == base.counts.tn && rep.counts.fn == base.counts.fn;
    if (!same) {
      ok = false;
      what << "report differs at scale " << fmt(c) << "; ";
    }
  }
  if (ok) what << "reports bit-identical at scales 1e-3, 1, 1e3";
  report(8, "signed-distance reports ignore head scale", ok, seconds_since(t0), 1.0, what.str());
}

// ---- criterion 9: byte determinism -------------------------------------

void criterion_determinism() {
  auto t0 = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "trustpred_acceptance";
  fs::remove_all(root);

  ExperimentConfig cfg;
  cfg.use_synth = true;
  cfg.synth.dim = 16;
  cfg.synth.n = 60000;
  cfg.synth.imbalance = 0.85;
  cfg.synth.mean_separation = 1.5;
  cfg.synth.seed = 42;
  cfg.split_fraction = 5.0 / 6.0;
  cfg.seed = 42;
  cfg.train.seed = 42;
  cfg.init = InitKind::Centroid;
  cfg.init_norm = kInitNorm;

  bool ok = true;
  std::string what;
  std::ostringstream log;
  try {
    cfg.out_dir = (root / "a").string();
    cmd_train(cfg, log);
    cfg.out_dir = (root / "b").string();
    cmd_train(cfg, log);
    for (const char* f : {"report.json", "history.jsonl"}) {
      std::string a = read_file_bytes(root / "a" / f);
      std::string b = read_file_bytes(root / "b" / f);
      if (a != b) {
        ok = false;
        what += std::string(f) + " differs between runs; ";
      }
    }
    if (ok) what = "report.json and history.jsonl byte-identical across reruns";
  } catch (const std::exception& e) {
    ok = false;
    what = std::string("exception: ") + e.what();
  }
  fs::remove_all(root);
  report(9, "training runs are byte-deterministic", ok, seconds_since(t0), 120.0, what);
}

}  // namespace

int main() {
  criterion_unit_values();
  criterion_gradients();
  criterion_metric_oracles();
  criterion_bound();
  criterion_separability();
  criteria_direction();
  criterion_scale_invariance();
  criterion_determinism();
  if (g_failures == 0) {
    std::printf("all 9 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}

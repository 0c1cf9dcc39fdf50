#pragma once

// Linear trustworthiness head and its trainer.
//
// RawLinear scores z = w.x + b; SignedDistance scores z = (w.x + b)/|w|,
// which is invariant under positive rescaling of (w, b). Confidence is
// sig(z). Training is plain SGD with heavy-ball momentum and a one-cycle
// learning rate; given identical dataset, spec, config and init, it is
// bit-deterministic.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "trustpred/data_io.hpp"
#include "trustpred/losses.hpp"
#include "trustpred/metrics.hpp"
#include "trustpred/random.hpp"

namespace trustpred {

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class HeadMode { RawLinear, SignedDistance };

struct OracleHead {
  std::vector<double> w;
  double b = 0.0;
  HeadMode mode = HeadMode::SignedDistance;
};

inline double weight_norm(const OracleHead& head) {
  double s = 0.0;
  for (double v : head.w) s += v * v;
  return std::sqrt(s);
}

inline double forward(const OracleHead& head, std::span<const float> x) {
  if (x.size() != head.w.size())
    throw std::invalid_argument("forward: feature dimension mismatch");
  double z = head.b;
  for (size_t i = 0; i < x.size(); ++i) z += head.w[i] * static_cast<double>(x[i]);
  if (head.mode == HeadMode::SignedDistance) {
    double norm = weight_norm(head);
    if (norm == 0.0) throw std::domain_error("forward: zero-norm w in signed-distance mode");
    z /= norm;
  }
  return z;
}

// First maximal index; ties resolve to the lowest class.
inline int argmax_class(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax_class: empty score vector");
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return static_cast<int>(best);
}

inline int label_correctness(int predicted, int truth, int num_classes) {
  if (num_classes <= 0) throw std::invalid_argument("num_classes must be positive");
  if (predicted < 0 || predicted >= num_classes)
    throw std::out_of_range("predicted class index out of range");
  if (truth < 0 || truth >= num_classes)
    throw std::out_of_range("true class index out of range");
  return predicted == truth ? 1 : 0;
}

enum class Schedule { OneCycle, Constant };

struct TrainConfig {
  double lr_max = 1e-5;
  double momentum = 0.05;
  double weight_decay = 0.0;
  uint32_t batch_size = 40;
  uint32_t epochs = 1;
  uint64_t seed = 0;
  Schedule schedule = Schedule::OneCycle;

  void validate() const {
    if (!(lr_max >= 0.0) || !std::isfinite(lr_max))
      throw std::invalid_argument("lr_max must be finite and >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw std::invalid_argument("momentum must lie in [0,1)");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
      throw std::invalid_argument("weight_decay must be finite and >= 0");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  }
};

// Triangular schedule: up from lr_max/total at step 0 to the peak lr_max at
// step floor(total/2), then down to lr_max/ceil(total/2) at the last step
// (the zero floor sits one step past the end).
inline double one_cycle_lr(uint64_t step, uint64_t total_steps, double lr_max) {
  if (total_steps == 0) throw std::invalid_argument("one_cycle_lr: zero total steps");
  if (step >= total_steps) throw std::invalid_argument("one_cycle_lr: step out of range");
  uint64_t mid = total_steps / 2;
  if (step <= mid) {
    if (mid == 0) return lr_max;
    double t = static_cast<double>(total_steps);
    double m = static_cast<double>(mid);
    return lr_max * (m + static_cast<double>(step) * (t - 1.0)) / (m * t);
  }
  return lr_max * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - mid);
}

struct StepRecord {
  uint64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  OracleHead final_head;
  double wall_seconds = 0.0;
};

// w ~ N(0, 1) / sqrt(d), b = 0.
inline OracleHead init_head_gaussian(uint32_t dim, uint64_t seed, HeadMode mode) {
  if (dim == 0) throw std::invalid_argument("init: dimension must be positive");
  Rng rng(seed, "init");
  OracleHead head;
  head.mode = mode;
  head.w.resize(dim);
  double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& v : head.w) v = rng.gaussian() * scale;
  head.b = 0.0;
  return head;
}

// Class-mean difference direction scaled to |w| = norm, b = 0. Plays the
// role of a pretrained starting point: informative direction, small norm so
// the signed-distance gradients keep a tiny learning rate effective.
inline OracleHead init_head_centroid(const Dataset& ds, double norm, HeadMode mode) {
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw std::invalid_argument("init: norm must be finite and > 0");
  if (ds.n_pos() == 0 || ds.n_neg() == 0)
    throw std::invalid_argument("centroid init needs both classes present");
  std::vector<double> diff(ds.dim(), 0.0);
  for (uint64_t i = 0; i < ds.size(); ++i) {
    auto x = ds.features(i);
    double w = ds.label(i) == 1 ? 1.0 / static_cast<double>(ds.n_pos())
                                : -1.0 / static_cast<double>(ds.n_neg());
    for (uint32_t j = 0; j < ds.dim(); ++j) diff[j] += w * static_cast<double>(x[j]);
  }
  double len = 0.0;
  for (double v : diff) len += v * v;
  len = std::sqrt(len);
  if (len == 0.0) throw std::invalid_argument("centroid init: identical class means");
  OracleHead head;
  head.mode = mode;
  head.b = 0.0;
  head.w.resize(ds.dim());
  for (uint32_t j = 0; j < ds.dim(); ++j) head.w[j] = diff[j] / len * norm;
  return head;
}

inline TrainHistory train(const Dataset& ds, const LossSpec& spec, const TrainConfig& cfg,
                          const OracleHead& init) {
  spec.validate();
  cfg.validate();
  if (ds.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (init.w.size() != ds.dim()) throw std::invalid_argument("train: head dimension mismatch");
  if (spec.kind == LossKind::Tcp && !ds.has_p_star())
    throw std::invalid_argument("TCP requires ground-truth-class probability");
  auto t0 = std::chrono::steady_clock::now();

  ClassCounts counts{ds.n_pos(), ds.n_neg()};
  uint64_t steps_per_epoch = (ds.size() + cfg.batch_size - 1) / cfg.batch_size;
  uint64_t total_steps = steps_per_epoch * cfg.epochs;

  TrainHistory hist;
  hist.final_head = init;
  hist.steps.reserve(total_steps);
  OracleHead& head = hist.final_head;
  std::vector<double> vel_w(head.w.size(), 0.0);
  double vel_b = 0.0;

  std::vector<uint64_t> order(ds.size());
  std::vector<BatchItem> items;
  std::vector<double> grad_w(head.w.size());
  uint64_t step = 0;
  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (uint64_t i = 0; i < ds.size(); ++i) order[i] = i;
    Rng rng(cfg.seed, "train.shuffle", epoch);
    rng.shuffle(order);
    for (uint64_t batch_idx = 0; batch_idx < steps_per_epoch; ++batch_idx, ++step) {
      uint64_t lo = batch_idx * cfg.batch_size;
      uint64_t hi = std::min<uint64_t>(lo + cfg.batch_size, ds.size());
      items.clear();
      for (uint64_t i = lo; i < hi; ++i) {
        uint64_t src = order[i];
        double z = forward(head, ds.features(src));
        if (!std::isfinite(z))
          throw numeric_error("non-finite head output at step " + std::to_string(step) +
                              ", batch " + std::to_string(batch_idx));
        std::optional<double> ps;
        if (auto p = ds.p_star(src)) ps = static_cast<double>(*p);
        items.push_back({z, ds.label(src), ps});
      }
      BatchEval ev = batch_loss(spec, items, counts);
      if (!std::isfinite(ev.value))
        throw numeric_error("non-finite loss at step " + std::to_string(step) + ", batch " +
                            std::to_string(batch_idx));
      double lr = cfg.schedule == Schedule::OneCycle
                      ? one_cycle_lr(step, total_steps, cfg.lr_max)
                      : cfg.lr_max;

      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      double grad_b = 0.0;
      if (head.mode == HeadMode::RawLinear) {
        for (size_t i = 0; i < items.size(); ++i) {
          double g = ev.grad_z[i];
          auto x = ds.features(order[lo + i]);
          for (size_t j = 0; j < grad_w.size(); ++j)
            grad_w[j] += g * static_cast<double>(x[j]);
          grad_b += g;
        }
      } else {
        // z = (w.x + b)/|w|: dz/dw = (x - z*w/|w|)/|w|, dz/db = 1/|w|.
        double norm = weight_norm(head);
        double sum_gz = 0.0;
        for (size_t i = 0; i < items.size(); ++i) {
          double g = ev.grad_z[i];
          auto x = ds.features(order[lo + i]);
          for (size_t j = 0; j < grad_w.size(); ++j)
            grad_w[j] += g * static_cast<double>(x[j]);
          sum_gz += g * items[i].z;
          grad_b += g;
        }
        for (size_t j = 0; j < grad_w.size(); ++j)
          grad_w[j] = (grad_w[j] - sum_gz * head.w[j] / norm) / norm;
        grad_b /= norm;
      }
      if (cfg.weight_decay != 0.0) {
        for (size_t j = 0; j < grad_w.size(); ++j) grad_w[j] += cfg.weight_decay * head.w[j];
        grad_b += cfg.weight_decay * head.b;
      }
      for (size_t j = 0; j < grad_w.size(); ++j) {
        vel_w[j] = cfg.momentum * vel_w[j] - lr * grad_w[j];
        head.w[j] += vel_w[j];
      }
      vel_b = cfg.momentum * vel_b - lr * grad_b;
      head.b += vel_b;

      hist.steps.push_back({step, lr, ev.value});
    }
  }
  hist.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return hist;
}

// Confidence records for a whole dataset under a head.
inline std::vector<ConfidenceRecord> evaluate_records(const OracleHead& head, const Dataset& ds) {
  std::vector<ConfidenceRecord> out;
  out.reserve(ds.size());
  for (uint64_t i = 0; i < ds.size(); ++i)
    out.push_back({sigmoid(forward(head, ds.features(i))), ds.label(i)});
  return out;
}

// Mean per-sample loss of a head over a dataset, without wrapper weighting.
inline double mean_loss(const OracleHead& head, const Dataset& ds, const LossSpec& spec) {
  if (ds.size() == 0) throw std::invalid_argument("mean_loss: empty dataset");
  double sum = 0.0;
  for (uint64_t i = 0; i < ds.size(); ++i) {
    double z = forward(head, ds.features(i));
    std::optional<double> ps;
    if (auto p = ds.p_star(i)) ps = static_cast<double>(*p);
    sum += eval_loss(spec, z, ds.label(i), ps).value;
  }
  return sum / static_cast<double>(ds.size());
}

enum class SweepPhase { NegFirst, PosSecond };

struct SweepRow {
  double alpha = 0.0;
  bool ok = false;
  double loss = 0.0;  // mean eval loss of the trained head
  double tpr = 0.0;
  double tnr = 0.0;
  std::string error;
};

// One training per grid point under identical seed/config; NegFirst sweeps
// alpha_neg with alpha_pos held, PosSecond the reverse. Failed points carry
// their error and the sweep continues.
inline std::vector<SweepRow> sweep_alpha(const Dataset& train_set, const Dataset& eval_set,
                                         const LossSpec& base, const TrainConfig& cfg,
                                         const OracleHead& init, std::span<const double> grid,
                                         SweepPhase phase, unsigned workers = 1) {
  if (grid.empty()) throw std::invalid_argument("sweep_alpha: empty grid");
  if (base.kind != LossKind::SteepSlope)
    throw std::invalid_argument("sweep_alpha: base spec must be the steep slope loss");
  std::vector<SweepRow> rows(grid.size());
  auto run_point = [&](size_t idx) {
    SweepRow& row = rows[idx];
    row.alpha = grid[idx];
    try {
      LossSpec spec = base;
      (phase == SweepPhase::NegFirst ? spec.alpha_neg : spec.alpha_pos) = grid[idx];
      TrainHistory h = train(train_set, spec, cfg, init);
      auto records = evaluate_records(h.final_head, eval_set);
      TprTnr t = tpr_tnr(records, ThresholdPolicy{});
      row.loss = mean_loss(h.final_head, eval_set, spec);
      row.tpr = t.tpr;
      row.tnr = t.tnr;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  };
  if (workers <= 1 || grid.size() == 1) {
    for (size_t i = 0; i < grid.size(); ++i) run_point(i);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= grid.size()) return;
        run_point(i);
      }
    };
    std::vector<std::thread> pool;
    unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(grid.size()));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace trustpred

#pragma once

// Separability statistics over confidence distributions, the hypothesis-class
// generalization bound, confidence histograms, and input-gradient norms.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "trustpred/losses.hpp"
#include "trustpred/metrics.hpp"
#include "trustpred/oracle.hpp"

namespace trustpred {

struct GaussianFit {
  double mu = 0.0;
  double sigma = 0.0;
  uint64_t n = 0;
};

// Unbiased (n-1) standard deviation, floored at 1e-12 so divergences below
// stay finite on degenerate samples.
inline GaussianFit fit_gaussian(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("fit_gaussian needs at least two values");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("fit_gaussian: non-finite value");
  GaussianFit fit;
  fit.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  fit.mu = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - fit.mu) * (v - fit.mu);
  fit.sigma = std::sqrt(ss / static_cast<double>(values.size() - 1));
  if (fit.sigma < 1e-12) fit.sigma = 1e-12;
  return fit;
}

inline void require_fit(const GaussianFit& f, const char* what) {
  if (!std::isfinite(f.mu) || !(f.sigma > 0.0) || !std::isfinite(f.sigma))
    throw std::invalid_argument(std::string(what) + ": needs finite mu and sigma > 0");
}

// KL(N1 || N2) = log(s2/s1) + (s1^2 + (m1-m2)^2) / (2 s2^2) - 1/2.
inline double kl_gaussian(const GaussianFit& a, const GaussianFit& b) {
  require_fit(a, "kl_gaussian");
  require_fit(b, "kl_gaussian");
  double dm = a.mu - b.mu;
  return std::log(b.sigma / a.sigma) +
         (a.sigma * a.sigma + dm * dm) / (2.0 * b.sigma * b.sigma) - 0.5;
}

inline double avg_kl(const GaussianFit& a, const GaussianFit& b) {
  return 0.5 * (kl_gaussian(a, b) + kl_gaussian(b, a));
}

// Bhattacharyya distance between two univariate Gaussians.
inline double bhattacharyya(const GaussianFit& a, const GaussianFit& b) {
  require_fit(a, "bhattacharyya");
  require_fit(b, "bhattacharyya");
  double s1 = a.sigma * a.sigma, s2 = b.sigma * b.sigma;
  double dm = a.mu - b.mu;
  // both ratios evaluated directly so swapping the arguments commutes exactly
  return 0.25 * std::log(0.25 * (s1 / s2 + s2 / s1 + 2.0)) + 0.25 * dm * dm / (s1 + s2);
}

struct SeparabilityReport {
  GaussianFit pos;  // confidences of o=1 records
  GaussianFit neg;  // confidences of o=0 records
  double avg_kl = 0.0;
  double bhattacharyya = 0.0;
};

inline SeparabilityReport separability(std::span<const ConfidenceRecord> records) {
  require_records(records);
  std::vector<double> pos, neg;
  for (const auto& r : records) (r.o == 1 ? pos : neg).push_back(r.confidence);
  if (pos.size() < 2 || neg.size() < 2)
    throw std::invalid_argument("separability needs at least two records of each class");
  SeparabilityReport rep;
  rep.pos = fit_gaussian(pos);
  rep.neg = fit_gaussian(neg);
  rep.avg_kl = avg_kl(rep.pos, rep.neg);
  rep.bhattacharyya = bhattacharyya(rep.pos, rep.neg);
  return rep;
}

struct BoundInput {
  double loss_max = 0.0;         // supremum of the loss
  double hypothesis_count = 0.0; // |F|
  double delta = 0.05;           // confidence parameter
  uint64_t sample_count = 0;     // |D|
};

// High-probability deviation bound for a finite hypothesis class:
//   loss_max * sqrt((ln|F| + ln(2/delta)) / (2|D|)).
inline double generalization_bound(const BoundInput& in) {
  if (!(in.loss_max >= 0.0) || !std::isfinite(in.loss_max))
    throw std::invalid_argument("bound: loss_max must be finite and >= 0");
  if (!(in.hypothesis_count > 0.0) || !std::isfinite(in.hypothesis_count))
    throw std::invalid_argument("bound: hypothesis count must be finite and > 0");
  if (!(in.delta > 0.0 && in.delta < 1.0))
    throw std::invalid_argument("bound: delta must lie in (0,1)");
  if (in.sample_count == 0) throw std::invalid_argument("bound: sample count must be positive");
  double num = std::log(in.hypothesis_count) + std::log(2.0 / in.delta);
  return in.loss_max * std::sqrt(num / (2.0 * static_cast<double>(in.sample_count)));
}

// Uniform bins over [0,1]; confidence 1.0 lands in the last bin. Each record
// goes to exactly one group; records strictly between split thresholds form
// the abstain group.
struct HistogramSummary {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<uint64_t> tp, fp, tn, fn, abstain;
};

inline HistogramSummary histogram(std::span<const ConfidenceRecord> records,
                                  const ThresholdPolicy& policy, uint32_t bins = 50) {
  require_records(records);
  policy.validate();
  if (bins == 0) throw std::invalid_argument("histogram: bins must be positive");
  HistogramSummary h;
  h.edges.resize(bins + 1);
  for (uint32_t i = 0; i <= bins; ++i)
    h.edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  h.tp.assign(bins, 0);
  h.fp.assign(bins, 0);
  h.tn.assign(bins, 0);
  h.fn.assign(bins, 0);
  h.abstain.assign(bins, 0);
  for (const auto& r : records) {
    uint32_t idx = static_cast<uint32_t>(r.confidence * bins);
    if (idx >= bins) idx = bins - 1;
    bool trusted = r.confidence > policy.positive_threshold;
    bool distrusted = r.confidence <= policy.negative_threshold;
    if (trusted) ++(r.o == 1 ? h.tp : h.fp)[idx];
    else if (distrusted) ++(r.o == 1 ? h.fn : h.tn)[idx];
    else ++h.abstain[idx];
  }
  return h;
}

// Mean over the dataset of |d loss / d x| (Euclidean norm), with the loss
// taken per sample and unweighted. For the linear head the chain rule gives
// |g| * |w| in raw mode and |g| in signed-distance mode, g = d loss / d z.
inline double grad_norm_stats(const Dataset& ds, const OracleHead& head, const LossSpec& spec) {
  spec.validate();
  if (ds.size() == 0) throw std::invalid_argument("grad_norm_stats: empty dataset");
  if (head.w.size() != ds.dim())
    throw std::invalid_argument("grad_norm_stats: head dimension mismatch");
  if (spec.kind == LossKind::Tcp && !ds.has_p_star())
    throw std::invalid_argument("TCP requires ground-truth-class probability");
  double norm_w = weight_norm(head);
  double sum = 0.0;
  for (uint64_t i = 0; i < ds.size(); ++i) {
    double z = forward(head, ds.features(i));
    std::optional<double> ps;
    if (auto p = ds.p_star(i)) ps = static_cast<double>(*p);
    double g = eval_loss(spec, z, ds.label(i), ps).grad_z;
    sum += head.mode == HeadMode::RawLinear ? std::fabs(g) * norm_w : std::fabs(g);
  }
  return sum / static_cast<double>(ds.size());
}

}  // namespace trustpred

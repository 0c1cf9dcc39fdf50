#pragma once

// Threshold metrics and threshold-free curves over per-record confidences.
//
// A record is flagged trustworthy when confidence > positive_threshold and
// untrustworthy when confidence <= negative_threshold. With a split policy
// (negative below positive, as with the TCP 1/K rule) the records in between
// abstain: they count against TPR/TNR but are tallied separately.
//
// Curve conventions: thresholds sweep the unique confidences in descending
// order and tied records enter as one atomic group, so ROC trapezoids equal
// the pairwise concordance statistic with ties counted 1/2, AUPR is average
// precision without interpolation, and every risk-coverage prefix ends at
// (1, 1 - accuracy).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trustpred {

struct ConfidenceRecord {
  double confidence = 0.0;  // in [0, 1]
  int o = 0;                // 1 = prediction was correct
};

struct ThresholdPolicy {
  double positive_threshold = 0.5;
  double negative_threshold = 0.5;  // 1/K for TCP-style confidences

  void validate() const {
    if (!(positive_threshold >= 0.0 && positive_threshold <= 1.0) ||
        !(negative_threshold >= 0.0 && negative_threshold <= 1.0))
      throw std::invalid_argument("thresholds must lie in [0,1]");
    if (negative_threshold > positive_threshold)
      throw std::invalid_argument("negative threshold must not exceed positive threshold");
  }
};

inline void require_records(std::span<const ConfidenceRecord> records) {
  if (records.empty()) throw std::invalid_argument("metrics: empty record set");
  for (const auto& r : records) {
    if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
      throw std::invalid_argument("confidence out of [0,1]");
    if (r.o != 0 && r.o != 1) throw std::invalid_argument("record label must be 0 or 1");
  }
}

inline void require_both_classes(std::span<const ConfidenceRecord> records) {
  uint64_t pos = 0;
  for (const auto& r : records) pos += static_cast<uint64_t>(r.o);
  if (pos == 0) throw std::invalid_argument("undefined metric: no records with o=1");
  if (pos == records.size()) throw std::invalid_argument("undefined metric: no records with o=0");
}

// tp+fn covers every o=1 record and tn+fp every o=0 record; the abstain
// tallies are the subsets of fn/fp that fell strictly between the thresholds.
struct ConfusionCounts {
  uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  uint64_t abstain_pos = 0, abstain_neg = 0;
};

struct TprTnr {
  double tpr = 0.0;
  double tnr = 0.0;
  ConfusionCounts counts;
};

inline TprTnr tpr_tnr(std::span<const ConfidenceRecord> records, const ThresholdPolicy& policy) {
  require_records(records);
  policy.validate();
  require_both_classes(records);
  ConfusionCounts c;
  for (const auto& r : records) {
    bool trusted = r.confidence > policy.positive_threshold;
    bool distrusted = r.confidence <= policy.negative_threshold;
    if (r.o == 1) {
      if (trusted) ++c.tp;
      else {
        ++c.fn;
        if (!distrusted) ++c.abstain_pos;
      }
    } else {
      if (distrusted) ++c.tn;
      else {
        ++c.fp;
        if (!trusted) ++c.abstain_neg;
      }
    }
  }
  TprTnr out;
  out.counts = c;
  out.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  out.tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return out;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

namespace detail {

// Records sorted by confidence descending, as (confidence, o) pairs.
inline std::vector<std::pair<double, int>> sorted_desc(std::span<const ConfidenceRecord> records) {
  std::vector<std::pair<double, int>> v;
  v.reserve(records.size());
  for (const auto& r : records) v.emplace_back(r.confidence, r.o);
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  return v;
}

}  // namespace detail

// Vertices from (0,0) to (1,1); tied confidences flip as one group.
inline std::vector<RocPoint> roc_points(std::span<const ConfidenceRecord> records) {
  require_records(records);
  require_both_classes(records);
  auto v = detail::sorted_desc(records);
  uint64_t total_pos = 0;
  for (const auto& [conf, o] : v) total_pos += static_cast<uint64_t>(o);
  uint64_t total_neg = v.size() - total_pos;
  std::vector<RocPoint> pts;
  pts.push_back({0.0, 0.0});
  uint64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < v.size()) {
    size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) {
      tp += static_cast<uint64_t>(v[j].second);
      fp += static_cast<uint64_t>(1 - v[j].second);
      ++j;
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(total_neg),
                   static_cast<double>(tp) / static_cast<double>(total_pos)});
    i = j;
  }
  return pts;
}

inline double auc(std::span<const ConfidenceRecord> records) {
  auto pts = roc_points(records);
  double area = 0.0;
  for (size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) * 0.5;
  return area;
}

// Smallest FPR reaching the target TPR, linearly interpolated between the
// bracketing ROC vertices.
inline double fpr_at_tpr(std::span<const ConfidenceRecord> records, double target_tpr = 0.95) {
  if (!(target_tpr > 0.0 && target_tpr <= 1.0))
    throw std::invalid_argument("target TPR must lie in (0,1]");
  auto pts = roc_points(records);
  for (size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].tpr >= target_tpr) {
      const RocPoint& lo = pts[i - 1];
      const RocPoint& hi = pts[i];
      if (hi.tpr == lo.tpr) return hi.fpr;
      return lo.fpr + (target_tpr - lo.tpr) * (hi.fpr - lo.fpr) / (hi.tpr - lo.tpr);
    }
  }
  return 1.0;  // unreachable: the final vertex has tpr == 1
}

struct PrPoint {
  double recall = 0.0;
  double precision = 1.0;
};

namespace detail {

// Precision/recall at every tie-group prefix of the ranking by score
// descending, where score is confidence (positive class = o) or negated
// confidence (positive class = 1-o).
inline std::vector<PrPoint> pr_prefix_points(std::span<const ConfidenceRecord> records,
                                             bool positive_is_error) {
  std::vector<std::pair<double, int>> v;
  v.reserve(records.size());
  for (const auto& r : records) {
    double score = positive_is_error ? -r.confidence : r.confidence;
    int label = positive_is_error ? 1 - r.o : r.o;
    v.emplace_back(score, label);
  }
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  uint64_t total_pos = 0;
  for (const auto& [s, y] : v) total_pos += static_cast<uint64_t>(y);
  if (total_pos == 0)
    throw std::invalid_argument(std::string("undefined metric: no records with ") +
                                (positive_is_error ? "o=0" : "o=1"));
  std::vector<PrPoint> pts;
  uint64_t tp = 0, seen = 0;
  size_t i = 0;
  while (i < v.size()) {
    size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) {
      tp += static_cast<uint64_t>(v[j].second);
      ++seen;
      ++j;
    }
    pts.push_back({static_cast<double>(tp) / static_cast<double>(total_pos),
                   static_cast<double>(tp) / static_cast<double>(seen)});
    i = j;
  }
  return pts;
}

}  // namespace detail

inline std::vector<PrPoint> pr_points(std::span<const ConfidenceRecord> records,
                                      bool positive_is_error) {
  require_records(records);
  return detail::pr_prefix_points(records, positive_is_error);
}

// Average precision: sum of precision * recall-increment over tie-group
// prefixes. No interpolation.
inline double aupr(std::span<const ConfidenceRecord> records, bool positive_is_error) {
  require_records(records);
  auto pts = detail::pr_prefix_points(records, positive_is_error);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : pts) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

struct RiskCoveragePoint {
  double coverage = 0.0;
  double risk = 0.0;
};

// Prefixes of the ranking by confidence descending; tie groups enter
// atomically. risk = fraction of o=0 among the covered prefix.
inline std::vector<RiskCoveragePoint> risk_coverage(std::span<const ConfidenceRecord> records) {
  require_records(records);
  auto v = detail::sorted_desc(records);
  std::vector<RiskCoveragePoint> pts;
  uint64_t wrong = 0, seen = 0;
  size_t i = 0;
  while (i < v.size()) {
    size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) {
      wrong += static_cast<uint64_t>(1 - v[j].second);
      ++seen;
      ++j;
    }
    pts.push_back({static_cast<double>(seen) / static_cast<double>(v.size()),
                   static_cast<double>(wrong) / static_cast<double>(seen)});
    i = j;
  }
  return pts;
}

struct MetricsReport {
  double fpr_at_95tpr = 0.0;
  double aupr_error = 0.0;
  double aupr_success = 0.0;
  double auc = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  double acc = 0.0;  // fraction of records with o=1
  ConfusionCounts counts;
};

inline MetricsReport full_report(std::span<const ConfidenceRecord> records,
                                 const ThresholdPolicy& policy) {
  require_records(records);
  policy.validate();
  require_both_classes(records);
  MetricsReport r;
  TprTnr t = tpr_tnr(records, policy);
  r.tpr = t.tpr;
  r.tnr = t.tnr;
  r.counts = t.counts;
  r.auc = auc(records);
  r.fpr_at_95tpr = fpr_at_tpr(records, 0.95);
  r.aupr_success = aupr(records, false);
  r.aupr_error = aupr(records, true);
  uint64_t pos = 0;
  for (const auto& rec : records) pos += static_cast<uint64_t>(rec.o);
  r.acc = static_cast<double>(pos) / static_cast<double>(records.size());
  return r;
}

}  // namespace trustpred

#pragma once

// Binary trustworthiness losses over a scalar head output z and a correctness
// label o in {0, 1}, plus class-imbalance wrappers and the batch reduction.
//
//   cross entropy   -o*log(sig(z)) - (1-o)*log(1-sig(z))
//   focal           -o*(1-p)^g*log(p) - (1-o)*p^g*log(1-p),  p = sig(z)
//   tcp             (sig(z) - p_star)^2, p_star = classifier's probability of
//                   the ground-truth class
//   steep slope     two opposed exponential slides of the softsign
//                   s = z/(1+|z|):
//                     o=1:  exp(-a_pos*s) - exp(-a_pos)   (decreasing in z)
//                     o=0:  exp( a_neg*s) - exp(-a_neg)   (increasing in z)
//
// Values and gradients are computed in log space where cancellation is a
// risk; all four stay finite for any finite z.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trustpred {

// -1: the o=1 slide decays as z grows (confident-and-correct is cheap).
// +1 flips both slides to the opposite orientation.
inline constexpr double kSlideOrientation = -1.0;

inline void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) throw std::domain_error(std::string(what) + ": non-finite input");
}

inline double sigmoid(double z) {
  require_finite(z, "sigmoid");
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softsign(double z) {
  require_finite(z, "softsign");
  return z / (1.0 + std::fabs(z));
}

// log(1 + e^t) without overflow on either side.
inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

struct LossEval {
  double value = 0.0;
  double grad_z = 0.0;
};

inline void require_label(int o) {
  if (o != 0 && o != 1) throw std::invalid_argument("correctness label must be 0 or 1");
}

inline LossEval loss_ce(double z, int o) {
  require_finite(z, "loss_ce");
  require_label(o);
  return {o == 1 ? softplus(-z) : softplus(z), sigmoid(z) - static_cast<double>(o)};
}

inline LossEval loss_focal(double z, int o, double gamma) {
  require_finite(z, "loss_focal");
  require_label(o);
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("focal gamma must be finite and >= 0");
  // o=1 branch; the o=0 branch is its mirror in z. With p = sig(z):
  //   value = (1-p)^g * (-log p) = exp(-g*softplus(z)) * softplus(-z)
  //   d/dz  = g*p*(1-p)^g*log(p) - (1-p)^(g+1)
  // Both factors of the p*log(p) term vanish at the saturated ends, so the
  // gradient limit there is 0 with no NaN from 0*inf.
  auto branch = [gamma](double zz) -> LossEval {
    double p = sigmoid(zz);
    double log_p = -softplus(-zz);
    double pow_1mp_g = std::exp(-gamma * softplus(zz));  // (1-p)^g
    double value = pow_1mp_g * (-log_p);
    double grad = gamma * p * pow_1mp_g * log_p - std::exp(-(gamma + 1.0) * softplus(zz));
    return {value, grad};
  };
  if (o == 1) return branch(z);
  LossEval m = branch(-z);
  return {m.value, -m.grad_z};
}

// conf = sig(z). The gradient is with respect to z, through the sigmoid.
inline LossEval loss_tcp(double conf, double p_star) {
  if (!(conf >= 0.0 && conf <= 1.0)) throw std::invalid_argument("tcp confidence must lie in [0,1]");
  if (!(p_star >= 0.0 && p_star <= 1.0))
    throw std::invalid_argument("tcp p_star must lie in [0,1]");
  double diff = conf - p_star;
  return {diff * diff, 2.0 * diff * conf * (1.0 - conf)};
}

inline void require_alpha(double a, const char* what) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument(std::string(what) + " must be finite and > 0");
}

inline LossEval loss_steep_slope(double z, int o, double alpha_pos, double alpha_neg) {
  require_finite(z, "loss_steep_slope");
  require_label(o);
  require_alpha(alpha_pos, "alpha_pos");
  require_alpha(alpha_neg, "alpha_neg");
  double s = softsign(z);
  double d = 1.0 + std::fabs(z);
  double ds = 1.0 / (d * d);  // softsign'(z)
  if (o == 1) {
    double e = std::exp(kSlideOrientation * alpha_pos * s);
    return {e - std::exp(-alpha_pos), kSlideOrientation * alpha_pos * ds * e};
  }
  double e = std::exp(-kSlideOrientation * alpha_neg * s);
  return {e - std::exp(-alpha_neg), -kSlideOrientation * alpha_neg * ds * e};
}

// Supremum of the steep slope loss over z and o.
inline double loss_range_max(double alpha_pos, double alpha_neg) {
  require_alpha(alpha_pos, "alpha_pos");
  require_alpha(alpha_neg, "alpha_neg");
  double a = std::exp(alpha_pos) - std::exp(-alpha_pos);
  double b = std::exp(alpha_neg) - std::exp(-alpha_neg);
  return a > b ? a : b;
}

// Inverse effective number of samples, 1 / E(beta, n), E = (1-beta^n)/(1-beta).
inline double class_balanced_weight(double beta, uint64_t n) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0,1)");
  if (n == 0) throw std::invalid_argument("class count must be positive");
  double effective = (1.0 - std::pow(beta, static_cast<double>(n))) / (1.0 - beta);
  return 1.0 / effective;
}

struct ClassCounts {
  uint64_t n_pos = 0;
  uint64_t n_neg = 0;
};

// Per-class weights normalized so w_pos + w_neg = 2; keeps the batch loss on
// the same scale as the unweighted mean, so one learning rate serves all
// wrappers.
inline std::pair<double, double> class_balanced_weights(double beta, const ClassCounts& counts) {
  double rp = class_balanced_weight(beta, counts.n_pos);
  double rn = class_balanced_weight(beta, counts.n_neg);
  double scale = 2.0 / (rp + rn);
  return {rp * scale, rn * scale};
}

enum class LossKind { CrossEntropy, Focal, Tcp, SteepSlope };
enum class WrapperKind { None, ClassBalanced, FixedWeights };

struct LossSpec {
  LossKind kind = LossKind::CrossEntropy;
  double gamma = 2.0;       // focal
  double alpha_pos = 1.0;   // steep slope
  double alpha_neg = 3.0;
  WrapperKind wrapper = WrapperKind::None;
  double beta = 0.999;      // class balanced
  double w_pos = 1.0;       // fixed weights
  double w_neg = 1.0;

  void validate() const {
    switch (kind) {
      case LossKind::Focal:
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
          throw std::invalid_argument("focal gamma must be finite and >= 0");
        break;
      case LossKind::SteepSlope:
        require_alpha(alpha_pos, "alpha_pos");
        require_alpha(alpha_neg, "alpha_neg");
        break;
      default:
        break;
    }
    switch (wrapper) {
      case WrapperKind::ClassBalanced:
        if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0,1)");
        break;
      case WrapperKind::FixedWeights:
        if (!(w_pos >= 0.0) || !(w_neg >= 0.0))
          throw std::invalid_argument("fixed weights must be >= 0");
        break;
      case WrapperKind::None:
        break;
    }
  }
};

// Per-sample loss for spec.kind, before any wrapper weighting.
inline LossEval eval_loss(const LossSpec& spec, double z, int o, std::optional<double> p_star) {
  switch (spec.kind) {
    case LossKind::CrossEntropy:
      return loss_ce(z, o);
    case LossKind::Focal:
      return loss_focal(z, o, spec.gamma);
    case LossKind::Tcp:
      if (!p_star)
        throw std::invalid_argument("TCP requires ground-truth-class probability");
      return loss_tcp(sigmoid(z), *p_star);
    case LossKind::SteepSlope:
      return loss_steep_slope(z, o, spec.alpha_pos, spec.alpha_neg);
  }
  throw std::logic_error("unknown loss kind");
}

struct BatchItem {
  double z = 0.0;
  int o = 0;
  std::optional<double> p_star;
};

struct BatchEval {
  double value = 0.0;            // weighted mean over the batch
  std::vector<double> grad_z;    // gradient of value w.r.t. each item's z
};

// Weighted mean loss: sum_i w(o_i) * l_i / N. Wrapper weights are
// multiplicative per sample; class_counts are the dataset-level label counts
// the ClassBalanced wrapper normalizes against.
inline BatchEval batch_loss(const LossSpec& spec, std::span<const BatchItem> batch,
                            const ClassCounts& counts) {
  spec.validate();
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  double wp = 1.0, wn = 1.0;
  if (spec.wrapper == WrapperKind::ClassBalanced) {
    if (counts.n_pos == 0 || counts.n_neg == 0)
      throw std::invalid_argument("class-balanced wrapper needs both class counts positive");
    std::tie(wp, wn) = class_balanced_weights(spec.beta, counts);
  } else if (spec.wrapper == WrapperKind::FixedWeights) {
    if (!(spec.w_pos >= 0.0) || !(spec.w_neg >= 0.0))
      throw std::invalid_argument("fixed weights must be >= 0");
    wp = spec.w_pos;
    wn = spec.w_neg;
  }
  BatchEval out;
  out.grad_z.resize(batch.size());
  double inv_n = 1.0 / static_cast<double>(batch.size());
  double sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    require_label(batch[i].o);
    LossEval e = eval_loss(spec, batch[i].z, batch[i].o, batch[i].p_star);
    double w = batch[i].o == 1 ? wp : wn;
    sum += w * e.value;
    out.grad_z[i] = w * e.grad_z * inv_n;
  }
  out.value = sum * inv_n;
  return out;
}

}  // namespace trustpred

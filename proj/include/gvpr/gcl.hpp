#pragma once

// Contrastive loss (binary label y) and Generalized Contrastive Loss (graded
// similarity psi), with closed-form derivatives w.r.t. the descriptor
// distance d and the chain rule back to the two descriptors.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvpr {

struct LossConfig {
  double tau = 1.0;

  LossConfig() = default;
  explicit LossConfig(double margin) : tau(margin) {
    if (!(margin > 0.0) || !std::isfinite(margin)) {
      throw std::invalid_argument("LossConfig: margin must be positive, got " +
                                  std::to_string(margin));
    }
  }
};

/// Ground truth of a pair: binary y in {0,1} or graded psi in [0,1].
class PairLabel {
 public:
  enum class Kind { kBinary, kGraded };

  static PairLabel binary(int y) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument("binary label must be 0 or 1");
    }
    return PairLabel(Kind::kBinary, static_cast<double>(y));
  }
  static PairLabel graded(double psi) {
    if (!(psi >= 0.0 && psi <= 1.0)) {
      throw std::invalid_argument("graded label must lie in [0,1], got " +
                                  std::to_string(psi));
    }
    return PairLabel(Kind::kGraded, psi);
  }

  Kind kind() const { return kind_; }
  int y() const { return value_ > 0.5 ? 1 : 0; }
  double psi() const { return value_; }

 private:
  PairLabel(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

struct GradResult {
  double loss = 0.0;
  double d_loss_d_distance = 0.0;
  std::vector<double> grad_fi;
  std::vector<double> grad_fj;
};

inline double descriptor_distance(std::span<const double> fi,
                                  std::span<const double> fj) {
  if (fi.size() != fj.size()) {
    throw std::invalid_argument("descriptor_distance: dimension mismatch (" +
                                std::to_string(fi.size()) + " vs " +
                                std::to_string(fj.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < fi.size(); ++k) {
    const double diff = fi[k] - fj[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

inline double cl_loss(double d, int y, const LossConfig& cfg) {
  if (y == 1) return 0.5 * d * d;
  const double hinge = std::max(cfg.tau - d, 0.0);
  return 0.5 * hinge * hinge;
}

inline double gcl_loss(double d, double psi, const LossConfig& cfg) {
  const double hinge = std::max(cfg.tau - d, 0.0);
  return psi * 0.5 * d * d + (1.0 - psi) * 0.5 * hinge * hinge;
}

inline double cl_grad_d(double d, int y, const LossConfig& cfg) {
  if (y == 1) return d;
  return std::min(d - cfg.tau, 0.0);
}

/// At d == tau both branches equal tau*psi; the d >= tau branch is used.
inline double gcl_grad_d(double d, double psi, const LossConfig& cfg) {
  if (d < cfg.tau) return d + cfg.tau * (psi - 1.0);
  return d * psi;
}

inline double pair_loss(double d, const PairLabel& label, const LossConfig& cfg) {
  return label.kind() == PairLabel::Kind::kBinary ? cl_loss(d, label.y(), cfg)
                                                  : gcl_loss(d, label.psi(), cfg);
}

inline double pair_grad_d(double d, const PairLabel& label, const LossConfig& cfg) {
  return label.kind() == PairLabel::Kind::kBinary ? cl_grad_d(d, label.y(), cfg)
                                                  : gcl_grad_d(d, label.psi(), cfg);
}

/// Loss and gradients w.r.t. both descriptors through d = ||fi - fj||.
/// grad_fi = g (fi - fj) / d, grad_fj = -grad_fi; both are zero at d == 0.
inline GradResult pair_grad(std::span<const double> fi, std::span<const double> fj,
                            const PairLabel& label, const LossConfig& cfg) {
  const double d = descriptor_distance(fi, fj);
  GradResult out;
  out.loss = pair_loss(d, label, cfg);
  out.d_loss_d_distance = pair_grad_d(d, label, cfg);
  out.grad_fi.assign(fi.size(), 0.0);
  out.grad_fj.assign(fi.size(), 0.0);
  if (d == 0.0) return out;
  const double scale = out.d_loss_d_distance / d;
  for (std::size_t k = 0; k < fi.size(); ++k) {
    out.grad_fi[k] = scale * (fi[k] - fj[k]);
    out.grad_fj[k] = -out.grad_fi[k];
  }
  return out;
}

}  // namespace gvpr

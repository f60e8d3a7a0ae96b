#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace follow_ahead::rl {

// Evenly spaced value atoms.
struct Support {
  double v_min = -100.0;
  double v_max = 100.0;
  int atoms = 51;

  double delta() const { return (v_max - v_min) / (atoms - 1); }
  double atom(int i) const { return v_min + i * delta(); }
  Eigen::VectorXd values() const {
    return Eigen::VectorXd::LinSpaced(atoms, v_min, v_max);
  }
  void validate() const {
    if (atoms < 2 || !(v_max > v_min)) throw std::invalid_argument("Support: need >= 2 atoms and v_max > v_min");
  }
};

struct ValueDistribution {
  Support support;
  Eigen::VectorXd probs;

  double mean() const { return probs.dot(support.values()); }
  bool normalized(double tol = 1e-6) const {
    return probs.size() == support.atoms && (probs.array() >= 0.0).all() && std::abs(probs.sum() - 1.0) <= tol;
  }
};

// Column-wise softmax with max subtraction.
inline Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double m = p.col(j).maxCoeff();
    p.col(j) = (p.col(j).array() - m).exp().matrix();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

// Shifts atoms z_j to r + g z_j (g = 0 when done), clamps them into the
// support and splits each atom's mass between its two neighbours.
inline Eigen::VectorXd categorical_project(double reward, bool done, const Eigen::VectorXd& next_probs,
                                           double gamma_n, const Support& s) {
  if (next_probs.size() != s.atoms) throw std::invalid_argument("categorical_project: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.atoms);
  const double g = done ? 0.0 : gamma_n;
  const double dz = s.delta();
  for (int j = 0; j < s.atoms; ++j) {
    const double tz = std::clamp(reward + g * s.atom(j), s.v_min, s.v_max);
    const double b = (tz - s.v_min) / dz;
    const double lo = std::floor(b);
    const int l = std::clamp(static_cast<int>(lo), 0, s.atoms - 1);
    const int u = std::min(l + 1, s.atoms - 1);
    const double frac = b - lo;
    if (u == l || frac <= 0.0) {
      out[l] += next_probs[j];
    } else {
      out[l] += next_probs[j] * (1.0 - frac);
      out[u] += next_probs[j] * frac;
    }
  }
  return out;
}

inline ValueDistribution categorical_project(double reward, bool done, const ValueDistribution& next, double gamma_n) {
  return {next.support, categorical_project(reward, done, next.probs, gamma_n, next.support)};
}

}  // namespace follow_ahead::rl

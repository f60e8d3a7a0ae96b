#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "follow_ahead/geometry.hpp"
#include "follow_ahead/planner_teb.hpp"
#include "follow_ahead/shield.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

// Person track: mean (X, Y, phi, v, omega) and its covariance.
struct EkfState {
  Vector5 mean = Vector5::Zero();
  Matrix5 cov = Matrix5::Identity();

  Pose pose() const { return Pose(mean(0), mean(1), mean(2), mean(3), mean(4)); }
};

struct EkfConfig {
  Vector5 q_rate = Vector5::Constant(1e-4);  // Q = diag(q_rate) * dt
  double sigma_pos = 0.05;
  double sigma_ang = 0.02;
  double init_sigma_v = 1.0;
  double init_sigma_omega = 1.0;

  Matrix3 measurement_cov() const {
    return Vector3(sigma_pos * sigma_pos, sigma_pos * sigma_pos, sigma_ang * sigma_ang).asDiagonal();
  }
};

class SingularInnovation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unicycle propagation of the mean and its Jacobian, written with
// sin(h)/h (h = omega dt / 2) so it stays well conditioned as omega -> 0.
inline Vector5 unicycle_propagate(const Vector5& m, double dt, Matrix5* jac = nullptr) {
  const double th = m(2), v = m(3), w = m(4);
  const double h = 0.5 * w * dt;
  const double h2 = h * h;
  double sinc, dsinc;  // sin(h)/h and its derivative
  if (std::abs(h) < 1e-4) {
    sinc = 1.0 - h2 / 6.0 + h2 * h2 / 120.0;
    dsinc = -h / 3.0 + h * h2 / 30.0;
  } else {
    sinc = std::sin(h) / h;
    dsinc = (h * std::cos(h) - std::sin(h)) / h2;
  }
  const double mid = th + h;
  const double cm = std::cos(mid), sm = std::sin(mid);
  Vector5 out = m;
  out(0) = m(0) + v * dt * cm * sinc;
  out(1) = m(1) + v * dt * sm * sinc;
  out(2) = wrap_angle(th + w * dt);
  if (jac) {
    Matrix5& F = *jac;
    F.setIdentity();
    F(0, 2) = -v * dt * sm * sinc;
    F(0, 3) = dt * cm * sinc;
    F(0, 4) = v * dt * 0.5 * dt * (-sm * sinc + cm * dsinc);
    F(1, 2) = v * dt * cm * sinc;
    F(1, 3) = dt * sm * sinc;
    F(1, 4) = v * dt * 0.5 * dt * (cm * sinc + sm * dsinc);
    F(2, 4) = dt;
  }
  return out;
}

inline EkfState ekf_init(const Pose& measured, const EkfConfig& cfg = {}) {
  EkfState s;
  s.mean << measured.x, measured.y, measured.phi, 0.0, 0.0;
  s.cov.setZero();
  s.cov.diagonal() << cfg.sigma_pos * cfg.sigma_pos, cfg.sigma_pos * cfg.sigma_pos, cfg.sigma_ang * cfg.sigma_ang,
      cfg.init_sigma_v * cfg.init_sigma_v, cfg.init_sigma_omega * cfg.init_sigma_omega;
  return s;
}

inline EkfState ekf_predict(const EkfState& s, double dt, const EkfConfig& cfg = {}) {
  Matrix5 F;
  EkfState out;
  out.mean = unicycle_propagate(s.mean, dt, &F);
  out.cov = F * s.cov * F.transpose();
  out.cov.diagonal() += cfg.q_rate * dt;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

// Standard correction with a wrapped heading innovation and Joseph-form
// covariance update.
inline EkfState ekf_update(const EkfState& s, const Vector3& z, const Matrix3& r_cov) {
  Eigen::Matrix<double, 3, 5> H = Eigen::Matrix<double, 3, 5>::Zero();
  H(0, 0) = H(1, 1) = H(2, 2) = 1.0;
  Vector3 innov = z - H * s.mean;
  innov(2) = wrap_angle(innov(2));
  const Matrix3 S = H * s.cov * H.transpose() + r_cov;
  Eigen::LDLT<Matrix3> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || std::abs(S.determinant()) < 1e-300) {
    throw SingularInnovation("ekf_update: innovation covariance is singular");
  }
  const Eigen::Matrix<double, 5, 3> K = ldlt.solve(H * s.cov).transpose();
  EkfState out;
  out.mean = s.mean + K * innov;
  out.mean(2) = wrap_angle(out.mean(2));
  const Matrix5 I_KH = Matrix5::Identity() - K * H;
  out.cov = I_KH * s.cov * I_KH.transpose() + K * r_cov * K.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

// Goal `desired_distance` ahead of where the person is predicted to be
// after `horizon` seconds, facing the predicted heading.
inline BandPose ahead_goal(const EkfState& s, double desired_distance = 1.5, double horizon = 1.5) {
  const Vector5 p = unicycle_propagate(s.mean, horizon);
  return {p(0) + desired_distance * std::cos(p(2)), p(1) + desired_distance * std::sin(p(2)), p(2)};
}

struct HcConfig {
  EkfConfig ekf;
  double desired_distance = 1.5;
  double horizon = 1.5;
  double dt = 0.2;
  bool shield = true;
  ShieldConfig shield_cfg;
};

struct HcOutput {
  MotionCommand command;
  BandPose goal;
  bool degraded = false;
  bool shielded = false;
};

// Hand-crafted follow-ahead controller: track the person with the EKF, aim
// at a point ahead of the prediction, and let the planner get there in time.
class HcController {
 public:
  HcController(HcConfig cfg, PlannerConfig planner) : cfg_(std::move(cfg)), planner_(std::move(planner)) {}

  void reset() { track_.reset(); }

  HcOutput hc_step(const Pose& measured_person, const Pose& robot) {
    if (!track_) {
      track_ = ekf_init(measured_person, cfg_.ekf);
    } else {
      track_ = ekf_predict(*track_, cfg_.dt, cfg_.ekf);
      track_ = ekf_update(*track_, Vector3(measured_person.x, measured_person.y, measured_person.phi),
                          cfg_.ekf.measurement_cov());
    }
    HcOutput out;
    out.goal = ahead_goal(*track_, cfg_.desired_distance, cfg_.horizon);
    const PlanResult pr = plan(robot, out.goal, obstacle_from(track_->pose()), planner_, cfg_.horizon);
    out.command = extract_command(pr.band, planner_, cfg_.dt);
    out.degraded = pr.degraded;
    if (cfg_.shield) {
      const ShieldResult sr = shield_command(robot, out.command, obstacle_from(track_->pose()), cfg_.dt, cfg_.shield_cfg);
      out.command = sr.command;
      out.shielded = sr.overridden;
    }
    return out;
  }

  const std::optional<EkfState>& track() const { return track_; }

 private:
  HcConfig cfg_;
  PlannerConfig planner_;
  std::optional<EkfState> track_;
};

}  // namespace follow_ahead

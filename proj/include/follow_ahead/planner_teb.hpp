#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "follow_ahead/geometry.hpp"
#include "follow_ahead/human_motion.hpp"

namespace follow_ahead {

// Soft-constraint elastic band: a chain of timed poses pulled toward short
// total time while penalizing speed/turn-rate/acceleration excess,
// sideways (non-holonomic) motion, and proximity to a moving person.
struct PlannerConfig {
  double w_time = 1.0;
  double w_obstacle = 50.0;
  double w_velocity = 10.0;
  double w_acceleration = 5.0;
  double w_nonholonomic = 20.0;
  double w_arrival = 10.0;  // only active when a target arrival time is given

  double clearance = 0.5;  // person radius rho
  double inflation = 0.3;  // extra margin inside the obstacle hinge
  double detour_offset = 1.2;

  int max_iterations = 150;
  double step_size = 0.05;  // gradient-step scale when the preconditioned step is unusable
  double rel_tolerance = 1e-6;

  int band_poses = 15;
  double band_duration = 3.0;
  double dt_min = 0.05;
  double dt_max = 0.6;

  double v_max = 1.0;
  double omega_max = 2.0;
  double acc_max = 1.0;
  double alpha_max = 2.0;

  void validate() const {
    if (w_time < 0 || w_obstacle < 0 || w_velocity < 0 || w_acceleration < 0 || w_nonholonomic < 0 ||
        w_arrival < 0) {
      throw std::invalid_argument("PlannerConfig: weights must be non-negative");
    }
    if (!(clearance > 0.0)) throw std::invalid_argument("PlannerConfig: clearance must be positive");
    if (band_poses < 3) throw std::invalid_argument("PlannerConfig: band needs >= 3 poses");
    if (!(dt_max > dt_min) || !(dt_min > 0.0)) throw std::invalid_argument("PlannerConfig: bad dt bounds");
  }
};

struct BandPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct Band {
  std::vector<BandPose> poses;  // front and back are anchored
  std::vector<double> dts;      // dts[i] spans poses[i] -> poses[i+1]
  double start_v = 0.0;         // robot velocity at the anchor
  double start_omega = 0.0;

  std::size_t size() const { return poses.size(); }
  double duration() const {
    double t = 0.0;
    for (double d : dts) t += d;
    return t;
  }
  // Number of optimization variables: interior poses and every interval.
  std::size_t free_size() const { return 3 * (poses.size() - 2) + dts.size(); }
};

// Constant-velocity disc obstacle.
struct DynamicObstacle {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  double x_at(double t) const { return x + vx * t; }
  double y_at(double t) const { return y + vy * t; }
};

struct CostTerms {
  double time = 0.0;
  double arrival = 0.0;
  double obstacle = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double nonholonomic = 0.0;
  double total() const { return time + arrival + obstacle + velocity + acceleration + nonholonomic; }
};

struct BandCost {
  double cost = 0.0;
  CostTerms terms;
  std::vector<double> gradient;  // laid out as Band::pack()
};

inline std::vector<double> pack(const Band& b) {
  std::vector<double> z;
  z.reserve(b.free_size());
  for (std::size_t i = 1; i + 1 < b.poses.size(); ++i) {
    z.push_back(b.poses[i].x);
    z.push_back(b.poses[i].y);
    z.push_back(b.poses[i].theta);
  }
  z.insert(z.end(), b.dts.begin(), b.dts.end());
  return z;
}

inline void unpack(const std::vector<double>& z, Band& b) {
  std::size_t k = 0;
  for (std::size_t i = 1; i + 1 < b.poses.size(); ++i) {
    b.poses[i].x = z[k++];
    b.poses[i].y = z[k++];
    b.poses[i].theta = z[k++];
  }
  for (auto& dt : b.dts) dt = z[k++];
}

namespace detail {

inline double hinge(double u) { return u > 0.0 ? u : 0.0; }
inline double sgn(double u) { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); }

// Sums weighted squared residuals. Each residual's partial derivatives are
// staged (band indices mapped to free-variable slots, anchors
// dropped) and folded into the gradient and, optionally, the Gauss-Newton
// matrix on commit.
class Accumulator {
 public:
  Accumulator(std::size_t n_poses, std::size_t n_free, bool gradient, Eigen::MatrixXd* gn)
      : n_poses_(n_poses), gradient_(gradient), gn_(gn) {
    if (gradient_) grad.assign(n_free, 0.0);
    if (gn_) gn_->setZero(static_cast<Eigen::Index>(n_free), static_cast<Eigen::Index>(n_free));
  }

  void pose(std::size_t i, int comp, double d) {
    if (i == 0 || i + 1 == n_poses_) return;
    row_.emplace_back(3 * (i - 1) + comp, d);
  }
  void dt(std::size_t i, double d) { row_.emplace_back(3 * (n_poses_ - 2) + i, d); }

  // Adds w * r^2 using the staged row as dr/dz.
  double commit(double w, double r) {
    if (gradient_) {
      for (const auto& [k, d] : row_) grad[k] += 2.0 * w * r * d;
    }
    if (gn_) {
      for (const auto& [a, da] : row_) {
        for (const auto& [b, db] : row_) (*gn_)(a, b) += 2.0 * w * da * db;
      }
    }
    row_.clear();
    return w * r * r;
  }
  bool tracking() const { return gradient_ || gn_; }

  std::vector<double> grad;

 private:
  std::size_t n_poses_;
  bool gradient_;
  Eigen::MatrixXd* gn_;
  std::vector<std::pair<std::size_t, double>> row_;
};

}  // namespace detail

// Cost and analytic gradient with respect to the free variables.
// `target_time` <= 0 disables the arrival term. When `gauss_newton` is
// given it receives sum 2 w J^T J over the squared terms.
inline BandCost band_cost(const Band& b, const std::optional<DynamicObstacle>& obstacle, const PlannerConfig& cfg,
                          double target_time = 0.0, bool with_gradient = true,
                          Eigen::MatrixXd* gauss_newton = nullptr) {
  using detail::hinge;
  using detail::sgn;
  const std::size_t n = b.poses.size();
  const std::size_t m = b.dts.size();
  detail::Accumulator acc(n, b.free_size(), with_gradient, gauss_newton);
  const bool track = acc.tracking();
  BandCost out;
  CostTerms& T = out.terms;

  double total_t = 0.0;
  for (double d : b.dts) total_t += d;
  T.time = cfg.w_time * total_t;
  if (with_gradient) {
    for (std::size_t i = 0; i < m; ++i) acc.grad[3 * (n - 2) + i] += cfg.w_time;
  }
  // arriving before target_time is penalized; arriving late is left to the
  // time term so an unreachable goal does not drag the band off its kinematics
  const double early = target_time > 0.0 ? hinge(target_time - total_t) : 0.0;
  if (early > 0.0 && cfg.w_arrival > 0.0) {
    if (track) {
      for (std::size_t i = 0; i < m; ++i) acc.dt(i, -1.0);
    }
    T.arrival = acc.commit(cfg.w_arrival, early);
  }

  // Segment speed is the displacement projected on the segment's start
  // heading; turn rate is the wrapped heading change.
  std::vector<double> v(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p0 = b.poses[i];
    const auto& p1 = b.poses[i + 1];
    const double dx = p1.x - p0.x, dy = p1.y - p0.y, dt = b.dts[i];
    v[i] = (dx * std::cos(p0.theta) + dy * std::sin(p0.theta)) / dt;
    w[i] = wrap_angle(p1.theta - p0.theta) / dt;
  }
  auto dv = [&](std::size_t i, double k) {
    const auto& p0 = b.poses[i];
    const auto& p1 = b.poses[i + 1];
    const double dx = p1.x - p0.x, dy = p1.y - p0.y, dt = b.dts[i];
    const double c = std::cos(p0.theta), s = std::sin(p0.theta);
    acc.pose(i + 1, 0, k * c / dt);
    acc.pose(i + 1, 1, k * s / dt);
    acc.pose(i, 0, -k * c / dt);
    acc.pose(i, 1, -k * s / dt);
    acc.pose(i, 2, k * (-dx * s + dy * c) / dt);
    acc.dt(i, -k * v[i] / dt);
  };
  auto dw = [&](std::size_t i, double k) {
    const double dt = b.dts[i];
    acc.pose(i + 1, 2, k / dt);
    acc.pose(i, 2, -k / dt);
    acc.dt(i, -k * w[i] / dt);
  };

  for (std::size_t i = 0; i < m; ++i) {
    const double hv = hinge(std::abs(v[i]) - cfg.v_max);
    if (hv > 0.0) {
      if (track) dv(i, sgn(v[i]));
      T.velocity += acc.commit(cfg.w_velocity, hv);
    }
    const double hw = hinge(std::abs(w[i]) - cfg.omega_max);
    if (hw > 0.0) {
      if (track) dw(i, sgn(w[i]));
      T.velocity += acc.commit(cfg.w_velocity, hw);
    }
  }

  if (cfg.w_acceleration > 0.0) {
    // from the anchor's measured velocity into the first segment
    {
      const double dt = b.dts[0];
      const double a = (v[0] - b.start_v) / dt;
      const double ha = hinge(std::abs(a) - cfg.acc_max);
      if (ha > 0.0) {
        if (track) {
          dv(0, sgn(a) / dt);
          acc.dt(0, -sgn(a) * a / dt);
        }
        T.acceleration += acc.commit(cfg.w_acceleration, ha);
      }
      const double al = (w[0] - b.start_omega) / dt;
      const double hal = hinge(std::abs(al) - cfg.alpha_max);
      if (hal > 0.0) {
        if (track) {
          dw(0, sgn(al) / dt);
          acc.dt(0, -sgn(al) * al / dt);
        }
        T.acceleration += acc.commit(cfg.w_acceleration, hal);
      }
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double tau = 0.5 * (b.dts[i] + b.dts[i + 1]);
      const double a = (v[i + 1] - v[i]) / tau;
      const double ha = hinge(std::abs(a) - cfg.acc_max);
      if (ha > 0.0) {
        if (track) {
          const double k = sgn(a);
          dv(i + 1, k / tau);
          dv(i, -k / tau);
          acc.dt(i, -k * a / tau * 0.5);
          acc.dt(i + 1, -k * a / tau * 0.5);
        }
        T.acceleration += acc.commit(cfg.w_acceleration, ha);
      }
      const double al = (w[i + 1] - w[i]) / tau;
      const double hal = hinge(std::abs(al) - cfg.alpha_max);
      if (hal > 0.0) {
        if (track) {
          const double k = sgn(al);
          dw(i + 1, k / tau);
          dw(i, -k / tau);
          acc.dt(i, -k * al / tau * 0.5);
          acc.dt(i + 1, -k * al / tau * 0.5);
        }
        T.acceleration += acc.commit(cfg.w_acceleration, hal);
      }
    }
  }

  // non-holonomic: the segment must bisect the headings of its end poses
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p0 = b.poses[i];
    const auto& p1 = b.poses[i + 1];
    const double dx = p1.x - p0.x, dy = p1.y - p0.y;
    const double c0 = std::cos(p0.theta), s0 = std::sin(p0.theta);
    const double c1 = std::cos(p1.theta), s1 = std::sin(p1.theta);
    const double e = (c0 + c1) * dy - (s0 + s1) * dx;
    if (track) {
      acc.pose(i + 1, 0, -(s0 + s1));
      acc.pose(i, 0, s0 + s1);
      acc.pose(i + 1, 1, c0 + c1);
      acc.pose(i, 1, -(c0 + c1));
      acc.pose(i, 2, -s0 * dy - c0 * dx);
      acc.pose(i + 1, 2, -s1 * dy - c1 * dx);
    }
    T.nonholonomic += acc.commit(cfg.w_nonholonomic, e);
  }

  // dynamic obstacle, evaluated at each pose's timestamp
  if (obstacle && cfg.w_obstacle > 0.0) {
    const double rho = cfg.clearance + cfg.inflation;
    double t = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      t += b.dts[k - 1];
      const double rx = b.poses[k].x - obstacle->x_at(t);
      const double ry = b.poses[k].y - obstacle->y_at(t);
      const double dist = std::hypot(rx, ry);
      const double h = hinge(rho - dist);
      if (h <= 0.0) continue;
      if (track && dist > 1e-12) {
        acc.pose(k, 0, -rx / dist);
        acc.pose(k, 1, -ry / dist);
        const double ddt = (rx * obstacle->vx + ry * obstacle->vy) / dist;
        for (std::size_t j = 0; j < k; ++j) acc.dt(j, ddt);
      }
      T.obstacle += acc.commit(cfg.w_obstacle, h);
    }
  }

  out.cost = T.total();
  if (with_gradient) out.gradient = std::move(acc.grad);
  return out;
}

class BandOptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptimizeResult {
  Band band;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;  // accepted costs, starting with the initial one
};

// Descent on the free variables with the dts boxed to [dt_min, dt_max].
// The step direction is the gradient preconditioned by the damped
// Gauss-Newton matrix of the squared terms (falls back to the plain
// gradient if that is not a descent direction); every step goes through an
// Armijo backtracking line search, so accepted costs never increase.
inline OptimizeResult optimize_band(const Band& initial, const std::optional<DynamicObstacle>& obstacle,
                                    const PlannerConfig& cfg, double target_time = 0.0) {
  OptimizeResult res;
  res.band = initial;
  std::vector<double> z = pack(initial);
  const std::size_t nz = z.size();
  const std::size_t n_pose_vars = 3 * (initial.poses.size() - 2);
  auto project = [&](std::vector<double>& zz) {
    for (std::size_t i = n_pose_vars; i < nz; ++i) zz[i] = std::clamp(zz[i], cfg.dt_min, cfg.dt_max);
  };
  project(z);
  Band work = initial;
  unpack(z, work);
  Eigen::MatrixXd H;
  BandCost bc = band_cost(work, obstacle, cfg, target_time, true, &H);
  if (!std::isfinite(bc.cost)) throw BandOptimizationError("band cost is not finite at the initial band");
  res.cost = bc.cost;
  res.cost_history.push_back(bc.cost);

  double damping = 1e-2;
  std::vector<double> trial(nz);
  Eigen::VectorXd dir(static_cast<Eigen::Index>(nz));
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const Eigen::Map<const Eigen::VectorXd> g(bc.gradient.data(), static_cast<Eigen::Index>(nz));
    Eigen::MatrixXd A = H;
    A.diagonal().array() += damping * (1.0 + H.diagonal().array());
    dir = -A.ldlt().solve(g);
    if (!dir.allFinite() || dir.dot(g) >= 0.0) dir = -g * cfg.step_size;

    bool accepted = false;
    double new_cost = bc.cost;
    double alpha = 1.0;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      for (std::size_t i = 0; i < nz; ++i) trial[i] = z[i] + alpha * dir[static_cast<Eigen::Index>(i)];
      project(trial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < nz; ++i) decrease += bc.gradient[i] * (z[i] - trial[i]);
      if (decrease <= 0.0) continue;
      unpack(trial, work);
      new_cost = band_cost(work, obstacle, cfg, target_time, false).cost;
      if (!std::isfinite(new_cost)) continue;
      if (new_cost <= bc.cost - 1e-4 * decrease) {
        accepted = true;
        break;
      }
    }
    res.iterations = it + 1;
    if (!accepted) {
      if (damping < 1e6) {
        damping *= 10.0;
        continue;
      }
      res.converged = true;
      break;
    }
    damping = alpha == 1.0 ? std::max(damping * 0.3, 1e-6) : std::min(damping * 3.0, 1e6);
    const double improvement = (bc.cost - new_cost) / std::max(std::abs(bc.cost), 1e-12);
    z = trial;
    unpack(z, work);
    bc = band_cost(work, obstacle, cfg, target_time, true, &H);
    if (!std::isfinite(bc.cost)) {
      throw BandOptimizationError(fmt::format("band cost became non-finite at iteration {}", it));
    }
    res.cost = bc.cost;
    res.cost_history.push_back(bc.cost);
    if (improvement < cfg.rel_tolerance) {
      res.converged = true;
      break;
    }
  }
  unpack(z, res.band);
  for (auto& p : res.band.poses) p.theta = wrap_angle(p.theta);
  return res;
}

struct PlanResult {
  Band band;
  double cost = 0.0;
  int iterations = 0;
  bool degraded = false;
  BandPose goal;  // goal actually used (after clearance projection)
};

// Straight-line band from the robot to the goal, `band_poses` long and at
// most `band_duration` seconds in total. Uniform timing is picked so the
// band's speed roughly continues the robot's current speed: a band that
// starts far slower than the robot sits in a local minimum with the first
// interval pinned at dt_max.
inline Band initial_band(const Pose& robot, const BandPose& goal, const PlannerConfig& cfg) {
  Band b;
  const int n = cfg.band_poses;
  b.poses.resize(n);
  b.start_v = robot.v;
  b.start_omega = robot.omega;
  const double dx = goal.x - robot.x, dy = goal.y - robot.y;
  const double dist = std::hypot(dx, dy);
  const double v_ref = std::max(std::abs(robot.v), 0.5 * cfg.v_max);
  const double t_turn = std::abs(wrap_angle(goal.theta - robot.phi)) / cfg.omega_max;
  const double duration = std::min(cfg.band_duration, std::max(dist / v_ref, t_turn));
  b.dts.assign(n - 1, std::clamp(duration / (n - 1), cfg.dt_min, cfg.dt_max));
  const double heading = dist > 1e-6 ? std::atan2(dy, dx) : 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    b.poses[i].x = robot.x + s * dx;
    b.poses[i].y = robot.y + s * dy;
    if (dist > 1e-6) {
      b.poses[i].theta = heading;
    } else {
      b.poses[i].theta = robot.phi + s * wrap_angle(goal.theta - robot.phi);
    }
  }
  b.poses.front() = {robot.x, robot.y, robot.phi};
  b.poses.back() = goal;
  // keep interior headings continuous with the anchors
  for (int i = 1; i < n; ++i) {
    b.poses[i].theta = b.poses[i - 1].theta + wrap_angle(b.poses[i].theta - b.poses[i - 1].theta);
  }
  return b;
}

// Initial band bowed sideways by `lateral` metres at its middle (positive
// bows to the left of the robot-to-goal line).
inline Band detour_band(const Pose& robot, const BandPose& goal, double lateral, const PlannerConfig& cfg) {
  Band b = initial_band(robot, goal, cfg);
  const int n = static_cast<int>(b.poses.size());
  const double dx = goal.x - robot.x, dy = goal.y - robot.y;
  const double dist = std::hypot(dx, dy);
  if (dist < 1e-6) return b;
  const double nx = -dy / dist, ny = dx / dist;
  for (int i = 1; i + 1 < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    const double off = 4.0 * s * (1.0 - s) * lateral;
    b.poses[i].x += off * nx;
    b.poses[i].y += off * ny;
  }
  for (int i = 1; i + 1 < n; ++i) {
    const double h = std::atan2(b.poses[i + 1].y - b.poses[i - 1].y, b.poses[i + 1].x - b.poses[i - 1].x);
    b.poses[i].theta = b.poses[i - 1].theta + wrap_angle(h - b.poses[i - 1].theta);
  }
  const double stretch = std::sqrt(1.0 + std::pow(2.0 * lateral / dist, 2));
  for (double& d : b.dts) d = std::clamp(d * stretch, cfg.dt_min, cfg.dt_max);
  return b;
}

// Moves a goal that lies inside the inflated person disc onto its rim.
inline BandPose project_goal(const Pose& robot, BandPose goal, const DynamicObstacle& person, double horizon,
                             const PlannerConfig& cfg) {
  const double rho = cfg.clearance + cfg.inflation;
  for (double t : {0.0, horizon}) {
    const double px = person.x_at(t), py = person.y_at(t);
    double dx = goal.x - px, dy = goal.y - py;
    double d = std::hypot(dx, dy);
    if (d >= rho) continue;
    if (d < 1e-6) {
      dx = robot.x - px;
      dy = robot.y - py;
      d = std::hypot(dx, dy);
      if (d < 1e-6) {
        dx = 1.0;
        dy = 0.0;
        d = 1.0;
      }
    }
    goal.x = px + rho * dx / d;
    goal.y = py + rho * dy / d;
  }
  return goal;
}

inline DynamicObstacle obstacle_from(const Pose& person) {
  return {person.x, person.y, person.v * std::cos(person.phi), person.v * std::sin(person.phi)};
}

// Plans from the robot to a goal while avoiding the person (extrapolated at
// constant velocity). Never throws on optimizer failure: the best band so
// far is returned with `degraded` set.
inline PlanResult plan(const Pose& robot, const BandPose& goal, const std::optional<DynamicObstacle>& person,
                       const PlannerConfig& cfg, double target_time = 0.0) {
  PlanResult out;
  out.goal = goal;
  if (person) out.goal = project_goal(robot, goal, *person, target_time > 0.0 ? target_time : 1.0, cfg);
  auto attempt = [&](const Band& b) {
    PlanResult r;
    r.goal = out.goal;
    try {
      OptimizeResult o = optimize_band(b, person, cfg, target_time);
      r.band = std::move(o.band);
      r.cost = o.cost;
      r.iterations = o.iterations;
      r.degraded = !o.converged;
    } catch (const BandOptimizationError&) {
      r.band = b;
      r.cost = band_cost(b, person, cfg, target_time, false).cost;
      r.degraded = true;
    }
    return r;
  };
  out = attempt(initial_band(robot, out.goal, cfg));
  // A band that still presses on the person may be stuck on the wrong side
  // of it (or straight through it); try passing on either side.
  if (person && band_cost(out.band, person, cfg, target_time, false).terms.obstacle > 0.0) {
    const double lateral = cfg.detour_offset;
    for (double side : {1.0, -1.0}) {
      PlanResult alt = attempt(detour_band(robot, out.goal, side * lateral, cfg));
      if (alt.cost < out.cost) out = std::move(alt);
    }
  }
  return out;
}

namespace detail {

inline MotionCommand arc_command(const BandPose& p0, const BandPose& p1, double dt, double v_max, double omega_max,
                                 double v_min) {
  const double dx = p1.x - p0.x, dy = p1.y - p0.y;
  const double chord = std::hypot(dx, dy);
  const double dth = wrap_angle(p1.theta - p0.theta);
  if ((chord < 1e-6 && std::abs(dth) < 1e-6) || !(dt > 0.0)) return {};
  const double half = 0.5 * dth;
  const double arc = std::abs(half) > 1e-9 ? chord * half / std::sin(half) : chord;
  const double mid = p0.theta + half;
  const double dir = dx * std::cos(mid) + dy * std::sin(mid) >= 0.0 ? 1.0 : -1.0;
  MotionCommand c{dir * arc / dt, dth / dt};
  c.v = std::clamp(c.v, v_min, v_max);
  c.omega = std::clamp(c.omega, -omega_max, omega_max);
  return c;
}

}  // namespace detail

// First-segment command of a band: arc length over the first interval,
// heading change over the first interval, clamped to limits.
inline MotionCommand extract_command(const Band& b, double v_max, double omega_max, double v_min) {
  if (b.poses.size() < 2 || b.dts.empty()) return {};
  return detail::arc_command(b.poses[0], b.poses[1], b.dts[0], v_max, omega_max, v_min);
}

inline MotionCommand extract_command(const Band& b, const PlannerConfig& cfg) {
  return extract_command(b, cfg.v_max, cfg.omega_max, -cfg.v_max);
}

// Command that reproduces the band's pose at time `period` when held for one
// control period. Equals the first-segment command when dts[0] == period.
// Holding a first-segment command longer than dts[0] overshoots and the
// next replan corrects back, which chatters.
inline MotionCommand extract_command(const Band& b, const PlannerConfig& cfg, double period) {
  if (b.poses.size() < 2 || b.dts.empty()) return {};
  if (!(period > 0.0)) return extract_command(b, cfg);
  BandPose target = b.poses.back();
  double t = 0.0;
  for (std::size_t i = 0; i < b.dts.size(); ++i) {
    if (t + b.dts[i] >= period) {
      const double f = (period - t) / b.dts[i];
      const auto& p0 = b.poses[i];
      const auto& p1 = b.poses[i + 1];
      target = {p0.x + f * (p1.x - p0.x), p0.y + f * (p1.y - p0.y),
                p0.theta + f * wrap_angle(p1.theta - p0.theta)};
      break;
    }
    t += b.dts[i];
  }
  return detail::arc_command(b.poses[0], target, period, cfg.v_max, cfg.omega_max, -cfg.v_max);
}

}  // namespace follow_ahead

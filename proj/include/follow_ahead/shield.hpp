#pragma once

#include <algorithm>
#include <cmath>

#include "follow_ahead/planner_teb.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

// Last-line check on the command a planner hands to the robot. The band's
// person term is a soft penalty, so on its own it can trade a few
// centimetres of clearance for time.
struct ShieldConfig {
  double clearance = 0.5;
  double margin = 0.1;
  int lookahead_steps = 3;  // command held this many control steps
  double v_resolution = 0.1;
  double omega_resolution = 0.25;
  RobotLimits limits;
};

struct ShieldResult {
  MotionCommand command;
  double clearance = 0.0;  // worst predicted clearance for `command`
  bool overridden = false;
};

// Smallest distance to the person (extrapolated at constant velocity) while
// the robot holds `cmd`, rate-limited as the simulator would, for the
// configured number of steps.
inline double rollout_clearance(Pose robot, MotionCommand cmd, const DynamicObstacle& person, double dt,
                                const ShieldConfig& cfg) {
  double worst = std::hypot(robot.x - person.x, robot.y - person.y);
  for (int k = 1; k <= cfg.lookahead_steps; ++k) {
    const MotionCommand c = limit_robot_command(robot, cmd, cfg.limits);
    robot = step_unicycle(robot, c, dt);
    const double t = k * dt;
    worst = std::min(worst, std::hypot(robot.x - person.x_at(t), robot.y - person.y_at(t)));
  }
  return worst;
}

// Keeps `cmd` if its rollout stays clear of the person; otherwise the
// nearest reachable command that does, or failing that the one with the
// most clearance.
inline ShieldResult shield_command(const Pose& robot, MotionCommand cmd, const DynamicObstacle& person, double dt,
                                   const ShieldConfig& cfg = {}) {
  const double need = cfg.clearance + cfg.margin;
  ShieldResult out{cmd, rollout_clearance(robot, cmd, person, dt, cfg), false};
  if (out.clearance >= need) return out;

  const RobotLimits& lim = cfg.limits;
  const double v_lo = std::max(lim.v_min, robot.v - lim.dv_max), v_hi = std::min(lim.v_max, robot.v + lim.dv_max);
  const double w_lo = std::max(-lim.omega_max, robot.omega - lim.domega_max);
  const double w_hi = std::min(lim.omega_max, robot.omega + lim.domega_max);
  const int nv = static_cast<int>(std::ceil((v_hi - v_lo) / cfg.v_resolution));
  const int nw = static_cast<int>(std::ceil((w_hi - w_lo) / cfg.omega_resolution));

  double best_safe = 1e300, best_clear = -1.0;
  MotionCommand safe_cmd, clear_cmd;
  bool have_safe = false;
  for (int i = 0; i <= nv; ++i) {
    const double v = std::min(v_hi, v_lo + i * cfg.v_resolution);
    for (int j = 0; j <= nw; ++j) {
      const double w = std::min(w_hi, w_lo + j * cfg.omega_resolution);
      const MotionCommand c{v, w};
      const double clr = rollout_clearance(robot, c, person, dt, cfg);
      if (clr >= need) {
        const double dist = (v - cmd.v) * (v - cmd.v) + 0.1 * (w - cmd.omega) * (w - cmd.omega);
        if (dist < best_safe) {
          best_safe = dist;
          safe_cmd = c;
          have_safe = true;
        }
      }
      if (clr > best_clear) {
        best_clear = clr;
        clear_cmd = c;
      }
    }
  }
  if (have_safe) {
    out.command = safe_cmd;
    out.clearance = rollout_clearance(robot, safe_cmd, person, dt, cfg);
  } else if (best_clear > out.clearance) {
    out.command = clear_cmd;
    out.clearance = best_clear;
  } else {
    return out;
  }
  out.overridden = true;
  return out;
}

}  // namespace follow_ahead

#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "follow_ahead/geometry.hpp"
#include "follow_ahead/planner_teb.hpp"
#include "follow_ahead/shield.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead::rl {

using Action = std::array<double, 2>;

enum class PolicyKind { kGoal, kVelocity };

inline const char* to_string(PolicyKind k) { return k == PolicyKind::kGoal ? "goal" : "velocity"; }

// Goal in the person frame: a scaled into a square box, facing away from
// the person along the goal's bearing.
inline RelativeState goal_action_decode(const Action& a, double scale = 3.0) {
  const double x = scale * a[0], y = scale * a[1];
  const double theta = (x == 0.0 && y == 0.0) ? 0.0 : std::atan2(y, x);
  return {x, y, theta};
}

inline MotionCommand e2e_action_decode(const Action& a, double v_scale = 1.0, double omega_scale = 2.0) {
  return {v_scale * a[0], omega_scale * a[1]};
}

struct ExecutorConfig {
  PlannerConfig planner;
  ShieldConfig shield;
  bool use_shield = true;
  double period = 0.2;
};

struct Execution {
  MotionCommand command;
  BandPose goal;  // world frame, after projection out of the person disc
  bool degraded = false;
  bool shielded = false;
};

// Drives the robot toward a goal given in the person's frame: plan around
// the person, take the command for one control period, then check it.
inline Execution execute_goal(const WorldState& w, const RelativeState& rel_goal, const ExecutorConfig& cfg) {
  const Pose g = relative_to_world(rel_goal, w.human);
  const DynamicObstacle person = obstacle_from(w.human);
  const PlanResult pr = plan(w.robot, {g.x, g.y, g.phi}, person, cfg.planner);
  Execution out;
  out.goal = pr.goal;
  out.degraded = pr.degraded;
  out.command = extract_command(pr.band, cfg.planner, cfg.period);
  if (cfg.use_shield) {
    const ShieldResult sr = shield_command(w.robot, out.command, person, cfg.period, cfg.shield);
    out.command = sr.command;
    out.shielded = sr.overridden;
  }
  return out;
}

}  // namespace follow_ahead::rl

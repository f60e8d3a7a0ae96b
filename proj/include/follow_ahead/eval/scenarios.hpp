#pragma once

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/eval/config.hpp"
#include "follow_ahead/geometry.hpp"
#include "follow_ahead/human_motion.hpp"
#include "follow_ahead/reward.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

enum class Script { kStraight, kTurning, kFieldStraight, kSShape, kUTurn, kRecorded };

struct Placement {
  double distance = 1.5;
  double alpha_deg = 0.0;
  double robot_heading = 0.0;  // relative to the person's heading
};

struct Scenario {
  std::string name;
  Script script = Script::kStraight;
  Placement placement;
  int horizon = 50;
  std::filesystem::path trajectory;  // kRecorded only

  void validate() const {
    if (horizon <= 0) throw std::invalid_argument(fmt::format("scenario {}: horizon must be positive", name));
    if (!(placement.distance > kTooClose && placement.distance < kTooFar)) {
      throw std::invalid_argument(fmt::format("scenario {}: start distance {} is terminal", name, placement.distance));
    }
  }
};

class ScenarioNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Person commands for a scripted path.
inline MotionPlan scenario_motion(const Scenario& sc, const ScriptParams& p, const TrackerConfig& tracker = {}) {
  switch (sc.script) {
    case Script::kStraight: return StraightMotion{p.straight_speed};
    case Script::kTurning: return CircleMotion{p.turning_speed, p.turning_omega};
    case Script::kFieldStraight:
      return SegmentMotion{{{p.field_straight_speed, 0.0, p.field_straight_length / p.field_straight_speed}}};
    case Script::kSShape: {
      const double w = p.s_speed / p.s_radius, t = kPi / w;
      return SegmentMotion{{{p.s_speed, w, t}, {p.s_speed, -w, t}}};
    }
    case Script::kUTurn: {
      const double leg = p.u_leg / p.u_speed, w = p.u_speed / p.u_radius;
      return SegmentMotion{{{p.u_speed, 0.0, leg}, {p.u_speed, w, kPi / w}, {p.u_speed, 0.0, leg}}};
    }
    case Script::kRecorded: {
      if (!std::filesystem::exists(sc.trajectory)) {
        throw ScenarioNotFound(fmt::format("scenario {}: trajectory {} not found", sc.name, sc.trajectory.string()));
      }
      return TrackedTrajectory::from(load_trajectory(sc.trajectory), 0, tracker);
    }
  }
  throw std::logic_error("unknown script");
}

inline WorldState scenario_world(const Scenario& sc) {
  return place_world(sc.placement.distance, rad(sc.placement.alpha_deg), sc.placement.robot_heading);
}

// Simulation settings first, then the hardware settings replayed in
// simulation.
inline std::vector<Scenario> scenario_suite(const EvalConfig& cfg) {
  const Horizons& h = cfg.horizons;
  std::vector<Scenario> s;
  auto add = [&](std::string name, Script script, double d, double alpha, int horizon) {
    s.push_back({std::move(name), script, {d, alpha, 0.0}, horizon, {}});
  };
  add("straight/ahead", Script::kStraight, 1.5, 0.0, h.straight);
  add("straight/behind", Script::kStraight, 1.5, 180.0, h.straight);
  add("turning/ahead", Script::kTurning, 1.5, 0.0, h.turning);
  add("turning/behind", Script::kTurning, 1.5, 180.0, h.turning);
  add("turning/inside", Script::kTurning, 1.5, 45.0, h.turning);
  add("turning/outside", Script::kTurning, 1.5, -45.0, h.turning);
  for (const char* t : {"trajectory_one", "trajectory_two", "trajectory_three"}) {
    Scenario sc{t, Script::kRecorded, {1.5, 0.0, 0.0}, h.trajectory,
                std::filesystem::path(cfg.trajectory_dir) / (std::string(t) + ".csv")};
    s.push_back(sc);
  }
  for (auto [script, name, horizon] : {std::tuple{Script::kFieldStraight, "field_straight", h.field_straight},
                                       std::tuple{Script::kSShape, "s_shape", h.s_shape}}) {
    add(std::string(name) + "/ahead", script, 2.0, 0.0, horizon);
    add(std::string(name) + "/ahead_right", script, 1.5, 45.0, horizon);
    add(std::string(name) + "/ahead_left", script, 1.5, -45.0, horizon);
    add(std::string(name) + "/behind", script, 1.2, 180.0, horizon);
  }
  add("u_turn/ahead", Script::kUTurn, 1.7, 0.0, h.u_turn);
  add("u_turn/ahead_left", Script::kUTurn, 2.0, -55.0, h.u_turn);
  add("u_turn/ahead_far_left", Script::kUTurn, 3.6, -75.0, h.u_turn);
  add("u_turn/behind", Script::kUTurn, 1.2, 180.0, h.u_turn);
  if (!cfg.scenarios.empty()) {
    std::vector<Scenario> picked;
    for (const auto& name : cfg.scenarios) {
      bool found = false;
      for (const auto& sc : s) {
        if (sc.name == name || sc.name.rfind(name + "/", 0) == 0) {
          picked.push_back(sc);
          found = true;
        }
      }
      if (!found) throw ScenarioNotFound(fmt::format("unknown scenario '{}'", name));
    }
    s = std::move(picked);
  }
  for (const auto& sc : s) sc.validate();
  return s;
}

}  // namespace follow_ahead

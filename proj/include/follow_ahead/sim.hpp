#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/geometry.hpp"
#include "follow_ahead/human_motion.hpp"
#include "follow_ahead/reward.hpp"

namespace follow_ahead {

// Exact-arc unicycle integration. The returned pose carries the command as
// its velocity.
inline Pose step_unicycle(const Pose& p, const MotionCommand& cmd, double dt) {
  const double th1 = p.phi + cmd.omega * dt;
  Pose out;
  if (std::abs(cmd.omega) < 1e-9) {
    out.x = p.x + cmd.v * dt * std::cos(p.phi);
    out.y = p.y + cmd.v * dt * std::sin(p.phi);
  } else {
    const double r = cmd.v / cmd.omega;
    out.x = p.x + r * (std::sin(th1) - std::sin(p.phi));
    out.y = p.y - r * (std::cos(th1) - std::cos(p.phi));
  }
  out.phi = wrap_angle(th1);
  out.v = cmd.v;
  out.omega = cmd.omega;
  return out;
}

struct RobotLimits {
  double v_min = -1.0;
  double v_max = 1.0;
  double omega_max = 2.0;
  double dv_max = 0.5;      // per control step
  double domega_max = 2.0;  // per control step
};

struct EpisodeConfig {
  double dt = 0.2;
  int max_steps = 100;
  double sigma_pos = 0.05;
  double sigma_ang = 0.02;
  RobotLimits robot;
  PersonLimits person;
  double spawn_min = 1.0;
  double spawn_max = 2.5;
  double position_scale = 6.0;

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("EpisodeConfig: dt must be positive");
    if (max_steps <= 0) throw std::invalid_argument("EpisodeConfig: max_steps must be positive");
    if (!(spawn_max > spawn_min) || spawn_min < 0.0) throw std::invalid_argument("EpisodeConfig: bad spawn range");
    if (!(robot.v_max > robot.v_min) || !(robot.omega_max > 0.0)) {
      throw std::invalid_argument("EpisodeConfig: bad robot limits");
    }
    if (sigma_pos < 0.0 || sigma_ang < 0.0) throw std::invalid_argument("EpisodeConfig: negative noise");
  }
};

inline constexpr std::size_t kHistoryFrames = 10;
inline constexpr std::size_t kObservationSize = 3 + 6 * (kHistoryFrames - 1);  // 57

struct Snapshot {
  Pose human;
  Pose robot;
  int step = 0;
};

struct WorldState {
  Pose human;
  Pose robot;
  int step = 0;
  std::deque<Snapshot> history;  // oldest first, newest == current, <= 10
  int clamp_events = 0;

  void push_history() {
    history.push_back({human, robot, step});
    while (history.size() > kHistoryFrames) history.pop_front();
  }
  double distance() const { return person_robot_distance(robot, human); }
};

// z^r_t, then (z^h_{t-i}, z^r_{t-i}) for i = 1..9, scaled to [-1, 1]:
// positions divided by EpisodeConfig::position_scale, angles by pi.
using Observation = std::array<double, kObservationSize>;

struct Episode {
  WorldState world;
  MotionPlan human_plan;
};

// Human at the origin heading +x; robot at a uniform distance in
// [spawn_min, spawn_max], uniform bearing and uniform orientation.
template <class Rng>
WorldState spawn_world(const EpisodeConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> dist(cfg.spawn_min, cfg.spawn_max);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  WorldState w;
  const double d = dist(rng);
  const double bearing = ang(rng);
  const double heading = ang(rng);
  w.human = Pose(0.0, 0.0, 0.0);
  w.robot = Pose(d * std::cos(bearing), d * std::sin(bearing), heading);
  w.push_history();
  return w;
}

// Places the robot at distance d and person-robot angle alpha (radians) with
// the given orientation relative to the human heading.
inline WorldState place_world(double d, double alpha, double robot_rel_heading) {
  WorldState w;
  w.human = Pose(0.0, 0.0, 0.0);
  w.robot = Pose(d * std::cos(alpha), d * std::sin(alpha), robot_rel_heading);
  w.push_history();
  return w;
}

template <class Rng>
Episode spawn_episode(int level, const EpisodeConfig& cfg, Rng& rng, const std::vector<Trajectory>& library,
                      const TrackerConfig& tracker = {}) {
  Episode e;
  e.world = spawn_world(cfg, rng);
  e.human_plan = sample_motion(level, rng, library, tracker);
  return e;
}

namespace detail {
inline double scale_pos(double v, double s) { return std::clamp(v / s, -1.0, 1.0); }
inline double scale_ang(double a) { return std::clamp(wrap_angle(a) / kPi, -1.0, 1.0); }
inline void put(Observation& o, std::size_t at, const RelativeState& r, double s) {
  o[at] = scale_pos(r.x, s);
  o[at + 1] = scale_pos(r.y, s);
  o[at + 2] = scale_ang(r.phi);
}
}  // namespace detail

inline Observation build_observation(const WorldState& w, double position_scale = 6.0) {
  if (w.history.empty()) throw std::invalid_argument("build_observation: empty history");
  Observation o{};
  const Pose& h = w.human;
  detail::put(o, 0, world_to_relative(w.robot, h), position_scale);
  const std::size_t n = w.history.size();
  for (std::size_t i = 1; i < kHistoryFrames; ++i) {
    // Frame t-i; pad with the oldest available snapshot.
    const Snapshot& s = i < n ? w.history[n - 1 - i] : w.history.front();
    detail::put(o, 3 + 6 * (i - 1), world_to_relative(s.human, h), position_scale);
    detail::put(o, 6 + 6 * (i - 1), world_to_relative(s.robot, h), position_scale);
  }
  return o;
}

// Perturbs in physical units, then rescales and clamps.
template <class Rng>
Observation apply_observation_noise(const Observation& obs, double sigma_pos, double sigma_ang, Rng& rng,
                                    double position_scale = 6.0) {
  if (sigma_pos == 0.0 && sigma_ang == 0.0) return obs;
  std::normal_distribution<double> n01(0.0, 1.0);
  Observation out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i % 3 == 2) {
      const double a = obs[i] * kPi + sigma_ang * n01(rng);
      out[i] = detail::scale_ang(a);
    } else {
      const double p = obs[i] * position_scale + sigma_pos * n01(rng);
      out[i] = detail::scale_pos(p, position_scale);
    }
  }
  return out;
}

struct StepResult {
  RewardTerms reward;
  Termination termination = Termination::kContinue;
  bool terminal() const { return termination != Termination::kContinue; }
};

// Clamps a robot command to the actuator envelope and per-step rate limits.
inline MotionCommand limit_robot_command(const Pose& robot, MotionCommand cmd, const RobotLimits& lim,
                                         bool* clamped = nullptr) {
  MotionCommand out = cmd;
  out.v = std::clamp(out.v, lim.v_min, lim.v_max);
  out.omega = std::clamp(out.omega, -lim.omega_max, lim.omega_max);
  out.v = std::clamp(out.v, robot.v - lim.dv_max, robot.v + lim.dv_max);
  out.omega = std::clamp(out.omega, robot.omega - lim.domega_max, robot.omega + lim.domega_max);
  if (clamped) *clamped = out.v != cmd.v || out.omega != cmd.omega;
  return out;
}

// Advances both agents by one control step and scores the new state.
inline StepResult env_step(WorldState& w, MotionCommand robot_cmd, MotionCommand human_cmd,
                           const EpisodeConfig& cfg) {
  bool clamped = false;
  robot_cmd = limit_robot_command(w.robot, robot_cmd, cfg.robot, &clamped);
  const MotionCommand h = clamp_command(human_cmd, 0.0, cfg.person.v_max, cfg.person.omega_max);
  if (clamped || h.v != human_cmd.v || h.omega != human_cmd.omega) ++w.clamp_events;

  w.robot = step_unicycle(w.robot, robot_cmd, cfg.dt);
  w.human = step_unicycle(w.human, h, cfg.dt);
  ++w.step;
  w.push_history();

  StepResult r;
  const double d = w.distance();
  const double alpha = d > 0.0 ? person_robot_angle(world_to_relative(w.robot, w.human)) : 0.0;
  r.reward = step_reward(d, deg(alpha));
  r.termination = is_terminal(d);
  if (r.termination == Termination::kContinue && w.step >= cfg.max_steps) r.termination = Termination::kHorizon;
  return r;
}

// ---------------------------------------------------------------------------
// Episode logs
//
//   # follow_ahead episode log v1
//   # key=value ...                      (optional metadata lines)
//   step,hx,hy,hphi,hv,homega,rx,ry,rphi,rv,romega,D,alpha_deg,reward,terminal
//   1,...
//
// One row per executed step (state after the step). Numbers are printed with
// 17 significant digits so that metrics recomputed from a log are exact.

struct LogRecord {
  int step = 0;
  Pose human;
  Pose robot;
  double distance = 0.0;
  double alpha_deg = 0.0;
  double reward = 0.0;
  Termination terminal = Termination::kContinue;
};

struct EpisodeLog {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<LogRecord> records;

  std::string meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta) {
      if (k == key) return v;
    }
    return {};
  }
};

inline LogRecord make_record(const WorldState& w, const StepResult& r) {
  return {w.step, w.human, w.robot, r.reward.distance, r.reward.alpha_deg, r.reward.total, r.termination};
}

inline constexpr const char* kLogHeader = "step,hx,hy,hphi,hv,homega,rx,ry,rphi,rv,romega,D,alpha_deg,reward,terminal";

inline void write_episode_log(std::ostream& out, const EpisodeLog& log) {
  out << "# follow_ahead episode log v1\n";
  for (const auto& [k, v] : log.meta) out << "# " << k << "=" << v << "\n";
  out << kLogHeader << "\n";
  for (const auto& r : log.records) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
                       "{:.17g},{:.17g},{:.17g},{}\n",
                       r.step, r.human.x, r.human.y, r.human.phi, r.human.v, r.human.omega, r.robot.x, r.robot.y,
                       r.robot.phi, r.robot.v, r.robot.omega, r.distance, r.alpha_deg, r.reward,
                       to_string(r.terminal));
  }
}

inline EpisodeLog read_episode_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos && line.size() > 2) {
        log.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      }
      continue;
    }
    if (!header) {
      if (line != kLogHeader) throw std::runtime_error("episode log: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 15) throw std::runtime_error("episode log: malformed row '" + line + "'");
    LogRecord r;
    r.step = std::stoi(f[0]);
    r.human.x = std::stod(f[1]);
    r.human.y = std::stod(f[2]);
    r.human.phi = std::stod(f[3]);
    r.human.v = std::stod(f[4]);
    r.human.omega = std::stod(f[5]);
    r.robot.x = std::stod(f[6]);
    r.robot.y = std::stod(f[7]);
    r.robot.phi = std::stod(f[8]);
    r.robot.v = std::stod(f[9]);
    r.robot.omega = std::stod(f[10]);
    r.distance = std::stod(f[11]);
    r.alpha_deg = std::stod(f[12]);
    r.reward = std::stod(f[13]);
    r.terminal = termination_from_string(f[14]);
    log.records.push_back(r);
  }
  if (!header) throw std::runtime_error("episode log: missing header");
  return log;
}

}  // namespace follow_ahead

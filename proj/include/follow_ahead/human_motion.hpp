#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/geometry.hpp"

namespace follow_ahead {

struct MotionCommand {
  double v = 0.0;
  double omega = 0.0;
};

// Actuation envelope of the simulated person.
struct PersonLimits {
  double v_max = 1.0;
  double omega_max = 1.0;
};

inline MotionCommand clamp_command(MotionCommand c, double v_min, double v_max, double w_max) {
  return {std::clamp(c.v, v_min, v_max), std::clamp(c.omega, -w_max, w_max)};
}

// Level 1: one linear velocity for the whole episode.
struct StraightMotion {
  static constexpr double kVMin = 0.2;
  static constexpr double kVMax = 0.8;
  double v = 0.5;

  template <class Rng>
  static StraightMotion sample(Rng& rng) {
    return {std::uniform_real_distribution<double>(kVMin, kVMax)(rng)};
  }
  MotionCommand next(const Pose&, double) { return {v, 0.0}; }
};

// Level 2: constant (v, omega); traces a circle of radius v / omega.
struct CircleMotion {
  static constexpr double kVMin = 0.2, kVMax = 0.6;
  static constexpr double kWMin = 0.3, kWMax = 0.8;
  double v = 0.4;
  double omega = 0.4;

  template <class Rng>
  static CircleMotion sample(Rng& rng) {
    CircleMotion m;
    m.v = std::uniform_real_distribution<double>(kVMin, kVMax)(rng);
    m.omega = std::uniform_real_distribution<double>(kWMin, kWMax)(rng);
    return m;
  }
  double radius() const { return v / omega; }
  MotionCommand next(const Pose&, double) { return {v, omega}; }
};

struct SmoothCurveState {
  double v_lin = 0.4;  // V_l, in [0, 1]
  double v_ang = 0.0;  // V_a, in [-1, 1]
  double r1 = 0.4;     // pending draw in [0, 1]
  double r2 = 0.0;     // pending draw in [-1, 1]
};

// One update of the smoothed random walk. The state's pending draws are
// consumed and replaced with fresh ones from `rng`.
template <class Rng>
std::pair<SmoothCurveState, MotionCommand> smooth_curve_step(const SmoothCurveState& s, Rng& rng) {
  SmoothCurveState n;
  n.v_lin = s.v_lin - (s.v_lin - s.r1) / 3.0;
  n.v_ang = s.v_ang - (s.v_ang - s.r2) / 3.0;
  n.r1 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  n.r2 = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  return {n, MotionCommand{n.v_lin, n.v_ang}};
}

// Level 3.
struct SmoothCurveMotion {
  SmoothCurveState state;
  std::mt19937_64 rng;

  template <class Rng>
  static SmoothCurveMotion sample(Rng& rng) {
    SmoothCurveMotion m;
    m.state.v_lin = std::uniform_real_distribution<double>(0.2, 0.6)(rng);
    m.state.v_ang = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    m.state.r1 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    m.state.r2 = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    m.rng.seed(rng());
    return m;
  }
  MotionCommand next(const Pose&, double) {
    auto [s, cmd] = smooth_curve_step(state, rng);
    state = s;
    return cmd;
  }
};

// Piecewise-constant (v, omega) script; the person stops once the script
// is exhausted.
struct SegmentMotion {
  struct Segment {
    double v;
    double omega;
    double duration;
  };
  std::vector<Segment> segments;
  double elapsed = 0.0;

  // Time-weighted mean command over [elapsed, elapsed + dt], so segment
  // boundaries that fall inside a step keep the scripted total turn.
  MotionCommand next(const Pose&, double dt) {
    const double t0 = elapsed, t1 = elapsed + dt;
    elapsed = t1;
    MotionCommand c{0.0, 0.0};
    double start = 0.0;
    for (const auto& s : segments) {
      const double overlap = std::min(t1, start + s.duration) - std::max(t0, start);
      if (overlap > 0.0) {
        c.v += s.v * overlap / dt;
        c.omega += s.omega * overlap / dt;
      }
      start += s.duration;
    }
    return c;
  }
};

// ---------------------------------------------------------------------------
// Recorded trajectories

struct Waypoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct Trajectory {
  std::string name;
  std::vector<Waypoint> points;

  double length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      len += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
    }
    return len;
  }

  Trajectory reversed() const {
    Trajectory r;
    r.name = name + "_rev";
    r.points.reserve(points.size());
    const double t_end = points.empty() ? 0.0 : points.back().t;
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
      r.points.push_back({t_end - it->t, it->x, it->y});
    }
    return r;
  }
};

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxWaypointGap = 0.5;

inline void validate_trajectory(const Trajectory& traj) {
  if (traj.points.size() < 2) {
    throw TrajectoryError("trajectory '" + traj.name + "' needs at least 2 waypoints");
  }
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const auto& a = traj.points[i - 1];
    const auto& b = traj.points[i];
    if (!(b.t > a.t)) {
      throw TrajectoryError(fmt::format("trajectory '{}': time not increasing at row {}", traj.name, i + 1));
    }
    if (std::hypot(b.x - a.x, b.y - a.y) > kMaxWaypointGap + 1e-9) {
      throw TrajectoryError(fmt::format("trajectory '{}': gap > {} m at row {}", traj.name, kMaxWaypointGap, i + 1));
    }
  }
}

// Format: header line "t,x,y", then rows with t to 3 decimals, x/y to 4.
inline Trajectory parse_trajectory(std::istream& in, std::string name) {
  Trajectory traj;
  traj.name = std::move(name);
  std::string line;
  if (!std::getline(in, line)) throw TrajectoryError("trajectory '" + traj.name + "': empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,x,y") throw TrajectoryError("trajectory '" + traj.name + "': bad header '" + line + "'");
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Waypoint w;
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> w.t >> c1 >> w.x >> c2 >> w.y) || c1 != ',' || c2 != ',' || !(ss >> std::ws).eof() ||
        !std::isfinite(w.t) || !std::isfinite(w.x) || !std::isfinite(w.y)) {
      throw TrajectoryError(fmt::format("trajectory '{}': malformed row {}: '{}'", traj.name, row, line));
    }
    traj.points.push_back(w);
  }
  validate_trajectory(traj);
  return traj;
}

inline Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TrajectoryError("cannot open trajectory " + path.string());
  return parse_trajectory(in, path.stem().string());
}

inline void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y\n";
  for (const auto& w : traj.points) out << fmt::format("{:.3f},{:.4f},{:.4f}\n", w.t, w.x, w.y);
}

inline void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  validate_trajectory(traj);
  std::ofstream out(path);
  if (!out) throw TrajectoryError("cannot write trajectory " + path.string());
  write_trajectory(out, traj);
}

// Every *.csv in a directory plus the reverse of each, sorted by name.
inline std::vector<Trajectory> load_trajectory_library(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Trajectory> lib;
  for (const auto& f : files) {
    Trajectory t = load_trajectory(f);
    Trajectory r = t.reversed();
    lib.push_back(std::move(t));
    lib.push_back(std::move(r));
  }
  return lib;
}

// ---------------------------------------------------------------------------
// PID waypoint tracking

struct PidGains {
  double kp = 2.0;
  double ki = 0.0;
  double kd = 0.2;
};

struct TrackerConfig {
  PidGains heading;
  double speed_kp = 1.0;
  double cruise_speed = 0.5;
  double advance_radius = 0.3;
  PersonLimits limits;
};

// Heading PID plus a proportional speed law; the integral and the previous
// error are the only state.
class PidTracker {
 public:
  explicit PidTracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

  MotionCommand pid_track(const Pose& person, const Waypoint& target, double dt, double dist_to_end) {
    const double dx = target.x - person.x;
    const double dy = target.y - person.y;
    const double err = std::hypot(dx, dy) < 1e-9 ? 0.0 : wrap_angle(std::atan2(dy, dx) - person.phi);
    integral_ += err * dt;
    const double deriv = has_prev_ ? wrap_angle(err - prev_err_) / dt : 0.0;
    prev_err_ = err;
    has_prev_ = true;
    MotionCommand cmd;
    cmd.omega = cfg_.heading.kp * err + cfg_.heading.ki * integral_ + cfg_.heading.kd * deriv;
    cmd.v = std::min(cfg_.cruise_speed, cfg_.speed_kp * dist_to_end) * std::max(0.0, std::cos(err));
    return clamp_command(cmd, 0.0, cfg_.limits.v_max, cfg_.limits.omega_max);
  }

  MotionCommand pid_track(const Pose& person, const Waypoint& target, double dt) {
    return pid_track(person, target, dt, std::hypot(target.x - person.x, target.y - person.y));
  }

  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  double integral_ = 0.0;
  double prev_err_ = 0.0;
  bool has_prev_ = false;
};

// Level 4: the person follows a recorded path, expressed in a frame where
// the starting waypoint is the origin and the initial heading is +x.
struct TrackedTrajectory {
  std::string name;
  std::vector<Waypoint> path;
  std::size_t target = 1;
  PidTracker tracker;

  static TrackedTrajectory from(const Trajectory& traj, std::size_t start, TrackerConfig cfg = {}) {
    TrackedTrajectory m;
    m.name = traj.name;
    m.tracker = PidTracker(cfg);
    const auto& p = traj.points;
    start = std::min(start, p.size() - 2);
    const Pose origin(p[start].x, p[start].y,
                      std::atan2(p[start + 1].y - p[start].y, p[start + 1].x - p[start].x));
    for (std::size_t i = start; i < p.size(); ++i) {
      const auto r = world_to_relative(Pose(p[i].x, p[i].y, 0.0), origin);
      m.path.push_back({p[i].t - p[start].t, r.x, r.y});
    }
    return m;
  }

  double remaining_length(const Pose& person) const {
    if (target >= path.size()) return 0.0;
    double len = std::hypot(path[target].x - person.x, path[target].y - person.y);
    for (std::size_t i = target + 1; i < path.size(); ++i) {
      len += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
    }
    return len;
  }

  MotionCommand next(const Pose& person, double dt) {
    const double r = tracker.config().advance_radius;
    while (target + 1 < path.size() &&
           std::hypot(path[target].x - person.x, path[target].y - person.y) < r) {
      ++target;
    }
    if (target + 1 == path.size() &&
        std::hypot(path[target].x - person.x, path[target].y - person.y) < 0.5 * r) {
      return {0.0, 0.0};
    }
    return tracker.pid_track(person, path[target], dt, remaining_length(person));
  }
};

// A person-motion generator for one episode.
class MotionPlan {
 public:
  using Variant = std::variant<StraightMotion, CircleMotion, SmoothCurveMotion, SegmentMotion, TrackedTrajectory>;

  MotionPlan() = default;
  template <class T>
  MotionPlan(T m) : impl_(std::move(m)) {}  // NOLINT(google-explicit-constructor)

  MotionCommand next(const Pose& person, double dt) {
    return std::visit([&](auto& m) { return m.next(person, dt); }, impl_);
  }
  const Variant& variant() const { return impl_; }
  std::size_t kind() const { return impl_.index(); }

 private:
  Variant impl_ = StraightMotion{};
};

class EmptyLibrary : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dispatches a curriculum level (1..4) to its generator.
template <class Rng>
MotionPlan sample_motion(int level, Rng& rng, const std::vector<Trajectory>& library,
                         const TrackerConfig& tracker = {}) {
  switch (level) {
    case 1: return StraightMotion::sample(rng);
    case 2: return CircleMotion::sample(rng);
    case 3: return SmoothCurveMotion::sample(rng);
    case 4: {
      if (library.empty()) throw EmptyLibrary("level 4 requires a non-empty trajectory library");
      const auto& traj = library[std::uniform_int_distribution<std::size_t>(0, library.size() - 1)(rng)];
      // Start anywhere that leaves at least 4 m of path ahead.
      std::size_t last_start = 0;
      double tail = 0.0;
      for (std::size_t i = traj.points.size() - 1; i > 0; --i) {
        tail += std::hypot(traj.points[i].x - traj.points[i - 1].x, traj.points[i].y - traj.points[i - 1].y);
        if (tail >= 4.0) {
          last_start = i - 1;
          break;
        }
      }
      const auto start = std::uniform_int_distribution<std::size_t>(0, last_start)(rng);
      return TrackedTrajectory::from(traj, start, tracker);
    }
    default: throw std::invalid_argument(fmt::format("curriculum level {} outside 1..4", level));
  }
}

}  // namespace follow_ahead

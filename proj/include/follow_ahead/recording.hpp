#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "follow_ahead/human_motion.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

// Collects the person's path while a recording is active.
class TrajectoryRecorder {
 public:
  bool active() const { return active_; }

  void start(std::string name) {
    if (active_) throw std::logic_error("recording already in progress");
    traj_ = Trajectory{std::move(name), {}};
    active_ = true;
    t_ = 0.0;
  }

  void add(const Pose& person, double dt) {
    if (!active_) return;
    if (!traj_.points.empty()) t_ += dt;
    traj_.points.push_back({std::round(t_ * 1e3) / 1e3, std::round(person.x * 1e4) / 1e4,
                            std::round(person.y * 1e4) / 1e4});
  }

  double length() const { return traj_.length(); }

  Trajectory stop() {
    if (!active_) throw std::logic_error("no recording in progress");
    active_ = false;
    return std::move(traj_);
  }

 private:
  Trajectory traj_;
  bool active_ = false;
  double t_ = 0.0;
};

// Emulates a person steering with arrow keys: forward held most of the
// time, left/right held for random stretches, first-order ramping on the
// commanded speed. Used to synthesize the bundled level-4 library.
inline Trajectory scripted_drive(const std::string& name, std::uint64_t seed, double duration, double dt = 0.2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> hold(1.0, 4.0);
  std::uniform_int_distribution<int> key(-1, 1);
  const double v_cruise = 0.6, w_turn = 0.6;
  Pose p;
  TrajectoryRecorder rec;
  rec.start(name);
  rec.add(p, dt);
  double t = 0.0, next_switch = hold(rng);
  int turn = 0;
  double v = 0.0;
  while (t < duration) {
    if (t >= next_switch) {
      turn = key(rng);
      next_switch = t + hold(rng);
    }
    v += 0.5 * (v_cruise - v);
    p = step_unicycle(p, {v, turn * w_turn}, dt);
    rec.add(p, dt);
    t += dt;
  }
  return rec.stop();
}

}  // namespace follow_ahead

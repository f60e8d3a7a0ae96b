#pragma once

#include <optional>
#include <random>
#include <vector>

#include "follow_ahead/human_motion.hpp"
#include "follow_ahead/rl/actions.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead::rl {

struct EnvConfig {
  EpisodeConfig episode;
  ExecutorConfig executor;
  TrackerConfig tracker;
  PolicyKind kind = PolicyKind::kGoal;
  double goal_scale = 3.0;
  bool observation_noise = true;
};

struct EnvStep {
  Observation obs{};
  StepResult result;
  std::optional<BandPose> goal;
  bool shielded = false;
};

// One simulated person/robot pair driven by policy actions.
class FollowEnv {
 public:
  FollowEnv(EnvConfig cfg, const std::vector<Trajectory>* library, std::uint64_t seed)
      : cfg_(std::move(cfg)), library_(library), rng_(seed) {
    cfg_.episode.validate();
    cfg_.executor.period = cfg_.episode.dt;
  }

  Observation reset(int level) {
    static const std::vector<Trajectory> kEmpty;
    Episode e = spawn_episode(level, cfg_.episode, rng_, library_ ? *library_ : kEmpty, cfg_.tracker);
    return reset(std::move(e));
  }

  Observation reset(Episode e) {
    ep_ = std::move(e);
    return observe();
  }

  EnvStep step(const Action& a) {
    EnvStep out;
    MotionCommand cmd;
    if (cfg_.kind == PolicyKind::kGoal) {
      const Execution ex = execute_goal(ep_.world, goal_action_decode(a, cfg_.goal_scale), cfg_.executor);
      cmd = ex.command;
      out.goal = ex.goal;
      out.shielded = ex.shielded;
    } else {
      cmd = e2e_action_decode(a, cfg_.episode.robot.v_max, cfg_.episode.robot.omega_max);
    }
    const MotionCommand h = ep_.human_plan.next(ep_.world.human, cfg_.episode.dt);
    out.result = env_step(ep_.world, cmd, h, cfg_.episode);
    out.obs = observe();
    return out;
  }

  const WorldState& world() const { return ep_.world; }
  const EnvConfig& config() const { return cfg_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  Observation observe() {
    const Observation o = build_observation(ep_.world, cfg_.episode.position_scale);
    if (!cfg_.observation_noise) return o;
    return apply_observation_noise(o, cfg_.episode.sigma_pos, cfg_.episode.sigma_ang, rng_,
                                   cfg_.episode.position_scale);
  }

  EnvConfig cfg_;
  const std::vector<Trajectory>* library_;
  std::mt19937_64 rng_;
  Episode ep_;
};

}  // namespace follow_ahead::rl

#pragma once

#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/baseline_hc.hpp"
#include "follow_ahead/eval/config.hpp"
#include "follow_ahead/rl/actions.hpp"
#include "follow_ahead/rl/checkpoint.hpp"
#include "follow_ahead/rl/d4pg.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

struct ControlOutput {
  MotionCommand command;
  std::optional<BandPose> goal;  // world frame; only for goal-emitting controllers
};

// A closed-loop robot controller. `rng` supplies sensing noise; controllers
// see the world only through noisy measurements.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual void reset() {}
  virtual ControlOutput act(const WorldState& w, std::mt19937_64& rng) = 0;
};

class NoopController : public Controller {
 public:
  std::string name() const override { return "noop"; }
  ControlOutput act(const WorldState&, std::mt19937_64&) override { return {}; }
};

// Learned policy, goal (LBGP) or velocity (E2E) output.
class PolicyController : public Controller {
 public:
  PolicyController(std::string name, std::shared_ptr<const rl::Mlp> actor, rl::PolicyKind kind, const Config& cfg)
      : name_(std::move(name)), actor_(std::move(actor)), kind_(kind), episode_(cfg.episode),
        executor_(cfg.train.env.executor), goal_scale_(cfg.train.env.goal_scale) {}

  std::string name() const override { return name_; }

  ControlOutput act(const WorldState& w, std::mt19937_64& rng) override {
    const Observation obs = apply_observation_noise(build_observation(w, episode_.position_scale), episode_.sigma_pos,
                                                    episode_.sigma_ang, rng, episode_.position_scale);
    const rl::Action a = rl::actor_forward(*actor_, obs);
    if (kind_ == rl::PolicyKind::kVelocity) {
      return {rl::e2e_action_decode(a, episode_.robot.v_max, episode_.robot.omega_max), std::nullopt};
    }
    const rl::Execution ex = rl::execute_goal(w, rl::goal_action_decode(a, goal_scale_), executor_);
    return {ex.command, ex.goal};
  }

 private:
  std::string name_;
  std::shared_ptr<const rl::Mlp> actor_;
  rl::PolicyKind kind_;
  EpisodeConfig episode_;
  rl::ExecutorConfig executor_;
  double goal_scale_;
};

// Uniform random goal in the policy's action box, executed by the planner.
class RandomGoalController : public Controller {
 public:
  explicit RandomGoalController(const Config& cfg)
      : executor_(cfg.train.env.executor), goal_scale_(cfg.train.env.goal_scale) {}

  std::string name() const override { return "random"; }

  ControlOutput act(const WorldState& w, std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a0 = u(rng);
    const rl::Action a{a0, u(rng)};
    const rl::Execution ex = rl::execute_goal(w, rl::goal_action_decode(a, goal_scale_), executor_);
    return {ex.command, ex.goal};
  }

 private:
  rl::ExecutorConfig executor_;
  double goal_scale_;
};

class HcAdapter : public Controller {
 public:
  explicit HcAdapter(const Config& cfg) : hc_(cfg.hc, cfg.planner), episode_(cfg.episode) {}

  std::string name() const override { return "HC"; }
  void reset() override { hc_.reset(); }

  ControlOutput act(const WorldState& w, std::mt19937_64& rng) override {
    std::normal_distribution<double> n01(0.0, 1.0);
    Pose m = w.human;
    m.x += episode_.sigma_pos * n01(rng);
    m.y += episode_.sigma_pos * n01(rng);
    m.phi = wrap_angle(m.phi + episode_.sigma_ang * n01(rng));
    const HcOutput out = hc_.hc_step(m, w.robot);
    return {out.command, out.goal};
  }

 private:
  HcController hc_;
  EpisodeConfig episode_;
};

// Builds controllers by name; policy checkpoints are loaded once and shared.
class ControllerFactory {
 public:
  explicit ControllerFactory(Config cfg) : cfg_(std::move(cfg)) {}

  const Config& config() const { return cfg_; }

  // Installs an in-memory actor instead of loading a checkpoint file.
  void set_policy(const std::string& name, std::shared_ptr<const rl::Mlp> actor) {
    if (name != "LBGP" && name != "E2E") throw std::invalid_argument("set_policy: LBGP or E2E only");
    (name == "E2E" ? e2e_ : lbgp_) = std::move(actor);
  }

  // Constructs each named controller once so checkpoint errors surface early
  // and later calls to make() do not touch the file system.
  void preload(const std::vector<std::string>& names) {
    for (const auto& n : names) make(n);
  }

  std::unique_ptr<Controller> make(const std::string& name) {
    if (name == "HC") return std::make_unique<HcAdapter>(cfg_);
    if (name == "random") return std::make_unique<RandomGoalController>(cfg_);
    if (name == "noop") return std::make_unique<NoopController>();
    if (name == "LBGP") {
      const auto actor = policy(lbgp_, cfg_.eval.lbgp_checkpoint, rl::PolicyKind::kGoal);
      return std::make_unique<PolicyController>("LBGP", actor, rl::PolicyKind::kGoal, cfg_);
    }
    if (name == "E2E") {
      const auto actor = policy(e2e_, cfg_.eval.e2e_checkpoint, rl::PolicyKind::kVelocity);
      return std::make_unique<PolicyController>("E2E", actor, rl::PolicyKind::kVelocity, cfg_);
    }
    throw std::invalid_argument(fmt::format("unknown controller '{}' (LBGP, HC, E2E, random, noop)", name));
  }

 private:
  static std::shared_ptr<const rl::Mlp> policy(std::shared_ptr<const rl::Mlp>& slot, const std::string& path,
                                               rl::PolicyKind kind) {
    if (slot) return slot;
    if (path.empty()) {
      throw rl::CheckpointError(fmt::format("no checkpoint configured for the {} policy", rl::to_string(kind)));
    }
    const rl::Checkpoint c = rl::load_checkpoint(path);
    if (c.kind != kind) {
      throw rl::CheckpointError(fmt::format("{}: expected a {} policy, found {}", path, rl::to_string(kind),
                                            rl::to_string(c.kind)));
    }
    slot = std::make_shared<const rl::Mlp>(c.actor);
    return slot;
  }

  Config cfg_;
  std::shared_ptr<const rl::Mlp> lbgp_, e2e_;
};

}  // namespace follow_ahead

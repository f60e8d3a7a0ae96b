#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "follow_ahead/baseline_hc.hpp"
#include "follow_ahead/human_motion.hpp"
#include "follow_ahead/planner_teb.hpp"
#include "follow_ahead/rl/trainer.hpp"
#include "follow_ahead/shield.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

#ifndef FOLLOW_AHEAD_DATA_DIR
#define FOLLOW_AHEAD_DATA_DIR "data"
#endif

// Parameters of the scripted evaluation paths.
struct ScriptParams {
  double straight_speed = 0.6;
  double turning_speed = 0.3;
  double turning_omega = 0.3;
  double field_straight_speed = 0.6;
  double field_straight_length = 7.0;
  double s_radius = 1.5;
  double s_speed = 0.4;
  double u_leg = 3.0;
  double u_radius = 1.0;
  double u_speed = 0.4;
};

// Constant step horizon per scenario family.
struct Horizons {
  int straight = 50;
  int turning = 50;
  int trajectory = 100;
  int field_straight = 60;
  int s_shape = 120;
  int u_turn = 115;
};

struct EvalConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double gamma = 0.99;  // discount for the discounted reward column
  int threads = 0;      // 0: hardware concurrency
  std::vector<std::string> controllers{"LBGP", "HC", "E2E", "random"};
  std::vector<std::string> scenarios;  // empty: whole suite
  std::string lbgp_checkpoint;
  std::string e2e_checkpoint;
  std::string trajectory_dir = FOLLOW_AHEAD_DATA_DIR "/eval_trajectories";
  ScriptParams scripts;
  Horizons horizons;
};

struct AblationConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  long long total_steps = 20000;
  std::array<long long, 3> budgets{4000, 6000, 8000};  // curriculum budgets for the reduced run
  long long grid = 1000;  // step spacing of the cross-seed aggregate curve
};

struct BridgeConfig {
  unsigned short port = 8765;
  double frame_period = 0.2;  // wall-clock seconds per simulated step
  std::string controller = "HC";
  double start_distance = 1.5;
  std::string record_dir = FOLLOW_AHEAD_DATA_DIR "/trajectories";
};

struct Config {
  EpisodeConfig episode;
  PlannerConfig planner;
  ShieldConfig shield;
  HcConfig hc;
  TrackerConfig tracker;
  rl::TrainConfig train;
  EvalConfig eval;
  AblationConfig ablation;
  BridgeConfig bridge;
  std::string library_dir = FOLLOW_AHEAD_DATA_DIR "/trajectories";
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RobotLimits, v_min, v_max, omega_max, dv_max, domega_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PersonLimits, v_max, omega_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EpisodeConfig, dt, max_steps, sigma_pos, sigma_ang, robot, person,
                                                spawn_min, spawn_max, position_scale)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PlannerConfig, w_time, w_obstacle, w_velocity, w_acceleration,
                                                w_nonholonomic, w_arrival, clearance, inflation, detour_offset,
                                                max_iterations, step_size, rel_tolerance, band_poses, band_duration,
                                                dt_min, dt_max, v_max, omega_max, acc_max, alpha_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ShieldConfig, clearance, margin, lookahead_steps, v_resolution,
                                                omega_resolution, limits)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PidGains, kp, ki, kd)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrackerConfig, heading, speed_kp, cruise_speed, advance_radius, limits)

inline void to_json(nlohmann::json& j, const EkfConfig& c) {
  j = {{"q_rate", std::vector<double>(c.q_rate.data(), c.q_rate.data() + 5)},
       {"sigma_pos", c.sigma_pos},
       {"sigma_ang", c.sigma_ang},
       {"init_sigma_v", c.init_sigma_v},
       {"init_sigma_omega", c.init_sigma_omega}};
}
inline void from_json(const nlohmann::json& j, EkfConfig& c) {
  if (j.contains("q_rate")) {
    const auto q = j.at("q_rate").get<std::vector<double>>();
    if (q.size() != 5) throw std::invalid_argument("ekf.q_rate needs 5 entries");
    for (int i = 0; i < 5; ++i) c.q_rate(i) = q[i];
  }
  c.sigma_pos = j.value("sigma_pos", c.sigma_pos);
  c.sigma_ang = j.value("sigma_ang", c.sigma_ang);
  c.init_sigma_v = j.value("init_sigma_v", c.init_sigma_v);
  c.init_sigma_omega = j.value("init_sigma_omega", c.init_sigma_omega);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(HcConfig, ekf, desired_distance, horizon, dt, shield, shield_cfg)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScriptParams, straight_speed, turning_speed, turning_omega,
                                                field_straight_speed, field_straight_length, s_radius, s_speed,
                                                u_leg, u_radius, u_speed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Horizons, straight, turning, trajectory, field_straight, s_shape,
                                                u_turn)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvalConfig, seeds, gamma, threads, controllers, scenarios,
                                                lbgp_checkpoint, e2e_checkpoint, trajectory_dir, scripts, horizons)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AblationConfig, seeds, total_steps, budgets, grid)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BridgeConfig, port, frame_period, controller, start_distance,
                                                record_dir)

namespace rl {

NLOHMANN_JSON_SERIALIZE_ENUM(PolicyKind, {{PolicyKind::kGoal, "goal"}, {PolicyKind::kVelocity, "velocity"}})
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Support, v_min, v_max, atoms)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AgentConfig, actor_hidden, critic_hidden, action_size, support, gamma,
                                                n_step, batch_size, buffer_capacity, tau, actor_lr, critic_lr,
                                                grad_clip)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExecutorConfig, use_shield, period)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EnvConfig, kind, goal_scale, observation_noise)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CurriculumConfig, thresholds, budgets, window)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, agent, env, curriculum, use_curriculum, start_level,
                                                max_level, fixed_level, explorers, exploiter, total_steps, min_replay,
                                                updates_per_step, sigma_start, sigma_end, sigma_decay_steps,
                                                threaded, publish_every, seed)

}  // namespace rl

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Config, episode, planner, shield, hc, tracker, train, eval, ablation,
                                                bridge, library_dir)

// The episode, planner, shield and tracker sections are the single source
// for the copies nested inside the training and HC configs.
inline void propagate(Config& c) {
  c.train.env.episode = c.episode;
  c.train.env.executor.planner = c.planner;
  c.train.env.executor.shield = c.shield;
  c.train.env.executor.shield.limits = c.episode.robot;
  c.train.env.tracker = c.tracker;
  c.shield.limits = c.episode.robot;
  c.hc.dt = c.episode.dt;
  c.hc.shield_cfg = c.shield;
  c.train.env.executor.period = c.episode.dt;
}

inline void validate(const Config& c) {
  c.episode.validate();
  c.planner.validate();
  c.train.validate();
  if (c.eval.seeds.empty()) throw std::invalid_argument("config: eval.seeds is empty");
  if (!(c.eval.gamma > 0.0 && c.eval.gamma <= 1.0)) throw std::invalid_argument("config: eval.gamma outside (0, 1]");
  if (!(c.bridge.frame_period > 0.0)) throw std::invalid_argument("config: bridge.frame_period must be positive");
}

inline Config config_from_json(const nlohmann::json& j) {
  Config c = j.get<Config>();
  propagate(c);
  validate(c);
  return c;
}

inline Config default_config() {
  Config c;
  propagate(c);
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

inline nlohmann::json config_to_json(const Config& c) { return c; }

}  // namespace follow_ahead

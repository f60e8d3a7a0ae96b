#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "follow_ahead/rl/checkpoint.hpp"
#include "follow_ahead/rl/curriculum.hpp"
#include "follow_ahead/rl/d4pg.hpp"
#include "follow_ahead/rl/env.hpp"
#include "follow_ahead/rl/replay.hpp"

namespace follow_ahead::rl {

struct TrainConfig {
  AgentConfig agent;
  EnvConfig env;
  CurriculumConfig curriculum;
  bool use_curriculum = true;
  int start_level = 1;
  int max_level = 4;    // curriculum never goes past this
  int fixed_level = 4;  // level used throughout when use_curriculum is false
  int explorers = 3;
  bool exploiter = true;
  long long total_steps = 100000;  // env steps over all workers
  std::size_t min_replay = 1000;
  double updates_per_step = 0.25;
  double sigma_start = 0.2;
  double sigma_end = 0.05;
  long long sigma_decay_steps = 0;  // 0: decay over total_steps
  bool threaded = false;
  int publish_every = 20;  // learner updates between policy snapshots (threaded mode)
  std::uint64_t seed = 1;

  void validate() const {
    agent.validate();
    if (explorers < 0 || (explorers == 0 && !exploiter)) throw std::invalid_argument("TrainConfig: no workers");
    if (start_level < 1 || start_level > 4 || max_level < 1 || max_level > 4 || fixed_level < 1 || fixed_level > 4) {
      throw std::invalid_argument("TrainConfig: levels must be in 1..4");
    }
    if (total_steps <= 0) throw std::invalid_argument("TrainConfig: total_steps must be positive");
    if (updates_per_step < 0.0) throw std::invalid_argument("TrainConfig: updates_per_step must be >= 0");
  }
};

// One exploiter-curve sample, taken when an exploiter episode ends.
struct CurvePoint {
  long long step = 0;
  double reward = 0.0;  // moving average of exploiter episode rewards
  double std = 0.0;     // std over the same window
  double episode_reward = 0.0;
  int level = 1;
};

struct TrainResult {
  Agent agent;
  std::vector<CurvePoint> curve;
  std::vector<double> critic_losses;  // one per learner update
  long long steps = 0;
  int level = 1;
  std::string rng_state;
};

inline double exploration_sigma(const TrainConfig& cfg, long long step) {
  const long long span = cfg.sigma_decay_steps > 0 ? cfg.sigma_decay_steps : cfg.total_steps;
  const double f = std::clamp(static_cast<double>(step) / static_cast<double>(span), 0.0, 1.0);
  return cfg.sigma_start + f * (cfg.sigma_end - cfg.sigma_start);
}

// Per-worker seeds drawn from one seed sequence so workers are independent
// and the whole run is reproducible from TrainConfig::seed.
inline std::vector<std::uint64_t> derive_seeds(std::uint64_t seed, std::size_t n) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::vector<std::uint32_t> raw(2 * n);
  seq.generate(raw.begin(), raw.end());
  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (static_cast<std::uint64_t>(raw[2 * i]) << 32) | raw[2 * i + 1];
  return out;
}

class Worker {
 public:
  Worker(const EnvConfig& env, const std::vector<Trajectory>* library, std::uint64_t seed, bool explorer,
         const AgentConfig& agent)
      : env_(env, library, seed), acc_(agent.n_step, agent.gamma), noise_rng_(seed ^ 0x9e3779b97f4a7c15ull),
        explorer_(explorer), action_size_(agent.action_size) {}

  bool explorer() const { return explorer_; }

  // Advances one env step. Returns the finished episode's reward when the
  // step ended an episode.
  template <class Sink>
  std::optional<double> step(const Mlp& actor, double sigma, int level, Sink&& sink) {
    if (fresh_) {
      obs_ = env_.reset(level);
      acc_.reset();
      ep_reward_ = 0.0;
      fresh_ = false;
    }
    Action a = actor_forward(actor, obs_);
    if (explorer_) {
      std::normal_distribution<double> n(0.0, sigma);
      for (int i = 0; i < action_size_; ++i) a[i] = std::clamp(a[i] + n(noise_rng_), -1.0, 1.0);
    }
    const EnvStep s = env_.step(a);
    const bool terminal = s.result.termination == Termination::kTooClose || s.result.termination == Termination::kTooFar;
    const bool truncated = s.result.termination == Termination::kHorizon;
    acc_.push(obs_, a, s.result.reward.total, s.obs, terminal, truncated, sink);
    ep_reward_ += s.result.reward.total;
    obs_ = s.obs;
    if (terminal || truncated) {
      fresh_ = true;
      return ep_reward_;
    }
    return std::nullopt;
  }

 private:
  FollowEnv env_;
  NStepAccumulator acc_;
  std::mt19937_64 noise_rng_;
  bool explorer_;
  int action_size_;
  Observation obs_{};
  double ep_reward_ = 0.0;
  bool fresh_ = true;
};

class Trainer {
 public:
  using Progress = std::function<void(const CurvePoint&)>;

  Trainer(TrainConfig cfg, const std::vector<Trajectory>* library)
      : cfg_(std::move(cfg)), library_(library), buffer_(cfg_.agent.buffer_capacity) {
    cfg_.validate();
    const int n = cfg_.explorers + (cfg_.exploiter ? 1 : 0);
    const auto seeds = derive_seeds(cfg_.seed, static_cast<std::size_t>(n + 2));
    learner_rng_.seed(seeds[0]);
    std::mt19937_64 init(seeds[1]);
    agent_ = make_agent(cfg_.agent, init);
    workers_.reserve(n);
    for (int i = 0; i < n; ++i) workers_.emplace_back(cfg_.env, library_, seeds[2 + i], i < cfg_.explorers, cfg_.agent);
    curriculum_.level = cfg_.use_curriculum ? std::min(cfg_.start_level, cfg_.max_level) : cfg_.fixed_level;
  }

  void on_progress(Progress p) { progress_ = std::move(p); }

  TrainResult run() { return cfg_.threaded ? run_threaded() : run_serial(); }

  Checkpoint checkpoint(const TrainResult& r) const {
    Checkpoint c;
    c.kind = cfg_.env.kind;
    c.step = r.steps;
    c.updates = r.agent.updates;
    c.level = r.level;
    c.support = cfg_.agent.support;
    c.rng_state = r.rng_state;
    c.actor = r.agent.actor;
    c.critic = r.agent.critic;
    c.actor_target = r.agent.actor_target;
    c.critic_target = r.agent.critic_target;
    return c;
  }

 private:
  void finish_episode(double reward, long long step, TrainResult& out) {
    curriculum_.record_episode(reward, cfg_.curriculum.window);
    CurvePoint p;
    p.step = step;
    p.episode_reward = reward;
    p.level = curriculum_.level;
    p.reward = curriculum_.moving_average();
    double var = 0.0;
    for (double r : curriculum_.recent) var += (r - p.reward) * (r - p.reward);
    p.std = curriculum_.recent.empty() ? 0.0 : std::sqrt(var / curriculum_.recent.size());
    out.curve.push_back(p);
    if (progress_) progress_(p);
    maybe_promote();
  }

  void maybe_promote() {
    if (!cfg_.use_curriculum || curriculum_.level >= cfg_.max_level) return;
    curriculum_update(curriculum_, cfg_.curriculum);
  }

  int current_level() const { return curriculum_.level; }

  bool learn_once(TrainResult& out) {
    if (buffer_.size() < std::max<std::size_t>(cfg_.min_replay, cfg_.agent.batch_size)) return false;
    const auto batch = buffer_.sample(cfg_.agent.batch_size, learner_rng_);
    const TrainStats st = train_step(agent_, batch, cfg_.agent);
    out.critic_losses.push_back(st.critic_loss);
    return true;
  }

  TrainResult finalize(TrainResult out, long long steps) {
    out.steps = steps;
    out.level = curriculum_.level;
    std::ostringstream rs;
    rs << learner_rng_;
    out.rng_state = rs.str();
    out.agent = std::move(agent_);
    return out;
  }

  TrainResult run_serial() {
    TrainResult out;
    long long steps = 0;
    double due = 0.0;
    auto sink = [&](const Transition& t) { buffer_.add(t); };
    while (steps < cfg_.total_steps) {
      for (auto& w : workers_) {
        if (steps >= cfg_.total_steps) break;
        const auto done = w.step(agent_.actor, exploration_sigma(cfg_, steps), current_level(), sink);
        ++steps;
        ++curriculum_.steps_at_level;
        if (done && !w.explorer()) finish_episode(*done, steps, out);
        if (cfg_.use_curriculum && curriculum_.level < cfg_.max_level &&
            curriculum_.steps_at_level >= cfg_.curriculum.budgets[curriculum_.level - 1]) {
          maybe_promote();
        }
        due += cfg_.updates_per_step;
      }
      while (due >= 1.0) {
        due -= 1.0;
        if (!learn_once(out)) {
          due = 0.0;
          break;
        }
      }
    }
    return finalize(std::move(out), steps);
  }

  // Collectors each own a worker and act with the most recently published
  // actor; the learner (this thread) trains and republishes.
  TrainResult run_threaded() {
    TrainResult out;
    std::atomic<long long> steps{0};
    std::atomic<bool> stop{false};
    std::mutex snap_mu, stats_mu;
    auto snapshot = std::make_shared<const Mlp>(agent_.actor);
    auto sink = [&](const Transition& t) { buffer_.add(t); };

    std::vector<std::thread> threads;
    for (auto& w : workers_) {
      threads.emplace_back([&, wp = &w] {
        std::shared_ptr<const Mlp> actor;
        while (!stop.load()) {
          const long long k = steps.fetch_add(1);
          if (k >= cfg_.total_steps) break;
          {
            std::lock_guard lock(snap_mu);
            actor = snapshot;
          }
          int level;
          {
            std::lock_guard lock(stats_mu);
            level = curriculum_.level;
            ++curriculum_.steps_at_level;
          }
          const auto done = wp->step(*actor, exploration_sigma(cfg_, k), level, sink);
          std::lock_guard lock(stats_mu);
          if (done && !wp->explorer()) finish_episode(*done, k + 1, out);
          if (cfg_.use_curriculum && curriculum_.level < cfg_.max_level &&
              curriculum_.steps_at_level >= cfg_.curriculum.budgets[curriculum_.level - 1]) {
            maybe_promote();
          }
        }
      });
    }

    long long since_publish = 0;
    while (true) {
      const long long k = std::min(steps.load(), cfg_.total_steps);
      const bool collecting = k < cfg_.total_steps;
      const auto target = static_cast<long long>(cfg_.updates_per_step * static_cast<double>(k));
      bool trained = false;
      if (agent_.updates < target) {
        TrainResult tmp;
        trained = learn_once(tmp);
        if (trained) {
          std::lock_guard lock(stats_mu);
          out.critic_losses.push_back(tmp.critic_losses.back());
        }
      }
      if (trained && ++since_publish >= cfg_.publish_every) {
        since_publish = 0;
        auto fresh = std::make_shared<const Mlp>(agent_.actor);
        std::lock_guard lock(snap_mu);
        snapshot = std::move(fresh);
      }
      if (!collecting && !trained) break;
      if (!trained) std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
    stop = true;
    for (auto& t : threads) t.join();
    return finalize(std::move(out), std::min(steps.load(), cfg_.total_steps));
  }

  TrainConfig cfg_;
  const std::vector<Trajectory>* library_;
  ReplayBuffer buffer_;
  Agent agent_;
  std::mt19937_64 learner_rng_;
  std::vector<Worker> workers_;
  CurriculumState curriculum_;
  Progress progress_;
};

}  // namespace follow_ahead::rl

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "follow_ahead/eval/controllers.hpp"
#include "follow_ahead/eval/scenarios.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

inline std::uint32_t fnv1a(const std::string& s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) h = (h ^ c) * 16777619u;
  return h;
}

// Noise stream for one episode: fixed by the seed and the scenario, so
// every controller faces the same person path and sensing noise source.
inline std::mt19937_64 episode_rng(std::uint64_t seed, const std::string& scenario) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), fnv1a(scenario)};
  return std::mt19937_64(seq);
}

// One closed-loop episode. The person plan is never shown to the controller.
inline EpisodeLog run_episode(const Scenario& sc, Controller& ctl, std::uint64_t seed, const Config& cfg) {
  EpisodeConfig ep = cfg.episode;
  ep.max_steps = sc.horizon;
  WorldState w = scenario_world(sc);
  MotionPlan person = scenario_motion(sc, cfg.eval.scripts, cfg.tracker);
  auto rng = episode_rng(seed, sc.name);
  ctl.reset();
  EpisodeLog log;
  log.meta = {{"scenario", sc.name},
              {"controller", ctl.name()},
              {"seed", std::to_string(seed)},
              {"horizon", std::to_string(sc.horizon)}};
  while (true) {
    const ControlOutput out = ctl.act(w, rng);
    const MotionCommand h = person.next(w.human, ep.dt);
    const StepResult r = env_step(w, out.command, h, ep);
    log.records.push_back(make_record(w, r));
    if (r.terminal()) break;
  }
  return log;
}

inline std::vector<EpisodeLog> run_scenario(const Scenario& sc, ControllerFactory& factory, const std::string& controller,
                                            const std::vector<std::uint64_t>& seeds) {
  std::vector<EpisodeLog> logs;
  for (const auto seed : seeds) {
    auto ctl = factory.make(controller);
    logs.push_back(run_episode(sc, *ctl, seed, factory.config()));
  }
  return logs;
}

// Every (scenario, controller, seed) episode, ordered scenario-major then
// controller then seed. Episodes run in parallel; results do not depend on
// the thread count.
inline std::vector<EpisodeLog> run_suite(const std::vector<Scenario>& scenarios, ControllerFactory& factory,
                                         const std::vector<std::string>& controllers,
                                         const std::vector<std::uint64_t>& seeds, int threads = 0) {
  factory.preload(controllers);
  struct Job {
    const Scenario* sc;
    const std::string* controller;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& sc : scenarios) {
    for (const auto& c : controllers) {
      for (const auto s : seeds) jobs.push_back({&sc, &c, s});
    }
  }
  std::vector<EpisodeLog> logs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        auto ctl = factory.make(*jobs[i].controller);
        logs[i] = run_episode(*jobs[i].sc, *ctl, jobs[i].seed, factory.config());
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const int n = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min<int>(n, static_cast<int>(jobs.size())); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return logs;
}

}  // namespace follow_ahead

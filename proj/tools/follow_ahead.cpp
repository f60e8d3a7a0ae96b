#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "follow_ahead/eval/ablation.hpp"
#include "follow_ahead/eval/bridge.hpp"
#include "follow_ahead/eval/config.hpp"
#include "follow_ahead/eval/metrics.hpp"
#include "follow_ahead/eval/runner.hpp"
#include "follow_ahead/eval/scenarios.hpp"
#include "follow_ahead/recording.hpp"
#include "follow_ahead/rl/checkpoint.hpp"
#include "follow_ahead/rl/trainer.hpp"

namespace fs = std::filesystem;
using namespace follow_ahead;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

Config load(const Globals& g) {
  Config c = g.config.empty() ? default_config() : load_config(g.config);
  if (g.seed) {
    c.train.seed = *g.seed;
    for (std::size_t i = 0; i < c.eval.seeds.size(); ++i) c.eval.seeds[i] = *g.seed + i;
    for (std::size_t i = 0; i < c.ablation.seeds.size(); ++i) c.ablation.seeds[i] = *g.seed + i;
  }
  return c;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

struct TrainArgs {
  std::string kind = "goal";
  long long steps = 0;
  int max_level = 0;
  bool no_curriculum = false;
  bool threaded = false;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  Config c = load(g);
  rl::TrainConfig tc = c.train;
  tc.env.kind = a.kind == "velocity" ? rl::PolicyKind::kVelocity : rl::PolicyKind::kGoal;
  if (a.steps > 0) tc.total_steps = a.steps;
  if (a.max_level > 0) tc.max_level = a.max_level;
  if (a.no_curriculum) tc.use_curriculum = false;
  if (a.threaded) tc.threaded = true;
  const bool needs_library = (tc.use_curriculum ? tc.max_level : tc.fixed_level) == 4;
  const std::vector<Trajectory> library = needs_library ? load_trajectory_library(c.library_dir)
                                                        : std::vector<Trajectory>{};
  rl::Trainer trainer(tc, &library);
  const auto t0 = std::chrono::steady_clock::now();
  long long last = -1;
  trainer.on_progress([&](const rl::CurvePoint& p) {
    if (last >= 0 && p.step - last < 5000) return;
    last = p.step;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("step {:>8}  level {}  reward {:8.2f} +- {:6.2f}  {:6.0f}s\n", p.step, p.level, p.reward, p.std, secs);
    std::fflush(stdout);
  });
  const rl::TrainResult r = trainer.run();
  const fs::path out(g.out);
  fs::create_directories(out);
  rl::save_checkpoint(trainer.checkpoint(r), out / "checkpoint.bin");
  write_curve(out / "curve.csv", r.curve);
  Config used = c;
  used.train = tc;
  write_json(out / "config.json", config_to_json(used));
  fmt::print("{} steps, {} updates, level {}; wrote {}\n", r.steps, r.agent.updates, r.level,
             (out / "checkpoint.bin").string());
  return 0;
}

struct EvalArgs {
  std::string lbgp, e2e;
  std::vector<std::string> controllers, scenarios;
  int threads = -1;
  bool no_logs = false;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
  Config c = load(g);
  if (!a.lbgp.empty()) c.eval.lbgp_checkpoint = a.lbgp;
  if (!a.e2e.empty()) c.eval.e2e_checkpoint = a.e2e;
  if (!a.controllers.empty()) c.eval.controllers = a.controllers;
  if (!a.scenarios.empty()) c.eval.scenarios = a.scenarios;
  if (a.threads >= 0) c.eval.threads = a.threads;
  const auto suite = scenario_suite(c.eval);
  ControllerFactory factory(c);
  const auto logs = run_suite(suite, factory, c.eval.controllers, c.eval.seeds, c.eval.threads);
  const fs::path out(g.out);
  if (!a.no_logs) {
    for (const auto& l : logs) save_episode_log(l, out / "logs" / log_file_name(l));
  }
  const auto rows = metrics_by_pair(logs, c.eval.gamma);
  emit_table(out / "metrics.csv", rows);
  emit_table(std::cout, rows);
  return 0;
}

int cmd_ablate(const Globals& g, long long steps) {
  Config c = load(g);
  if (steps > 0) {
    const double f = static_cast<double>(steps) / static_cast<double>(c.ablation.total_steps);
    for (auto& b : c.ablation.budgets) b = static_cast<long long>(b * f);
    c.ablation.total_steps = steps;
  }
  const auto res = ablation_run(c, g.out, [](const SeedCurve& s) {
    fmt::print("{:<20} seed {:<4} points {:<5} final {:8.2f}\n", s.variant, s.seed, s.curve.size(), s.final_reward());
    std::fflush(stdout);
  });
  fmt::print("wrote {} curve files to {}\n", res.files.size(), g.out);
  return 0;
}

int cmd_replay(const Globals& g, const std::vector<std::string>& paths, const std::string& table) {
  Config c = load(g);
  std::vector<EpisodeLog> logs;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.path().extension() == ".csv") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) logs.push_back(load_episode_log(f));
    } else {
      logs.push_back(load_episode_log(p));
    }
  }
  const auto rows = metrics_by_pair(logs, c.eval.gamma);
  if (!table.empty()) emit_table(table, rows);
  emit_table(std::cout, rows);
  return 0;
}

int cmd_record(const Globals& g, const std::string& scripted, double duration, const std::string& dir) {
  if (scripted.empty()) {
    throw std::invalid_argument("interactive recording runs through `serve`; use --scripted NAME for a scripted drive");
  }
  const Config c = load(g);
  const fs::path d = dir.empty() ? fs::path(c.library_dir) : fs::path(dir);
  const fs::path path = d / (scripted + ".csv");
  if (fs::exists(path)) throw std::invalid_argument(fmt::format("{} already exists", path.string()));
  fs::create_directories(d);
  const Trajectory t = scripted_drive(scripted, g.seed.value_or(1), duration, c.episode.dt);
  save_trajectory(t, path);
  fmt::print("wrote {} ({} points, {:.2f} m)\n", path.string(), t.points.size(), t.length());
  return 0;
}

int cmd_serve(const Globals& g, unsigned short port, const std::string& address, const std::string& controller,
              const std::string& lbgp, const std::string& e2e) {
  Config c = load(g);
  if (port != 0) c.bridge.port = port;
  if (!controller.empty()) c.bridge.controller = controller;
  if (!lbgp.empty()) c.eval.lbgp_checkpoint = lbgp;
  if (!e2e.empty()) c.eval.e2e_checkpoint = e2e;
  serve_bridge(c.bridge.port, c, address);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Follow-ahead robot navigation: training, evaluation and live bridge"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file (defaults for every omitted key)");
  app.add_option("--seed", g.seed, "base seed; overrides train.seed and shifts eval/ablation seed lists");
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a policy and write checkpoint.bin and curve.csv");
  train->add_option("--kind", ta.kind, "goal (LBGP) or velocity (E2E)")
      ->check(CLI::IsMember({"goal", "velocity"}))
      ->capture_default_str();
  train->add_option("--steps", ta.steps, "total env steps (overrides config)");
  train->add_option("--max-level", ta.max_level, "highest curriculum level")->check(CLI::Range(1, 4));
  train->add_flag("--no-curriculum", ta.no_curriculum, "train on train.fixed_level from step 0");
  train->add_flag("--threaded", ta.threaded, "one thread per worker plus the learner");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "run the scenario suite and write metrics.csv and episode logs");
  eval->add_option("--lbgp", ea.lbgp, "LBGP checkpoint");
  eval->add_option("--e2e", ea.e2e, "E2E checkpoint");
  eval->add_option("--controllers", ea.controllers, "subset of LBGP HC E2E random noop");
  eval->add_option("--scenarios", ea.scenarios, "scenario names or families (e.g. turning)");
  eval->add_option("--threads", ea.threads, "worker threads, 0 = all cores");
  eval->add_flag("--no-logs", ea.no_logs, "skip writing per-episode logs");

  long long ablate_steps = 0;
  auto* ablate = app.add_subcommand("ablate", "learning curves for LBGP, LBGP without curriculum and E2E");
  ablate->add_option("--steps", ablate_steps, "env steps per run; curriculum budgets scale along");

  std::vector<std::string> replay_paths;
  std::string replay_table;
  auto* replay = app.add_subcommand("replay", "recompute metrics from episode logs");
  replay->add_option("logs", replay_paths, "log files or directories")->required();
  replay->add_option("--table", replay_table, "also write the table to this file");

  std::string scripted, record_dir;
  double duration = 40.0;
  auto* record = app.add_subcommand("record", "write a trajectory file for the level-4 library");
  record->add_option("--scripted", scripted, "name of a scripted keyboard-style drive");
  record->add_option("--duration", duration, "seconds")->capture_default_str();
  record->add_option("--dir", record_dir, "target directory (default: library_dir)");

  unsigned short port = 0;
  std::string address = "127.0.0.1", controller, lbgp, e2e;
  auto* serve = app.add_subcommand("serve", "websocket bridge for the teleoperation client");
  serve->add_option("--port", port, "TCP port (default: bridge.port)");
  serve->add_option("--address", address, "bind address")->capture_default_str();
  serve->add_option("--controller", controller, "initial controller");
  serve->add_option("--lbgp", lbgp, "LBGP checkpoint");
  serve->add_option("--e2e", e2e, "E2E checkpoint");

  auto* config = app.add_subcommand("config", "print the effective configuration");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(g, ta);
    if (*eval) return cmd_eval(g, ea);
    if (*ablate) return cmd_ablate(g, ablate_steps);
    if (*replay) return cmd_replay(g, replay_paths, replay_table);
    if (*record) return cmd_record(g, scripted, duration, record_dir);
    if (*serve) return cmd_serve(g, port, address, controller, lbgp, e2e);
    if (*config) {
      std::cout << config_to_json(load(g)).dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}

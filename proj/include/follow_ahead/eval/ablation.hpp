#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/eval/config.hpp"
#include "follow_ahead/human_motion.hpp"
#include "follow_ahead/rl/checkpoint.hpp"
#include "follow_ahead/rl/trainer.hpp"

namespace follow_ahead {

struct AblationVariant {
  std::string name;
  rl::TrainConfig train;
};

struct SeedCurve {
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<rl::CurvePoint> curve;
  std::filesystem::path checkpoint;
  double final_reward() const { return curve.empty() ? 0.0 : curve.back().reward; }
};

// LBGP with the curriculum, LBGP on recorded trajectories from step 0, and
// the velocity-output policy with the curriculum. All share the budget.
inline std::vector<AblationVariant> ablation_variants(const Config& cfg) {
  rl::TrainConfig base = cfg.train;
  base.total_steps = cfg.ablation.total_steps;
  base.curriculum.budgets = cfg.ablation.budgets;
  base.start_level = 1;
  base.max_level = 4;
  base.threaded = false;

  AblationVariant lbgp{"lbgp", base};
  lbgp.train.use_curriculum = true;
  lbgp.train.env.kind = rl::PolicyKind::kGoal;

  AblationVariant flat{"lbgp_no_curriculum", base};
  flat.train.use_curriculum = false;
  flat.train.fixed_level = 4;
  flat.train.env.kind = rl::PolicyKind::kGoal;

  AblationVariant e2e{"e2e", base};
  e2e.train.use_curriculum = true;
  e2e.train.env.kind = rl::PolicyKind::kVelocity;
  return {lbgp, flat, e2e};
}

inline void write_curve(const std::filesystem::path& path, const std::vector<rl::CurvePoint>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,reward,std\n";
  for (const auto& p : curve) out << fmt::format("{},{:.6f},{:.6f}\n", p.step, p.reward, p.std);
}

inline std::vector<rl::CurvePoint> read_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("curve not found: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,reward,std") throw std::runtime_error(path.string() + ": bad header");
  std::vector<rl::CurvePoint> curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rl::CurvePoint p;
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> p.step >> c1 >> p.reward >> c2 >> p.std) || c1 != ',' || c2 != ',' || !(ss >> std::ws).eof()) {
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    }
    curve.push_back(p);
  }
  return curve;
}

// Cross-seed curve on a fixed step grid: each seed contributes its latest
// moving average at or before the grid step; std is across seeds.
inline std::vector<rl::CurvePoint> aggregate_curves(const std::vector<SeedCurve>& runs, long long grid,
                                                    long long total) {
  std::vector<rl::CurvePoint> out;
  for (long long s = grid; s <= total; s += grid) {
    std::vector<double> v;
    for (const auto& r : runs) {
      const rl::CurvePoint* last = nullptr;
      for (const auto& p : r.curve) {
        if (p.step > s) break;
        last = &p;
      }
      if (last) v.push_back(last->reward);
    }
    if (v.size() != runs.size() || v.empty()) continue;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    rl::CurvePoint p;
    p.step = s;
    p.reward = m;
    p.std = std::sqrt(var / static_cast<double>(v.size()));
    out.push_back(p);
  }
  return out;
}

struct AblationResult {
  std::vector<SeedCurve> runs;  // variant-major, then seed
  std::vector<std::filesystem::path> files;
};

// Trains every variant for every seed and writes
//   <out>/<variant>_seed<k>.csv   per-seed exploiter curve
//   <out>/<variant>_seed<k>.ckpt  final networks
//   <out>/<variant>_mean.csv      cross-seed mean and std on the grid
//   <out>/summary.csv             final moving average per run
template <class Progress>
AblationResult ablation_run(const Config& cfg, const std::filesystem::path& out_dir, Progress&& progress) {
  std::filesystem::create_directories(out_dir);
  const std::vector<Trajectory> library = load_trajectory_library(cfg.library_dir);
  AblationResult res;
  std::ofstream summary(out_dir / "summary.csv");
  summary << "variant,seed,points,final_reward\n";
  for (const auto& v : ablation_variants(cfg)) {
    std::vector<SeedCurve> runs;
    for (const auto seed : cfg.ablation.seeds) {
      rl::TrainConfig tc = v.train;
      tc.seed = seed;
      rl::Trainer trainer(tc, &library);
      const rl::TrainResult r = trainer.run();
      SeedCurve sc{v.name, seed, r.curve, out_dir / fmt::format("{}_seed{}.ckpt", v.name, seed)};
      rl::save_checkpoint(trainer.checkpoint(r), sc.checkpoint);
      const auto path = out_dir / fmt::format("{}_seed{}.csv", v.name, seed);
      write_curve(path, sc.curve);
      res.files.push_back(path);
      summary << fmt::format("{},{},{},{:.6f}\n", v.name, seed, sc.curve.size(), sc.final_reward());
      progress(sc);
      runs.push_back(std::move(sc));
    }
    const auto mean_path = out_dir / fmt::format("{}_mean.csv", v.name);
    write_curve(mean_path, aggregate_curves(runs, cfg.ablation.grid, cfg.ablation.total_steps));
    res.files.push_back(mean_path);
    res.runs.insert(res.runs.end(), runs.begin(), runs.end());
  }
  return res;
}

inline AblationResult ablation_run(const Config& cfg, const std::filesystem::path& out_dir) {
  return ablation_run(cfg, out_dir, [](const SeedCurve&) {});
}

}  // namespace follow_ahead

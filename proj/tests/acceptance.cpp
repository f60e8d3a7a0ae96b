// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "follow_ahead/baseline_hc.hpp"
#include "follow_ahead/eval/ablation.hpp"
#include "follow_ahead/eval/config.hpp"
#include "follow_ahead/eval/controllers.hpp"
#include "follow_ahead/eval/metrics.hpp"
#include "follow_ahead/eval/runner.hpp"
#include "follow_ahead/eval/scenarios.hpp"
#include "follow_ahead/geometry.hpp"
#include "follow_ahead/human_motion.hpp"
#include "follow_ahead/planner_teb.hpp"
#include "follow_ahead/reward.hpp"
#include "follow_ahead/rl/checkpoint.hpp"
#include "follow_ahead/rl/distribution.hpp"
#include "follow_ahead/rl/env.hpp"
#include "follow_ahead/rl/mlp.hpp"
#include "follow_ahead/rl/trainer.hpp"
#include "follow_ahead/sim.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace follow_ahead;
using namespace follow_ahead::rl;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Options {
  fs::path work = "acceptance_out";
  long long desk_steps = 100000;
  long long ablation_steps = 20000;
  std::string cli = FOLLOW_AHEAD_CLI;
};

struct Shared {
  fs::path lbgp_checkpoint;
  fs::path e2e_checkpoint;
  std::shared_ptr<const Mlp> lbgp_actor;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void check(const std::string& name, double limit_s, const std::function<Outcome()>& f) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = secs <= limit_s;
  const bool ok = o.ok && in_time;
  if (!ok) ++failures;
  fmt::print("{} {:<22} {:8.2f}s (limit {:.0f}s{})  {}\n", ok ? "PASS" : "FAIL", name, secs, limit_s,
             in_time ? "" : ", exceeded", o.detail);
  std::fflush(stdout);
}

// Angle difference folded into [0, pi].
double angle_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

Pose transform(const Pose& p, double tx, double ty, double th) {
  const double c = std::cos(th), s = std::sin(th);
  return Pose(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty, p.phi + th);
}

Outcome reward_oracle() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dd(0.0, 6.0), aa(-180.0, 180.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double d = i % 10 == 0 ? std::round(dd(rng) * 2.0) / 2.0 : dd(rng);
    const double a = i % 7 == 0 ? std::round(aa(rng)) : aa(rng);
    const double r = step_reward(d, a).total;
    if (!(r >= -1.0 && r <= 1.0)) return {false, fmt::format("R({}, {}) = {} outside [-1, 1]", d, a, r)};
    worst = std::max(worst, std::abs(r - oracle::reward(d, a)));
  }
  if (worst > 1e-12) return {false, fmt::format("max |R - oracle| = {:.3g}", worst)};
  double best = -2.0, second = -2.0, bd = 0.0, ba = 0.0;
  int at_best = 0;
  for (int i = 0; i <= 1200; ++i) {
    const double d = i / 200.0;
    for (int j = -720; j <= 720; ++j) {
      const double a = j / 4.0;
      const double r = step_reward(d, a).total;
      if (r < -1.0 || r > 1.0) return {false, fmt::format("grid R({}, {}) = {}", d, a, r)};
      if (r > best) {
        second = best;
        best = r, bd = d, ba = a, at_best = 1;
      } else if (r == best) {
        ++at_best;
      } else {
        second = std::max(second, r);
      }
    }
  }
  const bool ok = at_best == 1 && std::abs(best - 0.75) < 1e-15 && bd == 1.5 && ba == 0.0;
  return {ok, fmt::format("1e5 samples max err {:.2g}; grid max {:.4f} at D={} a={} (count {}, runner-up {:.4f})",
                          worst, best, bd, ba, at_best, second)};
}

Outcome transforms() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-20.0, 20.0), ang(-4.0, 4.0);
  double trip = 0.0, inv = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Pose s(u(rng), u(rng), ang(rng)), h(u(rng), u(rng), ang(rng));
    const RelativeState r = world_to_relative(s, h);
    const Pose back = relative_to_world(r, h);
    trip = std::max({trip, std::abs(back.x - s.x), std::abs(back.y - s.y), angle_gap(back.phi, s.phi)});
    const RelativeState r2 = world_to_relative(relative_to_world(RelativeState{s.x, s.y, s.phi}, h), h);
    trip = std::max({trip, std::abs(r2.x - s.x), std::abs(r2.y - s.y), angle_gap(r2.phi, s.phi)});

    const double tx = u(rng), ty = u(rng), th = ang(rng);
    const RelativeState m = world_to_relative(transform(s, tx, ty, th), transform(h, tx, ty, th));
    inv = std::max({inv, std::abs(m.x - r.x), std::abs(m.y - r.y), angle_gap(m.phi, r.phi)});
    inv = std::max(inv, std::abs(person_robot_distance(transform(s, tx, ty, th), transform(h, tx, ty, th)) -
                                 person_robot_distance(s, h)));
  }
  return {trip <= 1e-9 && inv <= 1e-9,
          fmt::format("1e4 poses, round trip err {:.2g}, frame invariance err {:.2g}", trip, inv)};
}

Outcome generators() {
  std::mt19937_64 rng(13);
  SmoothCurveMotion m = SmoothCurveMotion::sample(rng);
  double vl_lo = 1e9, vl_hi = -1e9, va_lo = 1e9, va_hi = -1e9;
  for (int i = 0; i < 100000; ++i) {
    const auto c = m.next(Pose(), 0.2);
    vl_lo = std::min(vl_lo, c.v), vl_hi = std::max(vl_hi, c.v);
    va_lo = std::min(va_lo, c.omega), va_hi = std::max(va_hi, c.omega);
  }
  const bool smooth_ok = vl_lo >= 0.0 && vl_hi <= 1.0 && va_lo >= -1.0 && va_hi <= 1.0;

  double radius_err = 0.0;
  for (int k = 0; k < 50; ++k) {
    CircleMotion c = CircleMotion::sample(rng);
    Pose p(0.0, 0.0, 0.0);
    const double R = c.radius();
    for (int i = 0; i < 300; ++i) {
      p = step_unicycle(p, c.next(p, 0.2), 0.2);
      radius_err = std::max(radius_err, std::abs(std::hypot(p.x, p.y - R) - R));
    }
  }

  EpisodeConfig ec;
  double d_lo = 1e9, d_hi = -1e9;
  for (int i = 0; i < 100000; ++i) {
    const WorldState w = spawn_world(ec, rng);
    const double d = person_robot_distance(w.robot, w.human);
    d_lo = std::min(d_lo, d), d_hi = std::max(d_hi, d);
  }
  const bool spawn_ok = d_lo >= 1.0 - 1e-12 && d_hi <= 2.5 + 1e-12;
  return {smooth_ok && radius_err <= 1e-6 && spawn_ok,
          fmt::format("V_l in [{:.3f}, {:.3f}], V_a in [{:.3f}, {:.3f}]; circle radius err {:.2g} m; "
                      "spawn D in [{:.4f}, {:.4f}]",
                      vl_lo, vl_hi, va_lo, va_hi, radius_err, d_lo, d_hi)};
}

std::vector<double*> net_params(Mlp& net) {
  std::vector<double*> p;
  for (auto& l : net.layers) {
    for (Eigen::Index i = 0; i < l.w.size(); ++i) p.push_back(l.w.data() + i);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) p.push_back(l.b.data() + i);
  }
  return p;
}

std::vector<double> net_flat(const Mlp& g) {
  std::vector<double> out;
  for (const auto& l : g.layers) {
    out.insert(out.end(), l.w.data(), l.w.data() + l.w.size());
    out.insert(out.end(), l.b.data(), l.b.data() + l.b.size());
  }
  return out;
}

// Largest central-difference mismatch, relative to the largest analytic entry.
template <class F>
double relative_fd_error(F&& f, const std::vector<double*>& p, const std::vector<double>& analytic) {
  const double h = 1e-6;
  double scale = 1e-8, worst = 0.0;
  for (double g : analytic) scale = std::max(scale, std::abs(g));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x0 = *p[i];
    *p[i] = x0 + h;
    const double fp = f();
    *p[i] = x0 - h;
    const double fm = f();
    *p[i] = x0;
    worst = std::max(worst, std::abs((fp - fm) / (2 * h) - analytic[i]) / scale);
  }
  return worst;
}

Band perturbed_band(std::mt19937_64& rng, const PlannerConfig& cfg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), len(0.5, 3.0);
  Pose robot(u(rng), u(rng), 3.0 * u(rng), u(rng), 2.0 * u(rng));
  const double L = len(rng), a = 3.0 * u(rng);
  Band b = initial_band(robot, {robot.x + L * std::cos(a), robot.y + L * std::sin(a), 3.0 * u(rng)}, cfg);
  for (std::size_t i = 1; i + 1 < b.poses.size(); ++i) {
    b.poses[i].x += 0.2 * u(rng);
    b.poses[i].y += 0.2 * u(rng);
    b.poses[i].theta += 0.8 * u(rng);
  }
  for (auto& dt : b.dts) dt = std::clamp(dt * (1.0 + 0.6 * u(rng)) - 0.05, cfg.dt_min, cfg.dt_max);
  return b;
}

Outcome gradients() {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> width(2, 8), depth(1, 3);
  double mlp_worst = 0.0;
  const int instances = 120;
  for (int k = 0; k < instances; ++k) {
    std::vector<int> sizes{width(rng)};
    const int d = depth(rng);
    for (int i = 0; i < d; ++i) sizes.push_back(width(rng));
    Mlp net = make_mlp(sizes, Activation::kRelu, k % 2 ? Activation::kTanh : Activation::kLinear, rng, 1.0);
    for (auto& l : net.layers) {
      for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = 0.5 * u(rng) + (u(rng) > 0 ? 0.2 : -0.2);
    }
    Matrix x(net.input_size(), 3), w(net.output_size(), 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    MlpCache cache;
    forward(net, x, &cache);
    Matrix gin;
    const Mlp g = backward(net, cache, w, &gin);
    auto loss = [&] { return (forward(net, x).array() * w.array()).sum(); };
    mlp_worst = std::max(mlp_worst, relative_fd_error(loss, net_params(net), net_flat(g)));
    std::vector<double*> xp;
    for (Eigen::Index i = 0; i < x.size(); ++i) xp.push_back(x.data() + i);
    mlp_worst = std::max(mlp_worst, relative_fd_error(loss, xp, std::vector<double>(gin.data(), gin.data() + gin.size())));
  }

  PlannerConfig cfg;
  double band_worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    Band b = perturbed_band(rng, cfg);
    const DynamicObstacle person{b.poses[5].x + 0.3 * u(rng), b.poses[5].y + 0.3 * u(rng), 0.6 * u(rng), 0.6 * u(rng)};
    const double target = k % 2 ? 1.5 : 0.0;
    const auto bc = band_cost(b, person, cfg, target);
    std::vector<double> z = pack(b);
    std::vector<double*> zp;
    for (auto& v : z) zp.push_back(&v);
    auto f = [&] {
      Band t = b;
      unpack(z, t);
      return band_cost(t, person, cfg, target, false).cost;
    };
    band_worst = std::max(band_worst, relative_fd_error(f, zp, bc.gradient));
  }
  return {mlp_worst <= 1e-4 && band_worst <= 1e-4,
          fmt::format("{} MLPs rel err {:.2g}; {} bands rel err {:.2g}", instances, mlp_worst, instances, band_worst)};
}

Outcome projection() {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> atoms(2, 101);
  double worst = 0.0, norm = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double lo = -200.0 * u(rng) - 0.1, hi = 200.0 * u(rng) + 0.1;
    const Support s{lo, hi, atoms(rng)};
    std::vector<double> p(s.atoms);
    double sum = 0.0;
    for (auto& x : p) sum += (x = u(rng) < 0.3 ? 0.0 : u(rng));
    if (sum == 0.0) p[0] = sum = 1.0;
    for (auto& x : p) x /= sum;
    const double scale = k % 3 == 0 ? 2.0 * (hi - lo) : 2.0;
    const double r = scale * (u(rng) - 0.5);
    const bool done = u(rng) < 0.1;
    const double g = u(rng);
    const Eigen::VectorXd out = categorical_project(r, done, Eigen::Map<const Eigen::VectorXd>(p.data(), s.atoms), g, s);
    const auto ref = oracle::project(r, done, p, g, lo, hi);
    for (int i = 0; i < s.atoms; ++i) worst = std::max(worst, std::abs(out[i] - ref[i]));
    norm = std::max(norm, std::abs(out.sum() - 1.0));
    if ((out.array() < 0.0).any()) return {false, "negative mass"};
  }
  return {worst <= 1e-9 && norm <= 1e-9, fmt::format("1e4 cases max err {:.2g}, max |sum - 1| {:.2g}", worst, norm)};
}

Outcome ekf() {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> v_dist(0.2, 1.0), w_dist(0.2, 0.8), u(-5.0, 5.0);
  const EkfConfig cfg;
  const double dt = 0.2;
  double worst_v = 0.0, worst_w = 0.0, min_eig = 1e9;
  for (int k = 0; k < 200; ++k) {
    const double v = v_dist(rng), w = (k % 2 ? 1.0 : -1.0) * w_dist(rng);
    Pose truth(u(rng), u(rng), u(rng), v, w);
    EkfState s = ekf_init(truth, cfg);
    for (int i = 1; i <= 100; ++i) {
      truth = step_unicycle(truth, {v, w}, dt);
      s = ekf_update(ekf_predict(s, dt, cfg), Vector3(truth.x, truth.y, truth.phi), cfg.measurement_cov());
      min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix5>(s.cov).eigenvalues().minCoeff());
      if (i * dt >= 3.0 - 1e-9) {
        worst_v = std::max(worst_v, std::abs(s.mean(3) - v) / v);
        worst_w = std::max(worst_w, std::abs(s.mean(4) - w) / std::abs(w));
      }
    }
  }
  return {worst_v <= 0.05 && worst_w <= 0.05 && min_eig >= 0.0,
          fmt::format("200 tracks, t >= 3 s: max rel err v {:.3f}, omega {:.3f}; min cov eigenvalue {:.2g}", worst_v,
                      worst_w, min_eig)};
}

Outcome planner(Config cfg, const Shared& shared) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ang(-kPi, kPi), dist(0.3, 3.0);
  const EpisodeConfig ecfg;
  double worst_err = 0.0, worst_t = 0.0;
  for (int k = 0; k < 40; ++k) {
    const double a = ang(rng), d = dist(rng);
    const BandPose goal{d * std::cos(a), d * std::sin(a), ang(rng)};
    WorldState w;
    w.robot = Pose(0, 0, 0);
    w.human = Pose(100, 100, 0);
    w.push_history();
    double err = 1e9, t = 0.0;
    while (t < 10.0 - 1e-9) {
      const auto r = plan(w.robot, goal, std::nullopt, cfg.planner);
      env_step(w, extract_command(r.band, cfg.planner, ecfg.dt), {}, ecfg);
      t += ecfg.dt;
      err = std::hypot(w.robot.x - goal.x, w.robot.y - goal.y);
      if (err < 0.15) break;
    }
    worst_err = std::max(worst_err, err);
    worst_t = std::max(worst_t, t);
  }

  ControllerFactory factory(cfg);
  factory.set_policy("LBGP", shared.lbgp_actor);
  const auto logs = run_suite(scenario_suite(cfg.eval), factory, {"LBGP", "HC"}, cfg.eval.seeds, cfg.eval.threads);
  int too_close = 0;
  double clearance = 1e9;
  for (const auto& log : logs) {
    for (const auto& r : log.records) {
      clearance = std::min(clearance, r.distance);
      if (r.terminal == Termination::kTooClose) ++too_close;
    }
  }
  return {worst_err < 0.15 && worst_t <= 10.0 && too_close == 0 && clearance >= 0.5,
          fmt::format("40 goals: worst miss {:.3f} m, slowest {:.1f} s; {} suite episodes: too_close {}, min D {:.3f} m",
                      worst_err, worst_t, logs.size(), too_close, clearance)};
}

Outcome hc_sanity(const Config& cfg) {
  ControllerFactory factory(cfg);
  const auto sc = scenario_suite(cfg.eval);
  const auto it = std::find_if(sc.begin(), sc.end(), [](const Scenario& s) { return s.name == "straight/ahead"; });
  if (it == sc.end()) return {false, "straight/ahead missing"};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto logs = run_scenario(*it, factory, "HC", seeds);
  double sum_d = 0.0, sum_a = 0.0;
  std::size_t n = 0;
  for (const auto& log : logs) {
    for (const auto& r : log.records) {
      sum_d += r.distance;
      sum_a += std::abs(r.alpha_deg);
      ++n;
    }
  }
  const double d = sum_d / n, a = sum_a / n;
  const auto row = aggregate_metrics(logs, cfg.eval.gamma);
  return {a < 10.0 && d >= 1.2 && d <= 1.8,
          fmt::format("5 seeds: mean |alpha| {:.2f} deg, mean D {:.3f} m (D {:.2f}+-{:.2f}, alpha {:.2f}+-{:.2f})", a, d,
                      row.d_mean, row.d_std, row.alpha_mean, row.alpha_std)};
}

double level_one_return(const EnvConfig& env, const Mlp* actor, int episodes, std::uint64_t seed) {
  FollowEnv e(env, nullptr, seed);
  std::mt19937_64 rng(seed ^ 0xabcdefull);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double total = 0.0;
  for (int k = 0; k < episodes; ++k) {
    Observation obs = e.reset(1);
    while (true) {
      const Action a = actor ? actor_forward(*actor, obs) : Action{u(rng), u(rng)};
      const EnvStep s = e.step(a);
      total += s.result.reward.total;
      obs = s.obs;
      if (s.result.terminal()) break;
    }
  }
  return total / episodes;
}

Outcome desk_learning(const Config& cfg, const Options& opt, Shared& shared) {
  TrainConfig tc = cfg.train;
  tc.env.kind = PolicyKind::kGoal;
  tc.use_curriculum = true;
  tc.start_level = 1;
  tc.max_level = 1;
  tc.total_steps = opt.desk_steps;
  tc.threaded = false;
  const auto t0 = Clock::now();
  Trainer trainer(tc, nullptr);
  const TrainResult r = trainer.run();
  const double train_s = std::chrono::duration<double>(Clock::now() - t0).count();
  shared.lbgp_checkpoint = opt.work / "desk_lbgp.ckpt";
  save_checkpoint(trainer.checkpoint(r), shared.lbgp_checkpoint);
  shared.lbgp_actor = std::make_shared<const Mlp>(r.agent.actor);

  const double lbgp = level_one_return(tc.env, &r.agent.actor, 30, 777);
  const double random = level_one_return(tc.env, nullptr, 30, 777);
  const bool ok = r.steps <= 100000 && lbgp > 0.0 && (random <= 0.0 || lbgp >= 2.0 * random);
  return {ok, fmt::format("{} steps in {:.0f} s; 30-episode return LBGP {:.2f} vs random goal {:.2f}", r.steps, train_s,
                          lbgp, random)};
}

bool file_ok(const fs::path& p) { return fs::exists(p) && fs::file_size(p) > 0; }

Outcome ablation(const Config& cfg, const Options& opt, Shared& shared) {
  const fs::path dir = opt.work / "ablation";
  fs::remove_all(dir);
  const std::string cmd = fmt::format("\"{}\" --out \"{}\" ablate --steps {} > \"{}\" 2>&1", opt.cli, dir.string(),
                                      opt.ablation_steps, (opt.work / "ablation.log").string());
  if (const int rc = std::system(cmd.c_str()); rc != 0) return {false, fmt::format("ablate exited with {}", rc)};

  const auto variants = ablation_variants(cfg);
  std::map<std::string, std::vector<double>> finals;
  int files = 0;
  for (const auto& v : variants) {
    for (const auto seed : cfg.ablation.seeds) {
      const auto curve = read_curve(dir / fmt::format("{}_seed{}.csv", v.name, seed));
      if (curve.empty()) return {false, fmt::format("{} seed {}: empty curve", v.name, seed)};
      for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!std::isfinite(curve[i].reward) || !std::isfinite(curve[i].std) ||
            (i > 0 && curve[i].step <= curve[i - 1].step)) {
          return {false, fmt::format("{} seed {}: malformed row {}", v.name, seed, i)};
        }
      }
      finals[v.name].push_back(curve.back().reward);
      if (!file_ok(dir / fmt::format("{}_seed{}.ckpt", v.name, seed))) return {false, "missing checkpoint"};
      ++files;
    }
    if (read_curve(dir / fmt::format("{}_mean.csv", v.name)).empty()) return {false, v.name + " mean curve empty"};
    ++files;
  }
  if (!file_ok(dir / "summary.csv")) return {false, "summary.csv missing"};
  shared.e2e_checkpoint = dir / fmt::format("e2e_seed{}.ckpt", cfg.ablation.seeds.front());

  const auto& cur = finals.at("lbgp");
  const auto& flat_run = finals.at("lbgp_no_curriculum");
  int wins = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    if (cur[i] >= flat_run[i]) ++wins;
    per_seed += fmt::format(" {:.2f}/{:.2f}", cur[i], flat_run[i]);
  }
  const auto& e2e = finals.at("e2e");
  return {cur.size() >= 3 && wins >= 2,
          fmt::format("{} variants x {} seeds, {} curve files; curriculum/no-curriculum final:{} ({} of {} seeds); "
                      "e2e mean final {:.2f}",
                      variants.size(), cur.size(), files, per_seed, wins, cur.size(),
                      std::accumulate(e2e.begin(), e2e.end(), 0.0) / e2e.size())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const Options& opt, const Shared& shared) {
  if (shared.lbgp_checkpoint.empty() || shared.e2e_checkpoint.empty()) return {false, "checkpoints unavailable"};
  std::vector<std::string> tables;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = opt.work / fmt::format("eval_run{}", run);
    fs::remove_all(dir);
    const std::string cmd =
        fmt::format("\"{}\" --out \"{}\" eval --lbgp \"{}\" --e2e \"{}\" --threads {} --no-logs > \"{}\" 2>&1", opt.cli,
                    dir.string(), shared.lbgp_checkpoint.string(), shared.e2e_checkpoint.string(), run + 1,
                    (dir.string() + ".log"));
    if (const int rc = std::system(cmd.c_str()); rc != 0) return {false, fmt::format("eval exited with {}", rc)};
    tables.push_back(slurp(dir / "metrics.csv"));
  }
  const auto rows = std::count(tables[0].begin(), tables[0].end(), '\n');
  return {!tables[0].empty() && tables[0] == tables[1],
          fmt::format("two runs (1 and 2 threads), {} lines, {} bytes, {}", rows, tables[0].size(),
                      tables[0] == tables[1] ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  std::string config_path;
  CLI::App app{"acceptance checks"};
  app.add_option("--config", config_path, "JSON config");
  app.add_option("--work", opt.work, "scratch directory")->capture_default_str();
  app.add_option("--desk-steps", opt.desk_steps, "env steps for the desk-scale training run")->capture_default_str();
  app.add_option("--ablation-steps", opt.ablation_steps, "env steps per ablation run")->capture_default_str();
  app.add_option("--cli", opt.cli, "follow_ahead executable")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const Config cfg = config_path.empty() ? default_config() : load_config(config_path);
  fs::create_directories(opt.work);
  Shared shared;

  check("reward_oracle", 5, reward_oracle);
  check("transforms", 5, transforms);
  check("generators", 10, generators);
  check("gradients", 60, gradients);
  check("projection", 10, projection);
  check("ekf_convergence", 10, ekf);
  check("desk_learning", 30 * 60, [&] { return desk_learning(cfg, opt, shared); });
  check("planner_safety", 120, [&] {
    if (!shared.lbgp_actor) return Outcome{false, "no LBGP actor"};
    return planner(cfg, shared);
  });
  check("hc_sanity", 60, [&] { return hc_sanity(cfg); });
  check("ablation", 2 * 3600, [&] { return ablation(cfg, opt, shared); });
  check("determinism", 600, [&] { return determinism(opt, shared); });

  fmt::print("{} failed\n", failures);
  return failures;
}

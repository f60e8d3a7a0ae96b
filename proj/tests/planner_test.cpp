#include "follow_ahead/planner_teb.hpp"

#include <random>

#include <gtest/gtest.h>

#include "follow_ahead/sim.hpp"
#include "oracles.hpp"

using namespace follow_ahead;

namespace {

Band random_band(std::mt19937_64& rng, const PlannerConfig& cfg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> len(0.5, 3.0);
  Pose robot(u(rng), u(rng), 3.0 * u(rng), u(rng), 2.0 * u(rng));
  const double L = len(rng), a = 3.0 * u(rng);
  BandPose goal{robot.x + L * std::cos(a), robot.y + L * std::sin(a), 3.0 * u(rng)};
  Band b = initial_band(robot, goal, cfg);
  for (std::size_t i = 1; i + 1 < b.poses.size(); ++i) {
    b.poses[i].x += 0.2 * u(rng);
    b.poses[i].y += 0.2 * u(rng);
    b.poses[i].theta += 0.8 * u(rng);
  }
  for (auto& dt : b.dts) dt = std::clamp(dt * (1.0 + 0.6 * u(rng)) - 0.05, cfg.dt_min, cfg.dt_max);
  return b;
}

}  // namespace

TEST(BandCost, StraightFeasibleBandHasNoPenalties) {
  PlannerConfig cfg;
  Pose robot(0, 0, 0, 0.5, 0);
  Band b = initial_band(robot, {2.0, 0.0, 0.0}, cfg);
  for (auto& dt : b.dts) dt = 2.0 / 14 / 0.5;  // 0.5 m/s throughout
  const auto c = band_cost(b, std::nullopt, cfg);
  EXPECT_EQ(c.terms.obstacle, 0.0);
  EXPECT_EQ(c.terms.velocity, 0.0);
  EXPECT_NEAR(c.terms.nonholonomic, 0.0, 1e-20);
  EXPECT_NEAR(c.terms.acceleration, 0.0, 1e-20);
  EXPECT_NEAR(c.cost, 4.0, 1e-12);
}

TEST(BandCost, GradientMatchesFiniteDifferences) {
  PlannerConfig cfg;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int inst = 0; inst < 150; ++inst) {
    Band b = random_band(rng, cfg);
    DynamicObstacle person{b.poses[5].x + 0.3 * u(rng), b.poses[5].y + 0.3 * u(rng), 0.6 * u(rng), 0.6 * u(rng)};
    const double target = inst % 2 ? 1.5 : 0.0;
    const auto bc = band_cost(b, person, cfg, target);
    auto f = [&](const std::vector<double>& z) {
      Band t = b;
      unpack(z, t);
      return band_cost(t, person, cfg, target, false).cost;
    };
    const auto z = pack(b);
    double gmax = 0.0, err = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double fd = oracle::central_diff(f, z, i, 1e-6);
      gmax = std::max(gmax, std::abs(fd));
      err = std::max(err, std::abs(fd - bc.gradient[i]));
    }
    ASSERT_LE(err, 1e-4 * std::max(gmax, 1e-8)) << "instance " << inst;
  }
}

TEST(OptimizeBand, ZeroIterationsIsIdentity) {
  PlannerConfig cfg;
  cfg.max_iterations = 0;
  Band b = initial_band(Pose(0, 0, 0), {2, 1, 0.5}, cfg);
  const auto r = optimize_band(b, std::nullopt, cfg);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(r.band.poses[i].x, b.poses[i].x);
    EXPECT_EQ(r.band.poses[i].y, b.poses[i].y);
  }
  EXPECT_EQ(r.band.dts, b.dts);
}

TEST(OptimizeBand, CostsNonIncreasingAndAnchorsFixed) {
  PlannerConfig cfg;
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    Band b = random_band(rng, cfg);
    const auto r = optimize_band(b, DynamicObstacle{b.poses[7].x, b.poses[7].y, 0.2, 0.0}, cfg);
    for (std::size_t i = 1; i < r.cost_history.size(); ++i) ASSERT_LE(r.cost_history[i], r.cost_history[i - 1]);
    EXPECT_EQ(r.band.poses.front().x, b.poses.front().x);
    EXPECT_EQ(r.band.poses.back().x, b.poses.back().x);
    EXPECT_EQ(r.band.poses.back().y, b.poses.back().y);
    for (double dt : r.band.dts) {
      ASSERT_GE(dt, cfg.dt_min);
      ASSERT_LE(dt, cfg.dt_max);
    }
  }
}

TEST(OptimizeBand, FreeSpaceStraightReachesAnalyticTimeCost) {
  PlannerConfig cfg;
  cfg.w_acceleration = 0.0;
  cfg.max_iterations = 2000;
  const auto r = optimize_band(initial_band(Pose(0, 0, 0), {2.0, 0.0, 0.0}, cfg), std::nullopt, cfg);
  const double analytic = cfg.w_time * 2.0 / cfg.v_max;
  EXPECT_NEAR(r.cost, analytic, 0.01 * analytic);
}

TEST(Plan, StraightGoalInFreeSpace) {
  PlannerConfig cfg;
  const auto r = plan(Pose(0, 0, 0), {2.0, 0.0, 0.0}, std::nullopt, cfg);
  EXPECT_FALSE(r.band.poses.empty());
  for (const auto& p : r.band.poses) EXPECT_NEAR(p.y, 0.0, 1e-6);
  EXPECT_NEAR(r.band.poses.back().x, 2.0, 0.1);
  const auto c = extract_command(r.band, cfg);
  EXPECT_GT(c.v, 0.0);
  EXPECT_NEAR(c.omega, 0.0, 1e-9);
}

TEST(Plan, GoalAtRobotGivesZeroCommand) {
  PlannerConfig cfg;
  const auto r = plan(Pose(1, 1, 0.3), {1.0, 1.0, 0.3}, std::nullopt, cfg);
  const auto c = extract_command(r.band, cfg);
  EXPECT_NEAR(c.v, 0.0, 1e-9);
  EXPECT_NEAR(c.omega, 0.0, 1e-9);
}

TEST(Plan, PersonOnTheLineIsAvoided) {
  PlannerConfig cfg;
  const DynamicObstacle person{1.5, 0.0, 0.0, 0.0};
  const auto r = plan(Pose(0, 0, 0), {3.0, 0.0, 0.0}, person, cfg);
  double min_clear = 1e9;
  for (const auto& p : r.band.poses) min_clear = std::min(min_clear, std::hypot(p.x - 1.5, p.y));
  EXPECT_GE(min_clear, cfg.clearance);
}

TEST(Plan, DoublingObstacleWeightNeverReducesClearance) {
  PlannerConfig a;
  PlannerConfig b = a;
  b.w_obstacle *= 2.0;
  const DynamicObstacle person{1.5, 0.1, 0.0, 0.0};
  auto clearance = [&](const PlannerConfig& cfg) {
    const auto r = plan(Pose(0, 0, 0), {3.0, 0.0, 0.0}, person, cfg);
    double m = 1e9;
    for (const auto& p : r.band.poses) m = std::min(m, std::hypot(p.x - person.x, p.y - person.y));
    return m;
  };
  EXPECT_GE(clearance(b), clearance(a) - 1e-9);
}

TEST(ExtractCommand, SignsAndLimits) {
  PlannerConfig cfg;
  Band left = initial_band(Pose(0, 0, 0), {1.0, 1.0, kPi / 2}, cfg);
  left = optimize_band(left, std::nullopt, cfg).band;
  EXPECT_GT(extract_command(left, cfg).omega, 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    Band b = initial_band(Pose(0, 0, u(rng)), {u(rng), u(rng), u(rng)}, cfg);
    b.dts[0] = 0.01;
    const auto c = extract_command(b, cfg);
    ASSERT_LE(std::abs(c.v), cfg.v_max);
    ASSERT_LE(std::abs(c.omega), cfg.omega_max);
  }
}

namespace {

struct Closed {
  double final_err;
  double time;
  double max_dv;
  double max_dw;
};

Closed closed_loop_to_goal(Pose robot, BandPose goal, const PlannerConfig& cfg) {
  EpisodeConfig ecfg;
  WorldState w;
  w.robot = robot;
  w.human = Pose(100, 100, 0);
  w.push_history();
  Closed c{1e9, 0.0, 0.0, 0.0};
  MotionCommand prev{robot.v, robot.omega};
  bool first = true;
  for (int k = 0; k < 50; ++k) {
    const auto r = plan(w.robot, goal, std::nullopt, cfg);
    const auto cmd = extract_command(r.band, cfg, ecfg.dt);
    if (!first) {
      c.max_dv = std::max(c.max_dv, std::abs(cmd.v - prev.v));
      c.max_dw = std::max(c.max_dw, std::abs(cmd.omega - prev.omega));
    }
    first = false;
    prev = cmd;
    env_step(w, cmd, {}, ecfg);
    c.final_err = std::hypot(w.robot.x - goal.x, w.robot.y - goal.y);
    c.time = (k + 1) * ecfg.dt;
    if (c.final_err < 0.15) break;
  }
  return c;
}

}  // namespace

TEST(ClosedLoop, ReachesStaticGoals) {
  PlannerConfig cfg;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ang(-kPi, kPi), dist(0.5, 3.0);
  for (int i = 0; i < 30; ++i) {
    const double a = ang(rng), d = dist(rng);
    const BandPose goal{d * std::cos(a), d * std::sin(a), a + 0.5 * ang(rng) / kPi};
    const auto c = closed_loop_to_goal(Pose(0, 0, 0), goal, cfg);
    EXPECT_LT(c.final_err, 0.15) << "goal " << goal.x << "," << goal.y << "," << goal.theta;
    EXPECT_LE(c.time, 10.0);
  }
}

TEST(ClosedLoop, ReplanStability) {
  PlannerConfig cfg;
  const auto c = closed_loop_to_goal(Pose(0, 0, 0, 0.0, 0.0), {2.5, 0.8, 0.3}, cfg);
  EXPECT_LE(c.max_dv, 0.3);
  EXPECT_LE(c.max_dw, 0.6);
}

#include "follow_ahead/reward.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace follow_ahead;

TEST(DistanceReward, Examples) {
  EXPECT_DOUBLE_EQ(distance_reward(1.5), 0.25);
  EXPECT_DOUBLE_EQ(distance_reward(0.75), -0.25);
  EXPECT_DOUBLE_EQ(distance_reward(3.0), -0.5);
  EXPECT_DOUBLE_EQ(distance_reward(0.4), -1.0);
  EXPECT_DOUBLE_EQ(distance_reward(5.5), -1.0);
}

TEST(DistanceReward, BoundariesJoinRightHandCase) {
  EXPECT_DOUBLE_EQ(distance_reward(0.5), -0.5);
  EXPECT_DOUBLE_EQ(distance_reward(1.0), 0.0);
  EXPECT_DOUBLE_EQ(distance_reward(2.0), -0.25);
  EXPECT_DOUBLE_EQ(distance_reward(5.0), -1.0);
}

TEST(OrientationReward, Examples) {
  EXPECT_DOUBLE_EQ(orientation_reward(0.0), 0.5);
  EXPECT_DOUBLE_EQ(orientation_reward(180.0), -0.25);
  EXPECT_DOUBLE_EQ(orientation_reward(12.5), 0.25);
  EXPECT_NEAR(orientation_reward(25.0), -0.25 * 25.0 / 180.0, 1e-15);
}

TEST(OrientationReward, EvenInAlpha) {
  for (double a = 0.0; a <= 180.0; a += 0.37) EXPECT_EQ(orientation_reward(a), orientation_reward(-a));
}

TEST(StepReward, Examples) {
  EXPECT_DOUBLE_EQ(step_reward(1.5, 0).total, 0.75);
  EXPECT_DOUBLE_EQ(step_reward(0.4, 0).total, -0.5);
  EXPECT_DOUBLE_EQ(step_reward(6.0, 180).total, -1.0);
  const auto t = step_reward(1.5, 0);
  EXPECT_DOUBLE_EQ(t.r_distance, 0.25);
  EXPECT_DOUBLE_EQ(t.r_orientation, 0.5);
}

TEST(StepReward, Monotonicity) {
  for (double d = 2.01; d < 4.99; d += 0.01) EXPECT_GT(distance_reward(d), distance_reward(d + 0.01));
  for (double a = 25.0; a < 179.9; a += 0.1) EXPECT_GT(orientation_reward(a), orientation_reward(a + 0.1));
}

TEST(StepReward, MatchesOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 7.0), a(-180.0, 180.0);
  for (int i = 0; i < 100000; ++i) {
    const double dd = d(rng), aa = a(rng);
    ASSERT_NEAR(step_reward(dd, aa).total, oracle::reward(dd, aa), 1e-12) << dd << " " << aa;
  }
}

TEST(IsTerminal, Examples) {
  EXPECT_EQ(is_terminal(0.49), Termination::kTooClose);
  EXPECT_EQ(is_terminal(1.5), Termination::kContinue);
  EXPECT_EQ(is_terminal(5.01), Termination::kTooFar);
  EXPECT_EQ(is_terminal(0.5), Termination::kContinue);
  EXPECT_EQ(is_terminal(5.0), Termination::kContinue);
}

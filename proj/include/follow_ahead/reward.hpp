#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

namespace follow_ahead {

inline constexpr double kDesiredDistance = 1.5;
inline constexpr double kTooClose = 0.5;
inline constexpr double kTooFar = 5.0;

struct RewardTerms {
  double distance = 0.0;   // D, meters
  double alpha_deg = 0.0;  // person-robot angle, degrees
  double r_distance = 0.0;
  double r_orientation = 0.0;
  double total = 0.0;  // clamp(r_distance + r_orientation, -1, 1)
};

// Piecewise distance term. Boundary points join the case on their right:
// 0.5 -> -(1-D), 1 -> 0.5(0.5-|D-1.5|), 2 and 5 -> -0.25(D-1).
inline double distance_reward(double d) {
  if (d < 0.5 || d > 5.0) return -1.0;
  if (d < 1.0) return -(1.0 - d);
  if (d < 2.0) return 0.5 * (0.5 - std::abs(d - 1.5));
  return -0.25 * (d - 1.0);
}

// Orientation term; alpha in degrees. |alpha| == 25 falls in the outer case.
inline double orientation_reward(double alpha_deg) {
  const double a = std::abs(alpha_deg);
  if (a < 25.0) return 0.5 * (25.0 - a) / 25.0;
  return -0.25 * a / 180.0;
}

inline RewardTerms step_reward(double d, double alpha_deg) {
  RewardTerms r;
  r.distance = d;
  r.alpha_deg = alpha_deg;
  r.r_distance = distance_reward(d);
  r.r_orientation = orientation_reward(alpha_deg);
  r.total = std::min(std::max(r.r_distance + r.r_orientation, -1.0), 1.0);
  return r;
}

enum class Termination { kContinue, kTooClose, kTooFar, kHorizon };

inline Termination is_terminal(double d) {
  if (d < kTooClose) return Termination::kTooClose;
  if (d > kTooFar) return Termination::kTooFar;
  return Termination::kContinue;
}

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kContinue: return "continue";
    case Termination::kTooClose: return "too_close";
    case Termination::kTooFar: return "too_far";
    case Termination::kHorizon: return "horizon";
  }
  return "continue";
}

inline Termination termination_from_string(std::string_view s) {
  if (s == "too_close") return Termination::kTooClose;
  if (s == "too_far") return Termination::kTooFar;
  if (s == "horizon") return Termination::kHorizon;
  return Termination::kContinue;
}

}  // namespace follow_ahead

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace follow_ahead {

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

inline double deg(double rad) { return rad * 180.0 / kPi; }
inline double rad(double deg) { return deg * kPi / 180.0; }

// Global planar pose and body velocities of an agent.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double v = 0.0;
  double omega = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double phi_, double v_ = 0.0, double omega_ = 0.0)
      : x(x_), y(y_), phi(wrap_angle(phi_)), v(v_), omega(omega_) {}
};

// A pose expressed in the current body frame of the human.
struct RelativeState {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
};

class DegenerateGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Expresses `subject` in the frame of `reference_human`: rotate the world-frame
// difference by -phi_h, so a subject straight ahead of the human lands on +x.
inline RelativeState world_to_relative(const Pose& subject, const Pose& reference_human) {
  const double dx = subject.x - reference_human.x;
  const double dy = subject.y - reference_human.y;
  const double c = std::cos(reference_human.phi);
  const double s = std::sin(reference_human.phi);
  return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(subject.phi - reference_human.phi)};
}

// Inverse of world_to_relative. Velocities of the result are zero.
inline Pose relative_to_world(const RelativeState& rel, const Pose& reference_human) {
  const double c = std::cos(reference_human.phi);
  const double s = std::sin(reference_human.phi);
  return Pose(reference_human.x + c * rel.x - s * rel.y,
              reference_human.y + s * rel.x + c * rel.y,
              wrap_angle(rel.phi + reference_human.phi));
}

// alpha = atan2(y, x) of the robot in the human frame; 0 means straight ahead.
inline double person_robot_angle(const RelativeState& rel) {
  if (rel.x == 0.0 && rel.y == 0.0) {
    throw DegenerateGeometry("person_robot_angle: robot coincides with person");
  }
  double a = std::atan2(rel.y, rel.x);
  return a == -kPi ? kPi : a;
}

inline double person_robot_distance(const Pose& robot, const Pose& human) {
  return std::hypot(robot.x - human.x, robot.y - human.y);
}

}  // namespace follow_ahead

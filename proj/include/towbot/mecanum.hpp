#ifndef TOWBOT_MECANUM_HPP_
#define TOWBOT_MECANUM_HPP_

#include <optional>
#include <stdexcept>

#include "towbot/geometry.hpp"

namespace towbot {

// Wheel-level and constraint-level kinematics of the mecanum platform and
// the coupled robot+wheelchair body.
//
// Body frame F_R: e1 = lateral (positive toward the right-turn side),
// e2 = forward, yaw CCW positive.

struct RobotGeometry {
  double r_wheel{0.05};  // mecanum wheel radius [m]
  double l_x{0.20};      // longitudinal wheel offset from platform center [m]
  double l_y{0.15};      // lateral wheel offset from platform center [m]
  double l_v{0.40};      // distance O_R -> wheelchair main-wheel axis [m]
  double l_h_min{0.30};  // minimum turning radius [m]

  void validate() const {
    if (r_wheel <= 0 || l_x <= 0 || l_y <= 0 || l_v <= 0 || l_h_min <= 0)
      throw std::invalid_argument("RobotGeometry: all lengths must be positive");
  }
};

struct Twist2 {
  double vx{0.0};     // lateral [m/s]
  double vy{0.0};     // forward [m/s]
  double omega{0.0};  // yaw rate [rad/s]
};

// Wheel order: front-left, front-right, rear-left, rear-right.
struct WheelSpeeds {
  double w1{0.0}, w2{0.0}, w3{0.0}, w4{0.0};  // [rad/s]
};

// Constrained towing command: speed is |body velocity|, l_h the signed
// lateral ICR offset along the main-wheel axis (sign selects turn side).
struct TurnCommand {
  double speed{0.0};  // [m/s], >= 0
  double l_h{0.0};    // [m], |l_h| >= l_h_min
};

struct TowCommand {
  double v_w{0.0};      // wheelchair forward speed [m/s]
  double omega_w{0.0};  // wheelchair yaw rate [rad/s]
};

class MinimumTurnRadiusError : public std::runtime_error {
 public:
  explicit MinimumTurnRadiusError(double l_h, double l_h_min)
      : std::runtime_error("turn radius |l_h| below minimum"),
        l_h_(l_h), l_h_min_(l_h_min) {}
  double l_h() const { return l_h_; }
  double l_h_min() const { return l_h_min_; }

 private:
  double l_h_, l_h_min_;
};

WheelSpeeds wheel_speeds_from_twist(const Twist2& t, const RobotGeometry& g);

Twist2 twist_from_turn_command(const TurnCommand& c, const RobotGeometry& g);

TowCommand wheelchair_command_from_turn(const TurnCommand& c, const RobotGeometry& g);

Twist2 tow_twist_from_wheelchair_command(const TowCommand& c, const RobotGeometry& g);

// Robot-frame ICR of a twist, or nullopt for (near-)pure translation.
std::optional<Vec2> icr_of_twist(const Twist2& t, double eps = 1e-9);

// Axis-directional speed of the wheelchair axle midpoint (robot-frame
// (0, -l_v)); zero iff the main wheels roll without slipping.
double main_wheel_slip(const Twist2& t, const RobotGeometry& g);

}  // namespace towbot

#endif  // TOWBOT_MECANUM_HPP_

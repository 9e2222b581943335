#include "towbot/mecanum.hpp"

#include <cmath>

namespace towbot {

namespace {
double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }
}  // namespace

WheelSpeeds wheel_speeds_from_twist(const Twist2& t, const RobotGeometry& g) {
  g.validate();
  const double k = 1.0 / g.r_wheel;
  const double l = g.l_x + g.l_y;
  return {k * (t.vx + t.vy - l * t.omega),
          k * (-t.vx + t.vy + l * t.omega),
          k * (-t.vx + t.vy - l * t.omega),
          k * (t.vx + t.vy + l * t.omega)};
}

Twist2 twist_from_turn_command(const TurnCommand& c, const RobotGeometry& g) {
  g.validate();
  if (c.speed < 0) throw std::invalid_argument("TurnCommand.speed must be >= 0");
  if (std::abs(c.l_h) < g.l_h_min) throw MinimumTurnRadiusError(c.l_h, g.l_h_min);
  const double l_d = std::hypot(g.l_v, c.l_h);
  const double s = c.speed / l_d;
  // |l_h| in the forward slot keeps vy >= 0 for both turn directions.
  return {s * g.l_v * sgn(c.l_h), s * std::abs(c.l_h), -s * sgn(c.l_h)};
}

TowCommand wheelchair_command_from_turn(const TurnCommand& c, const RobotGeometry& g) {
  g.validate();
  if (c.speed < 0) throw std::invalid_argument("TurnCommand.speed must be >= 0");
  if (std::abs(c.l_h) < g.l_h_min) throw MinimumTurnRadiusError(c.l_h, g.l_h_min);
  const double l_d = std::hypot(g.l_v, c.l_h);
  const double cos_theta = std::abs(c.l_h) / l_d;
  const double sin_theta = g.l_v / l_d;
  return {c.speed * cos_theta, -sgn(c.l_h) * c.speed * sin_theta / g.l_v};
}

Twist2 tow_twist_from_wheelchair_command(const TowCommand& c, const RobotGeometry& g) {
  g.validate();
  return {-g.l_v * c.omega_w, c.v_w, c.omega_w};
}

std::optional<Vec2> icr_of_twist(const Twist2& t, double eps) {
  if (std::abs(t.omega) <= eps) return std::nullopt;
  return Vec2{-t.vy / t.omega, t.vx / t.omega};
}

double main_wheel_slip(const Twist2& t, const RobotGeometry& g) {
  g.validate();
  // Velocity of robot-frame point (0, -l_v), projected on the axis (e1).
  return t.vx + t.omega * g.l_v;
}

}  // namespace towbot

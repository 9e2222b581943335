#include "towbot/control.hpp"

#include <algorithm>
#include <cmath>

namespace towbot {

double cross_track(const Vec2& p_i, const Vec2& x_w, double psi1, double psi2) {
  return (p_i - x_w).norm() * std::sin(psi1 - psi2);
}

double blend(double d, double d_scale, BlendSignPolicy policy) {
  const double arg = policy == BlendSignPolicy::Absolute ? std::abs(d) : d;
  return 0.5 * (1.0 + std::tanh(d_scale * arg));
}

double desired_heading(double psi1, double psi2, double d, const ControlGains& g) {
  const double k = blend(d, g.d_scale, g.sign_policy);
  return wrap_angle(psi2 + k * wrap_angle(psi1 - psi2));
}

TowCommand heading_to_command(double psi_des, double psi_r, const ControlGains& g) {
  g.validate();
  const double omega = g.k_psi * wrap_angle(psi_des - psi_r);
  return {g.v_cruise, std::clamp(omega, -g.omega_max, g.omega_max)};
}

bool should_advance(double psi1, double psi2) {
  return std::abs(wrap_angle(psi2 - psi1)) > M_PI / 2.0;
}

ControlOutput control_step(TrackingState& state, const Pose2& robot_pose_estimate,
                           const ControlGains& g, const RobotGeometry& geom) {
  g.validate();
  geom.validate();
  if (state.exhausted || state.waypoints.empty()) {
    state.exhausted = true;
    return {{0.0, 0.0}, 0.0, 0.0, 0.0};
  }

  // Stanley reference point: the wheelchair main-axle midpoint, l_v behind
  // the robot origin along its heading.
  const Vec2 heading{std::cos(robot_pose_estimate.psi), std::sin(robot_pose_estimate.psi)};
  const Vec2 x_w = Vec2{robot_pose_estimate.x, robot_pose_estimate.y} - heading * geom.l_v;

  const int n = int(state.waypoints.size());
  while (state.target_index <= n) {
    const Waypoint& wp = state.waypoints.pts[state.target_index - 1];
    const double psi1 = (wp.pos - x_w).angle();
    if (!should_advance(psi1, wp.psi2)) break;
    ++state.target_index;
  }
  if (state.target_index > n) {
    state.exhausted = true;
    return {{0.0, 0.0}, 0.0, 0.0, 0.0};
  }

  const Waypoint& wp = state.waypoints.pts[state.target_index - 1];
  const double psi1 = (wp.pos - x_w).angle();
  const double psi2 = wp.psi2;
  const double d = cross_track(wp.pos, x_w, psi1, psi2);
  const double psi_des = desired_heading(psi1, psi2, d, g);
  return {heading_to_command(psi_des, robot_pose_estimate.psi, g), psi1, psi2, d};
}

}  // namespace towbot

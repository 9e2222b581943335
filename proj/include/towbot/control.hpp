#ifndef TOWBOT_CONTROL_HPP_
#define TOWBOT_CONTROL_HPP_

#include "towbot/geometry.hpp"
#include "towbot/mecanum.hpp"
#include "towbot/planner.hpp"

namespace towbot {

// Heading blending between pursuit-of-waypoint and lane direction,
// waypoint advancement, and the proportional heading-rate law.

enum class BlendSignPolicy {
  Absolute,  // blend on |d|; symmetric convergence from either side
  Signed,    // blend on signed d (literal formula)
};

struct ControlGains {
  double v_cruise{0.5};   // constant towing speed [m/s]
  double k_psi{2.0};      // heading P-gain [1/s]
  double omega_max{1.0};  // yaw-rate saturation [rad/s]
  double d_scale{5.0};    // cross-track scaling inside tanh [1/m]
  BlendSignPolicy sign_policy{BlendSignPolicy::Absolute};

  void validate() const {
    if (v_cruise <= 0 || k_psi <= 0 || omega_max <= 0 || d_scale <= 0)
      throw std::invalid_argument("ControlGains: all gains must be positive");
  }
};

struct TrackingState {
  WaypointArray waypoints;  // global frame
  int target_index{1};      // 1-based
  bool arc_latch{false};    // image updates suppressed during arc following
  bool exhausted{false};
};

// Signed cross-track distance: ||p_i - x_w|| * sin(psi1 - psi2).
double cross_track(const Vec2& p_i, const Vec2& x_w, double psi1, double psi2);

// Blend weight k in [0, 1]; k -> 1 means pure pursuit of the waypoint.
double blend(double d, double d_scale, BlendSignPolicy policy = BlendSignPolicy::Absolute);

// psi_des = psi2 + k(d) * wrap(psi1 - psi2).
double desired_heading(double psi1, double psi2, double d, const ControlGains& g);

TowCommand heading_to_command(double psi_des, double psi_r, const ControlGains& g);

// True once the robot crossed the perpendicular line through the waypoint:
// |wrap(psi2 - psi1)| > pi/2 (strict).
bool should_advance(double psi1, double psi2);

struct ControlOutput {
  TowCommand cmd;
  double psi1{0.0};
  double psi2{0.0};
  double d{0.0};  // Stanley cross-track term
};

// One inner-loop tick: advance the target while behind the update line,
// then steer toward the blended heading. An exhausted state commands a stop.
ControlOutput control_step(TrackingState& state, const Pose2& robot_pose_estimate,
                           const ControlGains& g, const RobotGeometry& geom);

}  // namespace towbot

#endif  // TOWBOT_CONTROL_HPP_

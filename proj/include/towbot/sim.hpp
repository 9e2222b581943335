#ifndef TOWBOT_SIM_HPP_
#define TOWBOT_SIM_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "towbot/geometry.hpp"
#include "towbot/image.hpp"
#include "towbot/mecanum.hpp"
#include "towbot/perception.hpp"
#include "towbot/planner.hpp"

namespace towbot {

// World model, exact kinematic integration of the coupled body, synthetic
// ground-camera rendering, and a drifting pose sensor.

struct Lane {
  std::vector<Vec2> centerline;  // global frame [m], >= 2 points
  double width{0.10};            // [m]
  Rgb color{200, 40, 40};
};

struct WorldMap {
  Rgb floor_color{90, 90, 90};
  std::vector<Lane> lanes;

  void validate() const;
};

// Signed lateral distance from p to the nearest point of the lane
// centerline; positive on the left of the local lane direction.
double signed_lane_distance(const Lane& lane, const Vec2& p);

// Minimum |signed distance| over all lanes (nullopt when the map has none).
std::optional<double> nearest_lane_cross_track(const WorldMap& w, const Vec2& p);

enum class DriveMode { Towing, Standalone };

struct VehicleState {
  Pose2 wheelchair_pose;  // F_W origin at the main-axle midpoint
  DriveMode mode{DriveMode::Towing};
};

// The robot origin rides l_v ahead of the wheelchair axle (rigid coupling).
Pose2 robot_pose_from_wheelchair(const Pose2& wheelchair, const RobotGeometry& g);
Pose2 wheelchair_pose_from_robot(const Pose2& robot, const RobotGeometry& g);

// Exact unicycle step at the wheelchair frame (arc for |omega| >= 1e-9).
VehicleState step_towing(const VehicleState& s, const TowCommand& c, double dt);

// Exact screw-motion step of a holonomic body twist.
VehicleState step_standalone(const VehicleState& s, const Twist2& t, double dt);

struct GlareEllipse {
  double cx{0.0}, cy{0.0};  // perspective-image px
  double rx{1.0}, ry{1.0};
  double strength{80.0};    // additive brightness, 8-bit units
};

struct RenderConfig {
  int image_width{640}, image_height{480};
  int bev_width{256}, bev_height{256};
  // Where the four BEV corners (0,0), (W-1,0), (W-1,H-1), (0,H-1) land in
  // the perspective image.
  std::array<Vec2, 4> bev_corners_in_image{
      Vec2{80, 40}, Vec2{560, 40}, Vec2{640, 480}, Vec2{0, 480}};
  CameraExtrinsics extrinsics;
  double hue_jitter_sigma{0.0};  // 8-bit hue units
  std::vector<GlareEllipse> glare;
  double shadow_gradient{0.0};   // brightness falloff toward the image bottom

  // Homography mapping BEV px -> perspective px.
  Homography warp() const;
};

// Rasterizes the ground as seen by the tilted camera (lanes over floor
// color), then applies the configured noise. Deterministic for a fixed seed.
RgbImage render_ground_view(const WorldMap& w, const Pose2& robot_true_pose,
                            const RenderConfig& cfg, std::uint32_t seed);

// Ground-truth BEV lane mask for the given target color model (noise-free
// rasterization through the same extrinsics chain).
BinaryMask render_truth_mask(const WorldMap& w, const Pose2& robot_true_pose,
                             const RenderConfig& cfg, const ColorModel& m);

struct PoseSensorModel {
  double sigma_walk_xy{0.0};   // meters per sqrt(step)
  double sigma_walk_psi{0.0};  // radians per sqrt(step)
  std::uint32_t seed{0};

  void validate() const {
    if (sigma_walk_xy < 0 || sigma_walk_psi < 0)
      throw std::invalid_argument("PoseSensorModel: sigma must be >= 0");
  }
};

// Stateful drifting pose sensor; the bias is a seeded random walk with
// bias(0) = 0.
class PoseSensor {
 public:
  explicit PoseSensor(const PoseSensorModel& model);

  // Returns true_pose (+) bias, then advances the walk by one step.
  Pose2 read(const Pose2& true_pose);

  Pose2 bias() const { return bias_; }

 private:
  PoseSensorModel model_;
  std::mt19937 rng_;
  Pose2 bias_{0, 0, 0};
};

// Stateless form: recomputes the walk up to the given step from scratch.
Pose2 read_pose_sensor(const Pose2& true_pose, const PoseSensorModel& model, int step);

// No-slip contract diagnostic on the allocated towing twist.
double slip_check(const TowCommand& c, const RobotGeometry& g);

}  // namespace towbot

#endif  // TOWBOT_SIM_HPP_

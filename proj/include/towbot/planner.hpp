#ifndef TOWBOT_PLANNER_HPP_
#define TOWBOT_PLANNER_HPP_

#include <optional>
#include <vector>

#include "towbot/geometry.hpp"
#include "towbot/image.hpp"
#include "towbot/perception.hpp"

namespace towbot {

// Waypoint extraction from the lane mask, virtual-arc synthesis at
// intersections, and the BEV -> camera -> global coordinate chain.
//
// BEV pixel coordinates are raster (col, row); the chain to the ground
// camera frame C1 is p_c1 = s * p_bev + b with a single positive scale, so
// the BEV raster axes are aligned with C1 by construction.

struct CameraExtrinsics {
  double s{0.01};        // meters per BEV pixel, > 0
  Vec2 b{0.0, 0.0};      // bias [m]
  Transform2 t_c2_c1;    // ground-camera pose in the robot/tracking frame

  void validate() const {
    if (s <= 0) throw std::invalid_argument("CameraExtrinsics: s must be > 0");
  }
};

struct Waypoint {
  Vec2 pos;
  FrameId frame{FrameId::Bev};
  double psi2{0.0};  // lane direction at the waypoint, in the pos frame
};

struct WaypointArray {
  std::vector<Waypoint> pts;

  bool empty() const { return pts.empty(); }
  std::size_t size() const { return pts.size(); }
};

enum class LaneStatus { Ok, NoLane, DegenerateLane };

struct ExtractResult {
  LaneStatus status{LaneStatus::Ok};
  WaypointArray waypoints;  // BEV frame
};

struct PlannerParams {
  double r_px{50.0};          // waypoint spacing [px]
  double r_arc_px{120.0};     // virtual arc radius [px]
  int n_max{10};              // waypoint cap per frame
  double turn_threshold{M_PI / 4};
  int turn_preference{0};     // -1 left, 0 straight, +1 right (same-color forks)
  int min_area{64};           // contour/component area floor [px]
};

// Steps a circle of radius r along the lane mask starting from the
// lowermost foreground row.
ExtractResult extract_waypoints(const BinaryMask& mask, double r_px, int n_max,
                                int turn_preference = 0);

struct BranchGeometry {
  Vec2 q;        // corner point (BEV px)
  Vec2 d1, d2;   // incoming/outgoing unit directions
  int corner_index{0};  // first waypoint index past the corner
};

std::optional<BranchGeometry> detect_intersection(const BinaryMask& mask,
                                                  const WaypointArray& wp,
                                                  double r_px,
                                                  double turn_threshold = M_PI / 4);

struct IntersectionArc {
  Vec2 center;
  double radius{0.0};
  double start_angle{0.0};  // angle of the entry tangent point about center
  double end_angle{0.0};
  int direction{1};  // +1 CCW, -1 CW in BEV raster coordinates
  double sweep() const;     // unsigned swept angle
};

IntersectionArc build_virtual_arc(const Vec2& q, const Vec2& d1, const Vec2& d2,
                                  double r_arc, double turn_threshold = M_PI / 4);

// Waypoints spaced by chord length r along the arc (entry tangent point
// excluded, arc end point included); psi2 is the local tangent direction.
WaypointArray sample_arc_waypoints(const IntersectionArc& arc, double r_px);

// Replaces every waypoint past the entry tangent point with arc samples,
// then re-appends original waypoints that lie beyond the exit tangent.
WaypointArray splice_arc(const WaypointArray& wp, const BranchGeometry& branch,
                         const IntersectionArc& arc, double r_px);

Vec2 bev_to_camera(const Vec2& p_bev, const CameraExtrinsics& e);
Vec2 camera_to_global(const Vec2& p_c1, const Pose2& robot_pose_estimate,
                      const CameraExtrinsics& e);

// Full-chain conversion of a BEV waypoint array; directions are mapped
// exactly through the (conformal) chain rotation.
WaypointArray waypoints_to_global(const WaypointArray& bev,
                                  const Pose2& robot_pose_estimate,
                                  const CameraExtrinsics& e);

}  // namespace towbot

#endif  // TOWBOT_PLANNER_HPP_

#ifndef TOWBOT_HARNESS_HPP_
#define TOWBOT_HARNESS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "towbot/control.hpp"
#include "towbot/sim.hpp"

namespace towbot {

// Scenario loading, the end-to-end driving loop, and report emission.

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  WorldMap world;
  RobotGeometry geometry;
  CameraExtrinsics extrinsics;
  ColorModel color_model;
  PlannerParams planner;
  ControlGains gains;
  PoseSensorModel sensor;
  RenderConfig render;

  double dt{0.02};
  double duration{10.0};
  int control_steps_per_frame{10};
  std::uint32_t seed{0};
  Pose2 initial_pose;  // wheelchair pose
  // Optional window [t0, t1) during which camera frames are withheld.
  std::optional<std::pair<double, double>> frame_blackout;

  void validate() const;
};

// Extrinsics placing the BEV footprint centered ahead of the robot:
// near edge near_dist in front, columns increasing to the robot's left.
CameraExtrinsics centered_extrinsics(int bev_w, int bev_h, double s, double near_dist);

ScenarioConfig parse_scenario(const std::string& path);

struct StepRecord {
  double t{0.0};
  Pose2 true_pose;  // robot
  Pose2 est_pose;
  Vec2 target;
  int target_index{0};  // 0 while exhausted
  double psi1{0.0}, psi2{0.0};
  double cross_track{0.0};  // true-frame signed distance to the nearest lane
  TowCommand cmd;
  WheelSpeeds wheels;
  bool arc_latch{false};
  int frame_id{-1};  // last processed camera frame
};

struct RunMetrics {
  double cross_track_rms{0.0};
  double max_cross_track{0.0};
  double settle_distance{0.0};
  double final_heading{0.0};
  long waypoint_updates{0};
  long frames_processed{0};
  long lane_lost_events{0};
};

enum class RunStatus { Ok, LaneNotFound };

struct RunReport {
  RunStatus status{RunStatus::Ok};
  std::vector<StepRecord> records;
  RunMetrics metrics;
  std::vector<Lane> lanes;  // for plotting
};

struct RunOptions {
  std::string out_dir;       // empty: no file output
  bool dump_frames{false};
  int frame_stride{1};
};

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

RunMetrics compute_metrics(const std::vector<StepRecord>& records);

void emit_trajectory_csv(const RunReport& report, const std::string& path);
void emit_svg_plot(const RunReport& report, const std::string& path);
void emit_metrics_txt(const RunMetrics& m, const std::string& path);

}  // namespace towbot

#endif  // TOWBOT_HARNESS_HPP_

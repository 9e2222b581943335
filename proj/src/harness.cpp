#include "towbot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace towbot {

namespace {

std::uint32_t frame_seed(std::uint32_t base, int frame) {
  // splitmix-style mix so consecutive frames decorrelate
  std::uint64_t z = (std::uint64_t(base) << 32) ^ (std::uint64_t(frame) + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return std::uint32_t(z ^ (z >> 31));
}

void append_waypoint_debug(const std::string& path, int frame,
                           const WaypointArray& bev, const WaypointArray& global) {
  std::ofstream out(path, std::ios::app);
  if (!out) return;
  if (out.tellp() == 0)
    out << "frame_index,i,bev_x_px,bev_y_px,global_x_m,global_y_m,psi2_rad\n";
  char line[256];
  for (std::size_t i = 0; i < bev.size(); ++i) {
    std::snprintf(line, sizeof(line), "%d,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", frame,
                  i + 1, bev.pts[i].pos.x, bev.pts[i].pos.y, global.pts[i].pos.x,
                  global.pts[i].pos.y, global.pts[i].psi2);
    out << line;
  }
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  cfg.validate();

  const long steps = std::lround(cfg.duration / cfg.dt);
  const bool dump = opt.dump_frames && !opt.out_dir.empty();
  if (dump) std::filesystem::create_directories(opt.out_dir);

  RunReport report;
  report.lanes = cfg.world.lanes;

  VehicleState vehicle{cfg.initial_pose, DriveMode::Towing};
  PoseSensor sensor(cfg.sensor);
  TrackingState tracking;
  tracking.exhausted = true;  // nothing to track until the first frame

  const Homography image_to_bev = cfg.render.warp().inverse();
  int frame_counter = 0;
  int last_frame_id = -1;
  long waypoint_updates = 0, frames_processed = 0, lane_lost = 0;

  for (long step = 0; step < steps; ++step) {
    const double t = double(step) * cfg.dt;
    const Pose2 true_robot = robot_pose_from_wheelchair(vehicle.wheelchair_pose, cfg.geometry);
    const Pose2 est_robot = sensor.read(true_robot);

    const bool blackout =
        cfg.frame_blackout && t >= cfg.frame_blackout->first && t < cfg.frame_blackout->second;
    if (step % cfg.control_steps_per_frame == 0 && !blackout) {
      const std::uint32_t fseed = frame_seed(cfg.seed, frame_counter);
      const RgbImage img = render_ground_view(cfg.world, true_robot, cfg.render, fseed);
      const RgbImage bev =
          warp_to_bev(img, image_to_bev, cfg.render.bev_width, cfg.render.bev_height);
      const QuantizeResult quant = quantize_colors(bev, cfg.color_model.k, fseed + 1);
      const BinaryMask raw_mask = binarize_hue(rgb_to_hsv(quant.image), cfg.color_model);
      const BinaryMask mask = filter_small_components(raw_mask, cfg.planner.min_area);
      const ExtractResult extracted = extract_waypoints(
          mask, cfg.planner.r_px, cfg.planner.n_max, cfg.planner.turn_preference);

      ++frames_processed;
      last_frame_id = frame_counter;

      if (extracted.status != LaneStatus::Ok) {
        if (step == 0) {
          report.status = RunStatus::LaneNotFound;
          report.metrics = compute_metrics(report.records);
          report.metrics.frames_processed = frames_processed;
          return report;
        }
        ++lane_lost;  // keep driving the previous array
      } else {
        const auto branch = detect_intersection(mask, extracted.waypoints,
                                                cfg.planner.r_px, cfg.planner.turn_threshold);
        bool adopt = false;
        WaypointArray bev_wps;
        bool latch = false;
        if (tracking.arc_latch) {
          // Frozen until a fresh frame recognizes a plain straight lane:
          // no intersection, enough waypoints to have judged one, and the
          // lane running ahead (straight up the BEV) rather than across it.
          bool straight_ahead = !branch && extracted.waypoints.size() >= 3;
          for (std::size_t i = 0; straight_ahead && i + 1 < extracted.waypoints.size(); ++i) {
            const Vec2 d = extracted.waypoints.pts[i + 1].pos - extracted.waypoints.pts[i].pos;
            straight_ahead =
                std::abs(wrap_angle(d.angle() + M_PI / 2.0)) < cfg.planner.turn_threshold;
          }
          if (straight_ahead) {
            adopt = true;
            bev_wps = extracted.waypoints;
          }
        } else if (branch) {
          const double delta =
              std::abs(wrap_angle(branch->d2.angle() - branch->d1.angle()));
          if (delta < M_PI - 1e-3) {
            const IntersectionArc arc = build_virtual_arc(
                branch->q, branch->d1, branch->d2, cfg.planner.r_arc_px,
                cfg.planner.turn_threshold);
            bev_wps = splice_arc(extracted.waypoints, *branch, arc, cfg.planner.r_px);
            adopt = true;
            latch = true;
          }
        } else {
          adopt = true;
          bev_wps = extracted.waypoints;
        }
        if (adopt && !bev_wps.empty()) {
          tracking.waypoints = waypoints_to_global(bev_wps, est_robot, cfg.extrinsics);
          tracking.target_index = 1;
          tracking.arc_latch = latch;
          tracking.exhausted = false;
          if (dump && frame_counter % opt.frame_stride == 0)
            append_waypoint_debug(opt.out_dir + "/waypoints.csv", frame_counter,
                                  bev_wps, tracking.waypoints);
        }
      }

      if (dump && frame_counter % opt.frame_stride == 0) {
        write_ppm(img, opt.out_dir + "/frame_" + std::to_string(frame_counter) + ".ppm");
        write_ppm(mask, opt.out_dir + "/frame_" + std::to_string(frame_counter) + "_mask.ppm");
      }
      ++frame_counter;
    }

    const int index_before = tracking.exhausted ? 0 : tracking.target_index;
    const ControlOutput out = control_step(tracking, est_robot, cfg.gains, cfg.geometry);
    if (!tracking.exhausted && tracking.target_index > index_before && index_before > 0)
      waypoint_updates += tracking.target_index - index_before;

    const double slip = slip_check(out.cmd, cfg.geometry);
    if (std::abs(slip) > 1e-9)
      throw InvariantViolation("towing command violates the no-slip constraint");

    StepRecord rec;
    rec.t = t;
    rec.true_pose = true_robot;
    rec.est_pose = est_robot;
    rec.target_index = tracking.exhausted ? 0 : tracking.target_index;
    if (!tracking.exhausted)
      rec.target = tracking.waypoints.pts[tracking.target_index - 1].pos;
    rec.psi1 = out.psi1;
    rec.psi2 = out.psi2;
    const Vec2 axle{vehicle.wheelchair_pose.x, vehicle.wheelchair_pose.y};
    rec.cross_track = nearest_lane_cross_track(cfg.world, axle).value_or(0.0);
    rec.cmd = out.cmd;
    rec.wheels =
        wheel_speeds_from_twist(tow_twist_from_wheelchair_command(out.cmd, cfg.geometry),
                                cfg.geometry);
    rec.arc_latch = tracking.arc_latch;
    rec.frame_id = last_frame_id;
    report.records.push_back(rec);

    vehicle = step_towing(vehicle, out.cmd, cfg.dt);
  }

  report.metrics = compute_metrics(report.records);
  report.metrics.waypoint_updates = waypoint_updates;
  report.metrics.frames_processed = frames_processed;
  report.metrics.lane_lost_events = lane_lost;

  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    emit_trajectory_csv(report, opt.out_dir + "/trajectory.csv");
    emit_svg_plot(report, opt.out_dir + "/trajectory.svg");
    emit_metrics_txt(report.metrics, opt.out_dir + "/metrics.txt");
  }
  return report;
}

RunMetrics compute_metrics(const std::vector<StepRecord>& records) {
  RunMetrics m;
  if (records.empty()) return m;

  double sum_sq = 0.0;
  for (const StepRecord& r : records) {
    sum_sq += r.cross_track * r.cross_track;
    m.max_cross_track = std::max(m.max_cross_track, std::abs(r.cross_track));
  }
  m.cross_track_rms = std::sqrt(sum_sq / records.size());
  m.final_heading = records.back().true_pose.psi;

  // Arc length along the true trajectory, per record.
  std::vector<double> s(records.size(), 0.0);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const Vec2 a{records[i - 1].true_pose.x, records[i - 1].true_pose.y};
    const Vec2 b{records[i].true_pose.x, records[i].true_pose.y};
    s[i] = s[i - 1] + (b - a).norm();
  }
  const double total = s.back();

  // First arc length from which |cross_track| < 0.03 holds for >= 1 m.
  m.settle_distance = total;
  std::size_t window_start = 0;
  bool inside = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (std::abs(records[i].cross_track) < 0.03) {
      if (!inside) {
        inside = true;
        window_start = i;
      }
      if (s[i] - s[window_start] >= 1.0) {
        m.settle_distance = s[window_start];
        break;
      }
    } else {
      inside = false;
    }
  }
  if (std::abs(records.front().cross_track) < 0.03 && m.settle_distance == total &&
      !records.empty() && total < 1.0) {
    // Degenerate short runs that start settled.
    bool always = true;
    for (const StepRecord& r : records) always = always && std::abs(r.cross_track) < 0.03;
    if (always) m.settle_distance = 0.0;
  }
  return m;
}

void emit_trajectory_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t,true_x,true_y,true_psi,est_x,est_y,est_psi,target_x,target_y,"
         "target_index,psi1,psi2,cross_track,v_w,omega_w,w1,w2,w3,w4,arc_latch,"
         "frame_id\n";
  char line[512];
  for (const StepRecord& r : report.records) {
    std::snprintf(line, sizeof(line),
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%.6f,%.6f,"
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d\n",
                  r.t, r.true_pose.x, r.true_pose.y, r.true_pose.psi, r.est_pose.x,
                  r.est_pose.y, r.est_pose.psi, r.target.x, r.target.y,
                  r.target_index, r.psi1, r.psi2, r.cross_track, r.cmd.v_w,
                  r.cmd.omega_w, r.wheels.w1, r.wheels.w2, r.wheels.w3, r.wheels.w4,
                  r.arc_latch ? 1 : 0, r.frame_id);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_metrics_txt(const RunMetrics& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "cross_track_rms=%.6f\nmax_cross_track=%.6f\nsettle_distance=%.6f\n"
                "final_heading=%.6f\nwaypoint_updates=%ld\nframes_processed=%ld\n"
                "lane_lost_events=%ld\n",
                m.cross_track_rms, m.max_cross_track, m.settle_distance,
                m.final_heading, m.waypoint_updates, m.frames_processed,
                m.lane_lost_events);
  out << buf;
}

namespace {

struct Bounds {
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  void add(double x, double y) {
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  }
};

void write_polyline(std::ofstream& out, const std::vector<Vec2>& pts,
                    const Bounds& b, const char* color, const char* label) {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"0.02\" points=\"";
  char buf[64];
  for (const Vec2& p : pts) {
    std::snprintf(buf, sizeof(buf), "%.4f,%.4f ", p.x, b.max_y + b.min_y - p.y);
    out << buf;
  }
  out << "\"><title>" << label << "</title></polyline>\n";
}

}  // namespace

void emit_svg_plot(const RunReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  Bounds b;
  for (const Lane& lane : report.lanes)
    for (const Vec2& p : lane.centerline) b.add(p.x, p.y);
  for (const StepRecord& r : report.records) {
    b.add(r.true_pose.x, r.true_pose.y);
    b.add(r.est_pose.x, r.est_pose.y);
  }
  if (b.min_x > b.max_x) b = Bounds{}, b.add(0, 0), b.add(1, 1);
  const double pad = 0.5;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.4f %.4f %.4f %.4f\">\n",
                b.min_x - pad, b.min_y - pad, b.max_x - b.min_x + 2 * pad,
                b.max_y - b.min_y + 2 * pad);
  out << buf;

  // Axes through the origin of the padded viewport.
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"#ccc\" "
                "stroke-width=\"0.01\"/>\n",
                b.min_x - pad, b.max_y + b.min_y, b.max_x + pad, b.max_y + b.min_y);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"#ccc\" "
                "stroke-width=\"0.01\"/>\n",
                0.0, b.min_y - pad, 0.0, b.max_y + pad);
  out << buf;

  if (!report.records.empty()) {
    for (const Lane& lane : report.lanes)
      write_polyline(out, lane.centerline, b, "#888", "lane");

    std::vector<Vec2> targets;
    for (const StepRecord& r : report.records)
      if (r.target_index > 0 &&
          (targets.empty() || (targets.back() - r.target).norm() > 1e-9))
        targets.push_back(r.target);
    write_polyline(out, targets, b, "#2a7", "waypoints");

    std::vector<Vec2> true_tr, est_tr;
    for (const StepRecord& r : report.records) {
      true_tr.push_back({r.true_pose.x, r.true_pose.y});
      est_tr.push_back({r.est_pose.x, r.est_pose.y});
    }
    write_polyline(out, true_tr, b, "#16c", "true");
    write_polyline(out, est_tr, b, "#c61", "estimated");
  }
  out << "</svg>\n";
}

}  // namespace towbot

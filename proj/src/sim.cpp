#include "towbot/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace towbot {

void WorldMap::validate() const {
  for (const Lane& lane : lanes) {
    if (lane.centerline.size() < 2)
      throw std::invalid_argument("Lane: centerline needs >= 2 points");
    if (lane.width <= 0) throw std::invalid_argument("Lane: width must be > 0");
  }
}

double signed_lane_distance(const Lane& lane, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  double best_sign = 1.0;
  for (std::size_t i = 0; i + 1 < lane.centerline.size(); ++i) {
    const Vec2 a = lane.centerline[i], b = lane.centerline[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 closest = a + ab * t;
    const double d = (p - closest).norm();
    if (d < best) {
      best = d;
      best_sign = ab.cross(p - a) >= 0 ? 1.0 : -1.0;
    }
  }
  return best_sign * best;
}

std::optional<double> nearest_lane_cross_track(const WorldMap& w, const Vec2& p) {
  std::optional<double> best;
  for (const Lane& lane : w.lanes) {
    const double d = signed_lane_distance(lane, p);
    if (!best || std::abs(d) < std::abs(*best)) best = d;
  }
  return best;
}

Pose2 robot_pose_from_wheelchair(const Pose2& wheelchair, const RobotGeometry& g) {
  return {wheelchair.x + g.l_v * std::cos(wheelchair.psi),
          wheelchair.y + g.l_v * std::sin(wheelchair.psi), wheelchair.psi};
}

Pose2 wheelchair_pose_from_robot(const Pose2& robot, const RobotGeometry& g) {
  return {robot.x - g.l_v * std::cos(robot.psi),
          robot.y - g.l_v * std::sin(robot.psi), robot.psi};
}

VehicleState step_towing(const VehicleState& s, const TowCommand& c, double dt) {
  if (dt <= 0) throw std::invalid_argument("step_towing: dt must be > 0");
  const Pose2& p = s.wheelchair_pose;
  VehicleState out = s;
  if (std::abs(c.omega_w) < 1e-9) {
    out.wheelchair_pose = {p.x + c.v_w * dt * std::cos(p.psi),
                           p.y + c.v_w * dt * std::sin(p.psi), p.psi};
  } else {
    const double radius = c.v_w / c.omega_w;
    const double psi1 = p.psi + c.omega_w * dt;
    out.wheelchair_pose = {p.x + radius * (std::sin(psi1) - std::sin(p.psi)),
                           p.y - radius * (std::cos(psi1) - std::cos(p.psi)), psi1};
  }
  return out;
}

VehicleState step_standalone(const VehicleState& s, const Twist2& t, double dt) {
  if (dt <= 0) throw std::invalid_argument("step_standalone: dt must be > 0");
  // Heading-aligned frame: X forward, Y left; body e1 points right.
  const double u = t.vy;
  const double w = -t.vx;
  double dx, dy;
  if (std::abs(t.omega) < 1e-12) {
    dx = u * dt;
    dy = w * dt;
  } else {
    const double th = t.omega * dt;
    dx = (u * std::sin(th) + w * (std::cos(th) - 1.0)) / t.omega;
    dy = (u * (1.0 - std::cos(th)) + w * std::sin(th)) / t.omega;
  }
  const Pose2& p = s.wheelchair_pose;
  const double cp = std::cos(p.psi), sp = std::sin(p.psi);
  VehicleState out = s;
  out.wheelchair_pose = {p.x + cp * dx - sp * dy, p.y + sp * dx + cp * dy,
                         p.psi + t.omega * dt};
  return out;
}

Homography RenderConfig::warp() const {
  const std::array<Vec2, 4> bev{
      Vec2{0, 0}, Vec2{double(bev_width - 1), 0},
      Vec2{double(bev_width - 1), double(bev_height - 1)},
      Vec2{0, double(bev_height - 1)}};
  return Homography::from_corners(bev, bev_corners_in_image);
}

namespace {

Rgb sample_world(const WorldMap& w, const Vec2& g) {
  // Later lanes draw over earlier ones.
  Rgb c = w.floor_color;
  for (const Lane& lane : w.lanes)
    if (std::abs(signed_lane_distance(lane, g)) <= lane.width / 2.0) c = lane.color;
  return c;
}

std::uint8_t clamp8(double v) {
  return std::uint8_t(std::clamp(std::lround(v), 0l, 255l));
}

}  // namespace

RgbImage render_ground_view(const WorldMap& w, const Pose2& robot_true_pose,
                            const RenderConfig& cfg, std::uint32_t seed) {
  w.validate();
  cfg.extrinsics.validate();
  const Homography bev_to_image = cfg.warp();
  const Homography image_to_bev = bev_to_image.inverse();
  const Transform2 chain = pose_to_transform(robot_true_pose) * cfg.extrinsics.t_c2_c1;

  RgbImage img(cfg.image_width, cfg.image_height);
  for (int v = 0; v < cfg.image_height; ++v)
    for (int u = 0; u < cfg.image_width; ++u) {
      const Vec2 bev = image_to_bev.apply({double(u), double(v)});
      const Vec2 ground = chain.apply(bev * cfg.extrinsics.s + cfg.extrinsics.b);
      img.at(u, v) = sample_world(w, ground);
    }

  // Noise menu: glare ellipses, shadow gradient, per-pixel hue jitter.
  for (const GlareEllipse& e : cfg.glare)
    for (int v = 0; v < cfg.image_height; ++v)
      for (int u = 0; u < cfg.image_width; ++u) {
        const double nx = (u - e.cx) / e.rx, ny = (v - e.cy) / e.ry;
        if (nx * nx + ny * ny > 1.0) continue;
        Rgb& c = img.at(u, v);
        c = {clamp8(c.r + e.strength), clamp8(c.g + e.strength),
             clamp8(c.b + e.strength)};
      }

  if (cfg.shadow_gradient != 0.0)
    for (int v = 0; v < cfg.image_height; ++v) {
      const double f = std::clamp(
          1.0 - cfg.shadow_gradient * double(v) / (cfg.image_height - 1), 0.0, 1.0);
      for (int u = 0; u < cfg.image_width; ++u) {
        Rgb& c = img.at(u, v);
        c = {clamp8(c.r * f), clamp8(c.g * f), clamp8(c.b * f)};
      }
    }

  if (cfg.hue_jitter_sigma > 0.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> jitter(0.0, cfg.hue_jitter_sigma * 360.0 / 255.0);
    for (int v = 0; v < cfg.image_height; ++v)
      for (int u = 0; u < cfg.image_width; ++u) {
        Hsv p = rgb_to_hsv(img.at(u, v));
        p.h = std::fmod(p.h + jitter(rng) + 720.0, 360.0);
        img.at(u, v) = hsv_to_rgb(p);
      }
  }
  return img;
}

BinaryMask render_truth_mask(const WorldMap& w, const Pose2& robot_true_pose,
                             const RenderConfig& cfg, const ColorModel& m) {
  w.validate();
  const Transform2 chain = pose_to_transform(robot_true_pose) * cfg.extrinsics.t_c2_c1;
  BinaryMask mask(cfg.bev_width, cfg.bev_height);
  for (int v = 0; v < cfg.bev_height; ++v)
    for (int u = 0; u < cfg.bev_width; ++u) {
      const Vec2 ground =
          chain.apply(Vec2{double(u), double(v)} * cfg.extrinsics.s + cfg.extrinsics.b);
      bool hit = false;
      for (const Lane& lane : w.lanes) {
        const Hsv lc = rgb_to_hsv(lane.color);
        if (lc.s < m.sat_min || lc.v < m.val_min || !hue_in_range(lc.h, m)) continue;
        if (std::abs(signed_lane_distance(lane, ground)) <= lane.width / 2.0) hit = true;
      }
      mask.set(u, v, hit);
    }
  return mask;
}

PoseSensor::PoseSensor(const PoseSensorModel& model) : model_(model), rng_(model.seed) {
  model_.validate();
}

Pose2 PoseSensor::read(const Pose2& true_pose) {
  const Pose2 out{true_pose.x + bias_.x, true_pose.y + bias_.y,
                  true_pose.psi + bias_.psi};
  std::normal_distribution<double> nxy(0.0, 1.0);
  bias_.x += model_.sigma_walk_xy * nxy(rng_);
  bias_.y += model_.sigma_walk_xy * nxy(rng_);
  bias_.psi = wrap_angle(bias_.psi + model_.sigma_walk_psi * nxy(rng_));
  return out;
}

Pose2 read_pose_sensor(const Pose2& true_pose, const PoseSensorModel& model, int step) {
  PoseSensor sensor(model);
  Pose2 out = true_pose;
  for (int i = 0; i <= step; ++i) out = sensor.read(true_pose);
  return out;
}

double slip_check(const TowCommand& c, const RobotGeometry& g) {
  return main_wheel_slip(tow_twist_from_wheelchair_command(c, g), g);
}

}  // namespace towbot

#include "towbot/planner.hpp"

#include <algorithm>
#include <cmath>

namespace towbot {

namespace {

struct Candidate {
  Vec2 pos;
  double progress{0.0};  // distance from the previous waypoint
  double turn{0.0};      // heading change vs the previous step
  double side{0.0};      // cross(prev_dir, new_dir); >0 turns CCW in raster
};

// Midpoints of the contiguous foreground runs met by a circle of radius r.
std::vector<Vec2> circle_run_midpoints(const BinaryMask& mask, const Vec2& c,
                                       double r) {
  const int n = std::max(96, int(std::lround(4.0 * M_PI * r)));
  std::vector<char> fg(n);
  bool any = false, all = true;
  for (int j = 0; j < n; ++j) {
    const double a = 2.0 * M_PI * j / n;
    const int x = int(std::lround(c.x + r * std::cos(a)));
    const int y = int(std::lround(c.y + r * std::sin(a)));
    fg[j] = mask.in_bounds(x, y) && mask.get(x, y);
    any = any || fg[j];
    all = all && fg[j];
  }
  if (!any) return {};
  if (all) return {c + Vec2{0.0, -r}};  // circle buried in the blob: keep going up

  // Rotate so the scan starts on a background sample, then collect runs.
  int offset = 0;
  while (fg[offset]) ++offset;
  std::vector<Vec2> mids;
  int run_start = -1;
  for (int i = 0; i <= n; ++i) {
    const int j = (offset + i) % n;
    if (i < n && fg[j]) {
      if (run_start < 0) run_start = i;
    } else if (run_start >= 0) {
      const double mid = run_start + (i - 1 - run_start) / 2.0;
      const double a = 2.0 * M_PI * std::fmod(offset + mid, double(n)) / n;
      mids.push_back(c + Vec2{r * std::cos(a), r * std::sin(a)});
      run_start = -1;
    }
  }
  return mids;
}

}  // namespace

ExtractResult extract_waypoints(const BinaryMask& mask, double r_px, int n_max,
                                int turn_preference) {
  if (r_px <= 0) throw std::invalid_argument("extract_waypoints: r must be > 0");
  if (n_max < 1) throw std::invalid_argument("extract_waypoints: n_max must be >= 1");

  // Start pixel: midpoint of the widest foreground run in the lowermost row.
  int start_row = -1;
  for (int y = mask.height() - 1; y >= 0 && start_row < 0; --y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.get(x, y)) {
        start_row = y;
        break;
      }
  if (start_row < 0) return {LaneStatus::NoLane, {}};

  int best_start = -1, best_len = 0;
  for (int x = 0; x < mask.width();) {
    if (!mask.get(x, start_row)) {
      ++x;
      continue;
    }
    int x0 = x;
    while (x < mask.width() && mask.get(x, start_row)) ++x;
    if (x - x0 > best_len) {
      best_len = x - x0;
      best_start = x0;
    }
  }
  if (best_len < 2) return {LaneStatus::DegenerateLane, {}};

  WaypointArray out;
  Vec2 cur{best_start + (best_len - 1) / 2.0, double(start_row)};
  out.pts.push_back({cur, FrameId::Bev, 0.0});

  // Virtual predecessor below the start point biases the first step upward.
  Vec2 prev = cur + Vec2{0.0, r_px};
  double prev_dir = -M_PI / 2.0;

  while (int(out.pts.size()) < n_max) {
    std::vector<Candidate> cands;
    double max_progress = 0.0;
    for (const Vec2& p : circle_run_midpoints(mask, cur, r_px)) {
      Candidate c;
      c.pos = p;
      c.progress = (p - prev).norm();
      const Vec2 d = (p - cur).normalized();
      c.turn = std::abs(wrap_angle(d.angle() - prev_dir));
      c.side = Vec2{std::cos(prev_dir), std::sin(prev_dir)}.cross(d);
      cands.push_back(c);
      max_progress = std::max(max_progress, c.progress);
    }
    // Progress gate: anything not clearly ahead of the previous waypoint is
    // a backward or sideways re-entry into already-covered lane.
    std::erase_if(cands, [&](const Candidate& c) { return c.progress <= 1.1 * r_px; });
    if (cands.empty()) break;

    const Candidate* best = &cands[0];
    for (const Candidate& c : cands) {
      const bool tie = std::abs(c.progress - best->progress) < 2.0;
      if (!tie) {
        if (c.progress > best->progress) best = &c;
        continue;
      }
      // Same-color fork: config preference decides.
      bool better = false;
      if (turn_preference < 0)
        better = c.side > best->side;
      else if (turn_preference > 0)
        better = c.side < best->side;
      else
        better = c.turn < best->turn;
      if (better) best = &c;
    }

    prev = cur;
    prev_dir = (best->pos - cur).angle();
    cur = best->pos;
    out.pts.push_back({cur, FrameId::Bev, 0.0});
  }

  // psi2: direction to the next waypoint; the last one reuses its predecessor.
  for (std::size_t i = 0; i + 1 < out.pts.size(); ++i)
    out.pts[i].psi2 = (out.pts[i + 1].pos - out.pts[i].pos).angle();
  if (out.pts.size() > 1)
    out.pts.back().psi2 = out.pts[out.pts.size() - 2].psi2;
  else
    out.pts.back().psi2 = -M_PI / 2.0;

  return {LaneStatus::Ok, std::move(out)};
}

std::optional<BranchGeometry> detect_intersection(const BinaryMask& /*mask*/,
                                                  const WaypointArray& wp,
                                                  double /*r_px*/,
                                                  double turn_threshold) {
  const int n = int(wp.size());
  if (n < 3) return std::nullopt;

  std::vector<Vec2> dirs(n - 1);
  for (int i = 0; i + 1 < n; ++i)
    dirs[i] = (wp.pts[i + 1].pos - wp.pts[i].pos).normalized();

  int k = -1;
  double max_turn = 0.0;
  for (int i = 0; i + 1 < int(dirs.size()); ++i) {
    const double t = std::abs(wrap_angle(dirs[i + 1].angle() - dirs[i].angle()));
    if (t > max_turn) {
      max_turn = t;
      k = i;
    }
  }
  if (k < 0 || max_turn <= turn_threshold) return std::nullopt;

  // A sharp corner can be smeared across a couple of steps (a diagonal
  // transition waypoint); grow the turning region around the peak and fit
  // the legs from the straight runs on either side of it.
  int a = k, b = k;
  auto turn_at = [&](int i) {
    return std::abs(wrap_angle(dirs[i + 1].angle() - dirs[i].angle()));
  };
  while (a > 0 && turn_at(a - 1) > turn_threshold / 2.0) --a;
  while (b + 2 < int(dirs.size()) && turn_at(b + 1) > turn_threshold / 2.0) ++b;

  Vec2 d1{0, 0}, d2{0, 0};
  Vec2 c1{0, 0}, c2{0, 0};
  for (int i = 0; i <= a; ++i) d1 = d1 + dirs[i];
  for (int i = b + 1; i < int(dirs.size()); ++i) d2 = d2 + dirs[i];
  d1 = d1.normalized();
  d2 = d2.normalized();
  for (int i = 0; i <= a + 1; ++i) c1 = c1 + wp.pts[i].pos * (1.0 / (a + 2));
  const int m2 = n - (b + 1);
  for (int i = b + 1; i < n; ++i) c2 = c2 + wp.pts[i].pos * (1.0 / m2);

  const double denom = d1.cross(d2);
  if (std::abs(denom) < 1e-9) return std::nullopt;
  const double t = (c2 - c1).cross(d2) / denom;
  return BranchGeometry{c1 + d1 * t, d1, d2, k + 1};
}

double IntersectionArc::sweep() const {
  const double raw = direction > 0 ? end_angle - start_angle
                                   : start_angle - end_angle;
  double s = std::fmod(raw, 2.0 * M_PI);
  if (s < 0) s += 2.0 * M_PI;
  return s;
}

IntersectionArc build_virtual_arc(const Vec2& q, const Vec2& d1, const Vec2& d2,
                                  double r_arc, double turn_threshold) {
  if (r_arc <= 0) throw std::invalid_argument("build_virtual_arc: r_arc must be > 0");
  const double delta = std::abs(wrap_angle(d2.angle() - d1.angle()));
  if (delta <= turn_threshold)
    throw std::invalid_argument("build_virtual_arc: near-straight directions");
  if (delta >= M_PI - 1e-3)
    throw std::invalid_argument("build_virtual_arc: near-reversal directions");

  const double tangent_dist = r_arc * std::tan(delta / 2.0);
  const Vec2 t1 = q - d1 * tangent_dist;
  const Vec2 t2 = q + d2 * tangent_dist;
  const int side = d1.cross(d2) > 0 ? 1 : -1;
  const Vec2 center = t1 + d1.perp() * (side * r_arc);

  IntersectionArc arc;
  arc.center = center;
  arc.radius = r_arc;
  arc.start_angle = (t1 - center).angle();
  arc.end_angle = (t2 - center).angle();
  arc.direction = side;
  return arc;
}

WaypointArray sample_arc_waypoints(const IntersectionArc& arc, double r_px) {
  if (r_px > 2.0 * arc.radius)
    throw std::invalid_argument("sample_arc_waypoints: chord exceeds diameter");
  const double step = 2.0 * std::asin(r_px / (2.0 * arc.radius));
  const double total = arc.sweep();

  WaypointArray out;
  auto push_at = [&](double a) {
    const Vec2 pos = arc.center + Vec2{std::cos(a), std::sin(a)} * arc.radius;
    const double psi2 = wrap_angle(a + arc.direction * M_PI / 2.0);
    out.pts.push_back({pos, FrameId::Bev, psi2});
  };
  double covered = step;
  while (covered < total - 1e-9) {
    push_at(arc.start_angle + arc.direction * covered);
    covered += step;
  }
  push_at(arc.start_angle + arc.direction * total);  // arc end
  return out;
}

WaypointArray splice_arc(const WaypointArray& wp, const BranchGeometry& branch,
                         const IntersectionArc& arc, double r_px) {
  const double delta = std::abs(wrap_angle(branch.d2.angle() - branch.d1.angle()));
  const double tangent_dist = arc.radius * std::tan(delta / 2.0);

  WaypointArray out;
  for (const Waypoint& w : wp.pts)
    if ((w.pos - branch.q).dot(branch.d1) < -tangent_dist) out.pts.push_back(w);

  const WaypointArray arc_pts = sample_arc_waypoints(arc, r_px);
  out.pts.insert(out.pts.end(), arc_pts.pts.begin(), arc_pts.pts.end());

  // Original waypoints already on the outgoing leg, ordered by progress.
  std::vector<const Waypoint*> tail;
  for (const Waypoint& w : wp.pts) {
    const Vec2 rel = w.pos - branch.q;
    if (rel.dot(branch.d2) > tangent_dist && std::abs(branch.d2.cross(rel)) < r_px)
      tail.push_back(&w);
  }
  std::sort(tail.begin(), tail.end(), [&](const Waypoint* a, const Waypoint* b) {
    return (a->pos - branch.q).dot(branch.d2) < (b->pos - branch.q).dot(branch.d2);
  });
  for (const Waypoint* w : tail) out.pts.push_back(*w);
  return out;
}

Vec2 bev_to_camera(const Vec2& p_bev, const CameraExtrinsics& e) {
  e.validate();
  return p_bev * e.s + e.b;
}

Vec2 camera_to_global(const Vec2& p_c1, const Pose2& robot_pose_estimate,
                      const CameraExtrinsics& e) {
  return (pose_to_transform(robot_pose_estimate) * e.t_c2_c1).apply(p_c1);
}

WaypointArray waypoints_to_global(const WaypointArray& bev,
                                  const Pose2& robot_pose_estimate,
                                  const CameraExtrinsics& e) {
  e.validate();
  const Transform2 chain = pose_to_transform(robot_pose_estimate) * e.t_c2_c1;
  const double rot = chain.rotation_angle();
  WaypointArray out;
  out.pts.reserve(bev.size());
  for (const Waypoint& w : bev.pts) {
    out.pts.push_back({chain.apply(w.pos * e.s + e.b), FrameId::Global,
                       wrap_angle(w.psi2 + rot)});
  }
  return out;
}

}  // namespace towbot

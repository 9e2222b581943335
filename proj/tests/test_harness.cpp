#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "towbot/harness.hpp"

using namespace towbot;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig straight_cfg() {
  ScenarioConfig c;
  Lane lane;
  lane.centerline = {{-1.0, 0.0}, {25.0, 0.0}};
  c.world.lanes.push_back(lane);
  c.color_model.hue_min = 350.0;
  c.color_model.hue_max = 10.0;
  c.extrinsics = centered_extrinsics(256, 256, 0.01, 0.3);
  c.render.extrinsics = c.extrinsics;
  c.duration = 5.0;
  c.initial_pose = {0.0, 0.0, 0.0};
  return c;
}

std::vector<StepRecord> trace_along_x(int n, double ds,
                                      const std::function<double(double)>& ct) {
  std::vector<StepRecord> records(n);
  for (int i = 0; i < n; ++i) {
    records[i].t = i * 0.02;
    records[i].true_pose = {i * ds, 0.0, 0.0};
    records[i].cross_track = ct(i * ds);
  }
  return records;
}

}  // namespace

TEST_CASE("parse_scenario reads the reference config") {
  const ScenarioConfig c = parse_scenario("scenarios/straight_then_corner.cfg");
  REQUIRE(c.world.lanes.size() == 1);
  CHECK(c.world.lanes[0].centerline.size() == 3);
  CHECK(c.world.lanes[0].centerline[1].x == doctest::Approx(5.0));
  CHECK(c.world.lanes[0].width == doctest::Approx(0.10));
  CHECK(c.color_model.k == 3);
  CHECK(c.color_model.hue_min == doctest::Approx(350.0));
  CHECK(c.duration == doctest::Approx(26.0));
  CHECK(c.seed == 2);
  // Auto-derived extrinsics center the footprint ahead of the robot.
  CHECK(c.extrinsics.s == doctest::Approx(0.01));
  CHECK(c.extrinsics.b.x == doctest::Approx(-0.01 * 255 / 2.0));
  CHECK(c.extrinsics.b.y == doctest::Approx(-0.3 - 0.01 * 255));
  CHECK(c.extrinsics.t_c2_c1.rotation_angle() == doctest::Approx(M_PI / 2));
}

TEST_CASE("parse_scenario rejects bad input") {
  CHECK_THROWS_AS(parse_scenario("scenarios/does_not_exist.cfg"), ScenarioError);

  const std::string dir = "/tmp/towbot_cfg_tests";
  std::filesystem::create_directories(dir);
  auto write_cfg = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir + "/" + name);
    out << body;
    return dir + "/" + name;
  };
  CHECK_THROWS_AS(parse_scenario(write_cfg("bad_key.cfg", "[world]\nbogus = 1\n")),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario(write_cfg("bad_sec.cfg", "[nope]\n")), ScenarioError);
  CHECK_THROWS_AS(
      parse_scenario(write_cfg("bad_num.cfg", "[run]\ndt = fast\n")), ScenarioError);
  // duration must be an integer number of steps.
  CHECK_THROWS_AS(parse_scenario(write_cfg("bad_dur.cfg",
                                           "[lane]\npoint = 0 0\npoint = 1 0\n"
                                           "[run]\ndt = 0.02\nduration = 0.03\n")),
                  ScenarioError);
}

TEST_CASE("config validation") {
  ScenarioConfig c = straight_cfg();
  CHECK_NOTHROW(c.validate());
  c.gains.v_cruise = -1.0;
  CHECK_THROWS_AS(c.validate(), ScenarioError);
  c = straight_cfg();
  c.color_model.k = 1;
  CHECK_THROWS_AS(c.validate(), ScenarioError);
}

TEST_CASE("compute_metrics on synthetic traces") {
  auto zero = trace_along_x(200, 0.01, [](double) { return 0.0; });
  RunMetrics m = compute_metrics(zero);
  CHECK(m.cross_track_rms == doctest::Approx(0.0));
  CHECK(m.settle_distance == doctest::Approx(0.0));

  auto off = trace_along_x(200, 0.01, [](double) { return 0.1; });
  m = compute_metrics(off);
  CHECK(m.cross_track_rms == doctest::Approx(0.1));
  CHECK(m.max_cross_track == doctest::Approx(0.1));
  // Never settles: settle distance equals the distance traveled.
  CHECK(m.settle_distance == doctest::Approx(1.99));

  // Decaying exponential: RMS matches the analytic mean square within 1%.
  const int n = 1001;
  const double ds = 0.01, total = (n - 1) * ds;
  auto decay = trace_along_x(n, ds, [](double s) { return 0.3 * std::exp(-s); });
  m = compute_metrics(decay);
  const double analytic =
      std::sqrt(0.09 * (1.0 - std::exp(-2.0 * total)) / (2.0 * total));
  CHECK(m.cross_track_rms == doctest::Approx(analytic).epsilon(0.01));
  // |ct| < 0.03 from s = ln(10) on.
  CHECK(m.settle_distance == doctest::Approx(std::log(10.0)).epsilon(0.01));
}

TEST_CASE("compute_metrics of an empty record list") {
  const RunMetrics m = compute_metrics({});
  CHECK(m.cross_track_rms == 0.0);
  CHECK(m.settle_distance == 0.0);
}

TEST_CASE("run_scenario: clean straight lane tracks tightly") {
  const RunReport r = run_scenario(straight_cfg());
  CHECK(r.status == RunStatus::Ok);
  CHECK(r.records.size() == 250);
  CHECK(r.metrics.cross_track_rms < 0.01);
  CHECK(r.metrics.lane_lost_events == 0);
  // Trajectory continuity: per-step displacement bounded by v_cruise * dt.
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    const Vec2 a{r.records[i - 1].true_pose.x, r.records[i - 1].true_pose.y};
    const Vec2 b{r.records[i].true_pose.x, r.records[i].true_pose.y};
    CHECK((b - a).norm() <= 0.5 * 0.02 + 1e-9);
  }
  // Metrics are recomputable from the records.
  const RunMetrics again = compute_metrics(r.records);
  CHECK(again.cross_track_rms == r.metrics.cross_track_rms);
  CHECK(again.settle_distance == r.metrics.settle_distance);
}

TEST_CASE("run_scenario: no lane in view terminates immediately") {
  ScenarioConfig c = straight_cfg();
  c.initial_pose = {0.0, 50.0, 0.0};  // far from any lane
  const RunReport r = run_scenario(c);
  CHECK(r.status == RunStatus::LaneNotFound);
  CHECK(r.records.empty());
}

TEST_CASE("run_scenario twice is byte-identical") {
  ScenarioConfig c = straight_cfg();
  c.duration = 2.0;
  c.render.hue_jitter_sigma = 6.0;
  c.sensor.sigma_walk_xy = 0.002;
  const std::string d1 = "/tmp/towbot_det_a", d2 = "/tmp/towbot_det_b";
  run_scenario(c, {d1, false, 1});
  run_scenario(c, {d2, false, 1});
  CHECK(slurp(d1 + "/trajectory.csv") == slurp(d2 + "/trajectory.csv"));
  CHECK(slurp(d1 + "/trajectory.svg") == slurp(d2 + "/trajectory.svg"));
  CHECK(slurp(d1 + "/metrics.txt") == slurp(d2 + "/metrics.txt"));
}

TEST_CASE("emit_trajectory_csv structure") {
  RunReport r;
  const std::string path = "/tmp/towbot_csv_test.csv";
  emit_trajectory_csv(r, path);
  std::string text = slurp(path);
  CHECK(text ==
        "t,true_x,true_y,true_psi,est_x,est_y,est_psi,target_x,target_y,"
        "target_index,psi1,psi2,cross_track,v_w,omega_w,w1,w2,w3,w4,arc_latch,"
        "frame_id\n");

  r.records.resize(3);
  emit_trajectory_csv(r, path);
  text = slurp(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  std::remove(path.c_str());
}

TEST_CASE("emit_svg_plot structure") {
  const std::string path = "/tmp/towbot_svg_test.svg";
  RunReport empty;
  emit_svg_plot(empty, path);
  std::string text = slurp(path);
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);
  CHECK(text.find("polyline") == std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 4);  // header + 2 axes + close

  ScenarioConfig c = straight_cfg();
  c.duration = 1.0;
  const RunReport r = run_scenario(c);
  emit_svg_plot(r, path);
  text = slurp(path);
  std::size_t count = 0;
  for (std::size_t pos = 0; (pos = text.find("<polyline", pos)) != std::string::npos;
       ++pos)
    ++count;
  CHECK(count == 4);  // lane, waypoints, true, estimated
  std::remove(path.c_str());
}

TEST_CASE("reference scenario reproduces the golden trajectory") {
  const ScenarioConfig c = parse_scenario("scenarios/straight_then_corner.cfg");
  const std::string dir = "/tmp/towbot_golden_run";
  run_scenario(c, {dir, false, 1});
  CHECK(slurp(dir + "/trajectory.csv") ==
        slurp("tests/golden/straight_then_corner_trajectory.csv"));
}

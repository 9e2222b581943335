#include <cmath>
#include <fstream>
#include <sstream>

#include "towbot/harness.hpp"

namespace towbot {

void ScenarioConfig::validate() const {
  try {
    world.validate();
    geometry.validate();
    extrinsics.validate();
    gains.validate();
    sensor.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  if (color_model.k < 2) throw ScenarioError("color_model.k must be >= 2");
  if (planner.r_px <= 0 || planner.r_arc_px <= 0 || planner.n_max < 1)
    throw ScenarioError("planner parameters must be positive");
  if (dt <= 0 || duration <= 0) throw ScenarioError("dt and duration must be positive");
  const double steps = duration / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6)
    throw ScenarioError("duration must be an integer multiple of dt");
  if (control_steps_per_frame < 1)
    throw ScenarioError("control_steps_per_frame must be >= 1");
  if (render.image_width < 2 || render.image_height < 2 || render.bev_width < 2 ||
      render.bev_height < 2)
    throw ScenarioError("render dimensions must be >= 2");
}

CameraExtrinsics centered_extrinsics(int bev_w, int bev_h, double s, double near_dist) {
  CameraExtrinsics e;
  e.s = s;
  // BEV raster -> C1 with a single positive scale: columns run toward the
  // robot's left, rows toward the robot; a quarter-turn then lands C1 in the
  // forward-x robot frame.
  e.b = {-s * (bev_w - 1) / 2.0, -near_dist - s * (bev_h - 1)};
  e.t_c2_c1 = Transform2::from_pose({0.0, 0.0, M_PI / 2.0});
  return e;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::string first;
      if (!(ss >> first)) continue;
      if (first.front() == '[') {
        if (first.back() != ']') fail(lineno, "malformed section header");
        enter_section(first.substr(1, first.size() - 2), lineno);
        continue;
      }
      std::string eq;
      if (!(ss >> eq) || eq != "=") fail(lineno, "expected 'key = value...'");
      std::vector<std::string> values;
      std::string v;
      while (ss >> v) values.push_back(v);
      if (values.empty()) fail(lineno, "missing value for key '" + first + "'");
      handle(first, values, lineno);
    }
    if (!cfg_.extrinsics_set)
      cfg_.config.extrinsics = centered_extrinsics(
          cfg_.config.render.bev_width, cfg_.config.render.bev_height,
          cfg_.config.extrinsics.s, cfg_.near_dist);
    cfg_.config.render.extrinsics = cfg_.config.extrinsics;
  }

  ScenarioConfig take() { return std::move(cfg_.config); }

 private:
  struct State {
    ScenarioConfig config;
    bool extrinsics_set{false};
    double near_dist{0.3};
    int corner_count{0};
  };

  [[noreturn]] void fail(int lineno, const std::string& msg) const {
    throw ScenarioError(path_ + ":" + std::to_string(lineno) + ": " + msg);
  }

  void enter_section(const std::string& name, int lineno) {
    static const char* known[] = {"world",   "lane",   "geometry", "extrinsics",
                                  "color_model", "planner", "gains", "sensor",
                                  "render",  "run"};
    section_ = name;
    bool ok = false;
    for (const char* k : known) ok = ok || name == k;
    if (!ok) fail(lineno, "unknown section [" + name + "]");
    if (name == "lane") cfg_.config.world.lanes.emplace_back();
  }

  double num(const std::string& s, int lineno) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (...) {
      fail(lineno, "not a number: '" + s + "'");
    }
  }

  Rgb rgb(const std::vector<std::string>& v, int lineno) const {
    if (v.size() != 3) fail(lineno, "expected 3 color components");
    return {std::uint8_t(num(v[0], lineno)), std::uint8_t(num(v[1], lineno)),
            std::uint8_t(num(v[2], lineno))};
  }

  void handle(const std::string& key, const std::vector<std::string>& v, int lineno) {
    ScenarioConfig& c = cfg_.config;
    auto n1 = [&] { return num(v[0], lineno); };
    if (section_ == "world") {
      if (key == "floor_color") c.world.floor_color = rgb(v, lineno);
      else fail(lineno, "unknown key '" + key + "' in [world]");
    } else if (section_ == "lane") {
      if (c.world.lanes.empty()) fail(lineno, "lane key outside [lane]");
      Lane& lane = c.world.lanes.back();
      if (key == "color") lane.color = rgb(v, lineno);
      else if (key == "width") lane.width = n1();
      else if (key == "point") {
        if (v.size() != 2) fail(lineno, "point needs 2 coordinates");
        lane.centerline.push_back({num(v[0], lineno), num(v[1], lineno)});
      } else fail(lineno, "unknown key '" + key + "' in [lane]");
    } else if (section_ == "geometry") {
      if (key == "r_wheel") c.geometry.r_wheel = n1();
      else if (key == "l_x") c.geometry.l_x = n1();
      else if (key == "l_y") c.geometry.l_y = n1();
      else if (key == "l_v") c.geometry.l_v = n1();
      else if (key == "l_h_min") c.geometry.l_h_min = n1();
      else fail(lineno, "unknown key '" + key + "' in [geometry]");
    } else if (section_ == "extrinsics") {
      if (key == "scale") c.extrinsics.s = n1();
      else if (key == "near_dist") cfg_.near_dist = n1();
      else if (key == "bias") {
        if (v.size() != 2) fail(lineno, "bias needs 2 components");
        c.extrinsics.b = {num(v[0], lineno), num(v[1], lineno)};
        cfg_.extrinsics_set = true;
      } else if (key == "camera") {
        if (v.size() != 3) fail(lineno, "camera needs x y psi");
        c.extrinsics.t_c2_c1 = Transform2::from_pose(
            {num(v[0], lineno), num(v[1], lineno), num(v[2], lineno)});
        cfg_.extrinsics_set = true;
      } else fail(lineno, "unknown key '" + key + "' in [extrinsics]");
    } else if (section_ == "color_model") {
      if (key == "k") c.color_model.k = int(n1());
      else if (key == "hue_min") c.color_model.hue_min = n1();
      else if (key == "hue_max") c.color_model.hue_max = n1();
      else if (key == "sat_min") c.color_model.sat_min = n1();
      else if (key == "val_min") c.color_model.val_min = n1();
      else fail(lineno, "unknown key '" + key + "' in [color_model]");
    } else if (section_ == "planner") {
      if (key == "r_px") c.planner.r_px = n1();
      else if (key == "r_arc_px") c.planner.r_arc_px = n1();
      else if (key == "n_max") c.planner.n_max = int(n1());
      else if (key == "turn_threshold") c.planner.turn_threshold = n1();
      else if (key == "min_area") c.planner.min_area = int(n1());
      else if (key == "turn_preference") {
        if (v[0] == "left") c.planner.turn_preference = -1;
        else if (v[0] == "straight") c.planner.turn_preference = 0;
        else if (v[0] == "right") c.planner.turn_preference = 1;
        else fail(lineno, "turn_preference must be left|straight|right");
      } else fail(lineno, "unknown key '" + key + "' in [planner]");
    } else if (section_ == "gains") {
      if (key == "v_cruise") c.gains.v_cruise = n1();
      else if (key == "k_psi") c.gains.k_psi = n1();
      else if (key == "omega_max") c.gains.omega_max = n1();
      else if (key == "d_scale") c.gains.d_scale = n1();
      else if (key == "sign_policy") {
        if (v[0] == "absolute") c.gains.sign_policy = BlendSignPolicy::Absolute;
        else if (v[0] == "signed") c.gains.sign_policy = BlendSignPolicy::Signed;
        else fail(lineno, "sign_policy must be absolute|signed");
      } else fail(lineno, "unknown key '" + key + "' in [gains]");
    } else if (section_ == "sensor") {
      if (key == "sigma_walk_xy") c.sensor.sigma_walk_xy = n1();
      else if (key == "sigma_walk_psi") c.sensor.sigma_walk_psi = n1();
      else if (key == "seed") c.sensor.seed = std::uint32_t(n1());
      else fail(lineno, "unknown key '" + key + "' in [sensor]");
    } else if (section_ == "render") {
      if (key == "image_size") {
        if (v.size() != 2) fail(lineno, "image_size needs 2 values");
        c.render.image_width = int(num(v[0], lineno));
        c.render.image_height = int(num(v[1], lineno));
      } else if (key == "bev_size") {
        if (v.size() != 2) fail(lineno, "bev_size needs 2 values");
        c.render.bev_width = int(num(v[0], lineno));
        c.render.bev_height = int(num(v[1], lineno));
      } else if (key == "corner") {
        if (v.size() != 2) fail(lineno, "corner needs 2 values");
        if (cfg_.corner_count >= 4) fail(lineno, "more than 4 corners");
        c.render.bev_corners_in_image[cfg_.corner_count++] = {num(v[0], lineno),
                                                              num(v[1], lineno)};
      } else if (key == "hue_jitter_sigma") c.render.hue_jitter_sigma = n1();
      else if (key == "shadow_gradient") c.render.shadow_gradient = n1();
      else if (key == "glare") {
        if (v.size() != 5) fail(lineno, "glare needs cx cy rx ry strength");
        c.render.glare.push_back({num(v[0], lineno), num(v[1], lineno),
                                  num(v[2], lineno), num(v[3], lineno),
                                  num(v[4], lineno)});
      } else fail(lineno, "unknown key '" + key + "' in [render]");
    } else if (section_ == "run") {
      if (key == "dt") c.dt = n1();
      else if (key == "duration") c.duration = n1();
      else if (key == "control_steps_per_frame") c.control_steps_per_frame = int(n1());
      else if (key == "seed") c.seed = std::uint32_t(n1());
      else if (key == "initial_pose") {
        if (v.size() != 3) fail(lineno, "initial_pose needs x y psi");
        c.initial_pose = {num(v[0], lineno), num(v[1], lineno), num(v[2], lineno)};
      } else if (key == "frame_blackout") {
        if (v.size() != 2) fail(lineno, "frame_blackout needs t0 t1");
        c.frame_blackout = std::make_pair(num(v[0], lineno), num(v[1], lineno));
      } else fail(lineno, "unknown key '" + key + "' in [run]");
    } else {
      fail(lineno, "key '" + key + "' outside any section");
    }
  }

  std::string path_;
  std::string section_;
  State cfg_;
};

}  // namespace

ScenarioConfig parse_scenario(const std::string& path) {
  Parser p(path);
  ScenarioConfig cfg = p.take();
  cfg.validate();
  return cfg;
}

}  // namespace towbot

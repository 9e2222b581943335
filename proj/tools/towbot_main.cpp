#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "towbot/harness.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 2 config error, 3 lane not found, 4 invariant violation.
int run(const std::string& scenario, const std::string& out_dir, long seed_override,
        bool dump_frames, int frame_stride) {
  towbot::ScenarioConfig cfg = towbot::parse_scenario(scenario);
  if (seed_override >= 0) cfg.seed = std::uint32_t(seed_override);

  towbot::RunOptions opt;
  opt.out_dir = out_dir;
  opt.dump_frames = dump_frames;
  opt.frame_stride = frame_stride;

  const towbot::RunReport report = towbot::run_scenario(cfg, opt);
  if (report.status == towbot::RunStatus::LaneNotFound) {
    std::fprintf(stderr, "error: no lane visible at start\n");
    return 3;
  }
  const towbot::RunMetrics& m = report.metrics;
  std::printf("steps=%zu cross_track_rms=%.4f max_cross_track=%.4f settle_distance=%.3f\n",
              report.records.size(), m.cross_track_rms, m.max_cross_track,
              m.settle_distance);
  std::printf("final_heading=%.4f waypoint_updates=%ld frames=%ld lane_lost=%ld\n",
              m.final_heading, m.waypoint_updates, m.frames_processed,
              m.lane_lost_events);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wayfinding-lane towing robot simulator"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out";
  long seed = -1;
  bool dump_frames = false;
  int frame_stride = 1;

  CLI::App* cmd_run = app.add_subcommand("run", "Run a scenario end to end");
  cmd_run->add_option("scenario", scenario, "Scenario file")->required();
  cmd_run->add_option("--out", out_dir, "Output directory");
  cmd_run->add_option("--seed", seed, "Override the scenario seed");
  cmd_run->add_flag("--dump-frames", dump_frames, "Write per-frame PPM dumps");
  cmd_run->add_option("--frame-stride", frame_stride, "Dump every k-th frame")
      ->check(CLI::PositiveNumber);

  CLI::App* cmd_validate = app.add_subcommand("validate", "Check a scenario file");
  cmd_validate->add_option("scenario", scenario, "Scenario file")->required();

  CLI::App* cmd_version = app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_version->parsed()) {
      std::printf("towbot %s\n", kVersion);
      return 0;
    }
    if (cmd_validate->parsed()) {
      towbot::parse_scenario(scenario);
      std::printf("ok\n");
      return 0;
    }
    return run(scenario, out_dir, seed, dump_frames, frame_stride);
  } catch (const towbot::ScenarioError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const towbot::InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

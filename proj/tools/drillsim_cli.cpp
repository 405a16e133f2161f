// drillsim command line: run | batch | detect | report | replay | defaults

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "drillsim/config.hpp"
#include "drillsim/error.hpp"
#include "drillsim/frame_io.hpp"
#include "drillsim/harness.hpp"
#include "drillsim/workflow.hpp"

namespace fs = std::filesystem;
using namespace drillsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFault = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Io: return kExitIo;
    default: return kExitFault;
  }
}

SimConfig config_or_default(const std::string& path) { return path.empty() ? SimConfig{} : load_config(path); }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cli", fmt::format("cannot write {}", path.string()));
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cli", fmt::format("cannot read {}", path.string()));
  return is;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded simulator of autonomous eggshell drilling with bone-flap state estimation"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress to stderr");

  std::string config_path;
  std::uint64_t seed = 0;
  int trial_id = 1;
  std::string dump_dir, event_log, trace_dir, trajectory_csv;
  int dump_stride = 1;
  auto* run = app.add_subcommand("run", "simulate one trial");
  run->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "trial seed");
  run->add_option("--trial-id", trial_id, "trial id written to the record and frame sidecars");
  run->add_option("--dump-frames", dump_dir, "write PGM/PPM/sidecar frames to this directory");
  run->add_option("--dump-stride", dump_stride, "dump every n-th frame index")->check(CLI::PositiveNumber);
  run->add_option("--event-log", event_log, "write the replayable event log");
  run->add_option("--trace-dir", trace_dir, "write one palpation trace CSV per pressed point");
  run->add_option("--trajectory-csv", trajectory_csv, "write the final drilling trajectory");

  int trials = 12;
  std::uint64_t seed_base = 0;
  std::string out_path;
  auto* batch = app.add_subcommand("batch", "simulate many trials and write the trial CSV");
  batch->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  batch->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  batch->add_option("--seed-base", seed_base, "trial i uses seed seed-base + i");
  batch->add_option("--out", out_path, "trial CSV path")->required();

  std::string frames_dir;
  auto* detect = app.add_subcommand("detect", "run the deflection detector over a dumped frame directory");
  detect->add_option("--config", config_path, "config used to record the frames")->check(CLI::ExistingFile);
  detect->add_option("--frames", frames_dir, "frame directory")->required();
  detect->add_option("--out", out_path, "timeline CSV path")->required();

  std::string in_path;
  auto* report = app.add_subcommand("report", "summarize a trial CSV");
  report->add_option("--in", in_path, "trial CSV")->required();

  std::string log_path;
  auto* replay = app.add_subcommand("replay", "replay an event log through the state machine");
  replay->add_option("--config", config_path, "config used for the trial")->check(CLI::ExistingFile);
  replay->add_option("--log", log_path, "event log")->required();

  app.add_subcommand("defaults", "print every config key with its default value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (*run) {
      const SimConfig cfg = config_or_default(config_path);
      TrialOptions opts;
      opts.trial_id = trial_id;
      opts.keep_traces = !trace_dir.empty();
      opts.dump_stride = dump_stride;
      if (!dump_dir.empty()) opts.dump_dir = dump_dir;
      const TrialResult r = run_trial(cfg, seed, opts);
      if (!event_log.empty()) {
        auto os = open_out(event_log);
        write_event_log(os, r.log);
      }
      if (!trace_dir.empty()) {
        fs::create_directories(trace_dir);
        int round = 0;
        for (const auto& v : r.verdicts) {
          ++round;
          for (std::size_t i = 0; i < v.per_point.size(); ++i) {
            auto os = open_out(fs::path(trace_dir) / fmt::format("round{}_point{}.csv", round, i + 1));
            write_trace_csv(os, v.per_point[i].trace);
          }
        }
      }
      if (!trajectory_csv.empty()) {
        auto os = open_out(trajectory_csv);
        build_spline(r.final_plan.path, r.final_plan.knots).write_csv(os, 720);
      }
      write_trial_csv(std::cout, {r.record});
      std::cout << fmt::format("final state: {}\n", r.final_state.label());
      std::cout << fmt::format("drilling cycles: {}, repeat rounds: {}, frames rendered: {}/{}\n",
                               r.drilling_cycles, r.repeat_rounds, r.perception.rendered, r.perception.frames);
      std::cout << fmt::format("membrane: {}, total web: {:.4f} mm\n",
                               r.final_specimen.membrane_intact ? "intact" : "damaged",
                               r.final_specimen.total_web());
      if (r.invalid) return kExitFault;
      return kExitOk;
    }
    if (*batch) {
      const SimConfig cfg = config_or_default(config_path);
      BatchOptions opts;
      opts.trials = trials;
      opts.seed_base = seed_base;
      const auto results = run_batch(cfg, opts);
      std::vector<TrialRecord> records;
      for (const auto& r : results) records.push_back(r.record);
      {
        auto os = open_out(out_path);
        write_trial_csv(os, records);
      }
      write_report(std::cout, records, aggregate(records));
      return kExitOk;
    }
    if (*detect) {
      const SimConfig cfg = config_or_default(config_path);
      DetectorConfig dcfg = make_detector_config(cfg.camera, cfg.specimen.path, cfg.crop_size);
      dcfg.threshold = cfg.detector_threshold;
      dcfg.ring_width = cfg.ring_width;
      dcfg.hsv = cfg.hsv;
      const auto readings = detect_directory(frames_dir, dcfg);
      auto os = open_out(out_path);
      write_timeline_csv(os, readings);
      std::cout << fmt::format("{} frames -> {}\n", readings.size(), out_path);
      return kExitOk;
    }
    if (*report) {
      auto is = open_in(in_path);
      const auto records = read_trial_csv(is);
      write_report(std::cout, records, aggregate(records));
      return kExitOk;
    }
    if (*replay) {
      const SimConfig cfg = config_or_default(config_path);
      auto is = open_in(log_path);
      const auto log = read_event_log(is);
      const auto states = replay_event_log(log, limits_from(cfg));
      std::cout << fmt::format("replayed {} events, final state {}\n", states.size(),
                               states.empty() ? "Initializing" : states.back().label());
      return kExitOk;
    }
    write_config(std::cout, SimConfig{});
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}] {}\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return kExitFault;
  }
}

#pragma once

// Flat key=value configuration. Every tunable default lives here; unknown
// keys are rejected so a typo cannot silently fall back to a default.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "drillsim/palpation.hpp"
#include "drillsim/sensing.hpp"
#include "drillsim/specimen.hpp"
#include "drillsim/trajectory.hpp"

namespace drillsim {

struct WorkflowParams {
  double gate = 0.80;          // strict: average > gate enters palpation
  int round_cap = 5;           // repeat-drilling rounds before Done(NonDetachable)
  int max_drilling_cycles = 200;
  int debounce_frames = 3;
  double init_s = 5.0;
  double recognition_s = 2.0;
  double cycle_s = 60.0;
  double forcible_web_limit = 0.15;  // mm, total over all points
  double collapse_probability = 0.1;
  double collapse_sag = 0.25;        // mm
  double strategic_radius_fraction = 0.75;
};

struct FaultParams {
  int collapse_cycle = -1;  // drilling cycle (1-based) whose knot 16 detaches and drops the flap
  double dropout_start = -1.0;  // s
  double dropout_duration = 0.0;
};

struct SimConfig {
  SpecimenParams specimen;
  ContactModel contact;
  CameraModel camera;
  int crop_size = 240;
  double detector_threshold = 0.12;
  double ring_width = 0.75;
  HsvConfig hsv;
  ObserverParams observer;
  double force_sigma = 0.01;
  DamperParams damper;
  RepeatParams repeat;
  GuardParams guard;
  WorkflowParams workflow;
  FaultParams faults;
  bool elide_static_frames = true;

  void validate() const;
};

SimConfig parse_config(std::istream& is);
SimConfig load_config(const std::filesystem::path& path);
// key = value lines for every key, in the order parse_config accepts them.
void write_config(std::ostream& os, const SimConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace drillsim

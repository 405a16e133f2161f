#include "drillsim/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/program_options.hpp>
#include <fmt/format.h>

#include "drillsim/error.hpp"

namespace po = boost::program_options;

namespace drillsim {

namespace {

// One entry per config key: how to bind it for parsing and how to print it.
struct Key {
  std::string name;
  std::function<void(po::options_description&, SimConfig&)> bind;
  std::function<std::string(const SimConfig&)> show;
};

template <class T, class Access>
Key key(std::string name, Access access) {
  Key k;
  k.name = name;
  k.bind = [name, access](po::options_description& desc, SimConfig& cfg) {
    T& ref = access(cfg);
    desc.add_options()(name.c_str(), po::value<T>(&ref)->default_value(ref));
  };
  k.show = [access](const SimConfig& cfg) {
    SimConfig copy = cfg;
    const T& v = access(copy);
    if constexpr (std::is_same_v<T, bool>) {
      return std::string(v ? "true" : "false");
    } else {
      return fmt::format("{}", v);
    }
  };
  return k;
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    // specimen
    k.push_back(key<double>("specimen.center_x", [](SimConfig& c) -> double& { return c.specimen.path.center.x; }));
    k.push_back(key<double>("specimen.center_y", [](SimConfig& c) -> double& { return c.specimen.path.center.y; }));
    k.push_back(key<double>("specimen.radius", [](SimConfig& c) -> double& { return c.specimen.path.radius; }));
    k.push_back(key<int>("specimen.sample_count", [](SimConfig& c) -> int& { return c.specimen.path.sample_count; }));
    k.push_back(key<double>("specimen.thickness_mean", [](SimConfig& c) -> double& { return c.specimen.thickness_mean; }));
    k.push_back(key<double>("specimen.thickness_sigma", [](SimConfig& c) -> double& { return c.specimen.thickness_sigma; }));
    k.push_back(key<double>("specimen.springback_max", [](SimConfig& c) -> double& { return c.specimen.springback_max; }));
    k.push_back(key<double>("specimen.surface_depth", [](SimConfig& c) -> double& { return c.specimen.surface_base_depth; }));
    // contact
    k.push_back(key<double>("contact.k_attached_per_mm", [](SimConfig& c) -> double& { return c.contact.k_attached_per_mm; }));
    k.push_back(key<double>("contact.k_free", [](SimConfig& c) -> double& { return c.contact.k_free; }));
    k.push_back(key<double>("contact.membrane_force_limit", [](SimConfig& c) -> double& { return c.contact.membrane_force_limit; }));
    k.push_back(key<double>("contact.membrane_overdrill_margin", [](SimConfig& c) -> double& { return c.contact.membrane_overdrill_margin; }));
    k.push_back(key<double>("contact.web_compliance", [](SimConfig& c) -> double& { return c.contact.web_compliance; }));
    // camera
    k.push_back(key<int>("camera.width", [](SimConfig& c) -> int& { return c.camera.width; }));
    k.push_back(key<int>("camera.height", [](SimConfig& c) -> int& { return c.camera.height; }));
    k.push_back(key<double>("camera.mm_per_px", [](SimConfig& c) -> double& { return c.camera.mm_per_px; }));
    k.push_back(key<double>("camera.depth_noise_sigma", [](SimConfig& c) -> double& { return c.camera.depth_noise_sigma; }));
    k.push_back(key<double>("camera.depth_bias", [](SimConfig& c) -> double& { return c.camera.depth_bias; }));
    k.push_back(key<double>("camera.groove_half_width", [](SimConfig& c) -> double& { return c.camera.groove_half_width; }));
    k.push_back(key<double>("camera.hue_jitter_deg", [](SimConfig& c) -> double& { return c.camera.palette.hue_jitter_deg; }));
    k.push_back(key<double>("camera.value_jitter", [](SimConfig& c) -> double& { return c.camera.palette.value_jitter; }));
    // detector
    k.push_back(key<int>("detector.crop_size", [](SimConfig& c) -> int& { return c.crop_size; }));
    k.push_back(key<double>("detector.threshold", [](SimConfig& c) -> double& { return c.detector_threshold; }));
    k.push_back(key<double>("detector.ring_width", [](SimConfig& c) -> double& { return c.ring_width; }));
    k.push_back(key<int>("detector.erode_px", [](SimConfig& c) -> int& { return c.hsv.erode_px; }));
    k.push_back(key<double>("detector.inner_hue_min", [](SimConfig& c) -> double& { return c.hsv.inner.hue_min; }));
    k.push_back(key<double>("detector.inner_hue_max", [](SimConfig& c) -> double& { return c.hsv.inner.hue_max; }));
    k.push_back(key<double>("detector.outer_hue_min", [](SimConfig& c) -> double& { return c.hsv.outer.hue_min; }));
    k.push_back(key<double>("detector.outer_hue_max", [](SimConfig& c) -> double& { return c.hsv.outer.hue_max; }));
    k.push_back(key<double>("detector.min_saturation", [](SimConfig& c) -> double& { return c.hsv.inner.sat_min; }));
    k.push_back(key<double>("detector.min_value", [](SimConfig& c) -> double& { return c.hsv.inner.val_min; }));
    k.push_back(key<double>("detector.groove_max_saturation", [](SimConfig& c) -> double& { return c.hsv.groove.sat_max; }));
    // observer and force sensor
    k.push_back(key<double>("observer.sigma", [](SimConfig& c) -> double& { return c.observer.sigma; }));
    k.push_back(key<double>("observer.bias", [](SimConfig& c) -> double& { return c.observer.bias; }));
    k.push_back(key<double>("force.sigma", [](SimConfig& c) -> double& { return c.force_sigma; }));
    // planner
    k.push_back(key<double>("damper.c_lo", [](SimConfig& c) -> double& { return c.damper.c_lo; }));
    k.push_back(key<double>("damper.c_hi", [](SimConfig& c) -> double& { return c.damper.c_hi; }));
    k.push_back(key<double>("damper.v_full", [](SimConfig& c) -> double& { return c.damper.v_full; }));
    k.push_back(key<double>("damper.v_slow", [](SimConfig& c) -> double& { return c.damper.v_slow; }));
    k.push_back(key<int>("repeat.cycles", [](SimConfig& c) -> int& { return c.repeat.cycles; }));
    k.push_back(key<double>("repeat.overcut", [](SimConfig& c) -> double& { return c.repeat.overcut; }));
    // palpation guard
    k.push_back(key<double>("guard.f_max", [](SimConfig& c) -> double& { return c.guard.f_max; }));
    k.push_back(key<double>("guard.v_z", [](SimConfig& c) -> double& { return c.guard.v_z; }));
    k.push_back(key<double>("guard.max_velocity", [](SimConfig& c) -> double& { return c.guard.max_velocity; }));
    k.push_back(key<double>("guard.travel_limit", [](SimConfig& c) -> double& { return c.guard.travel_limit; }));
    k.push_back(key<double>("guard.retract_height", [](SimConfig& c) -> double& { return c.guard.retract_height; }));
    k.push_back(key<double>("guard.retract_speed", [](SimConfig& c) -> double& { return c.guard.retract_speed; }));
    k.push_back(key<double>("guard.margin_sigmas", [](SimConfig& c) -> double& { return c.guard.margin_sigmas; }));
    k.push_back(key<double>("guard.contact_sigmas", [](SimConfig& c) -> double& { return c.guard.contact_sigmas; }));
    // workflow
    k.push_back(key<double>("workflow.gate", [](SimConfig& c) -> double& { return c.workflow.gate; }));
    k.push_back(key<int>("workflow.round_cap", [](SimConfig& c) -> int& { return c.workflow.round_cap; }));
    k.push_back(key<int>("workflow.max_drilling_cycles", [](SimConfig& c) -> int& { return c.workflow.max_drilling_cycles; }));
    k.push_back(key<int>("workflow.debounce_frames", [](SimConfig& c) -> int& { return c.workflow.debounce_frames; }));
    k.push_back(key<double>("workflow.init_s", [](SimConfig& c) -> double& { return c.workflow.init_s; }));
    k.push_back(key<double>("workflow.recognition_s", [](SimConfig& c) -> double& { return c.workflow.recognition_s; }));
    k.push_back(key<double>("workflow.cycle_s", [](SimConfig& c) -> double& { return c.workflow.cycle_s; }));
    k.push_back(key<double>("workflow.forcible_web_limit", [](SimConfig& c) -> double& { return c.workflow.forcible_web_limit; }));
    k.push_back(key<double>("workflow.collapse_probability", [](SimConfig& c) -> double& { return c.workflow.collapse_probability; }));
    k.push_back(key<double>("workflow.collapse_sag", [](SimConfig& c) -> double& { return c.workflow.collapse_sag; }));
    k.push_back(key<double>("workflow.strategic_radius_fraction", [](SimConfig& c) -> double& { return c.workflow.strategic_radius_fraction; }));
    // fault injection
    k.push_back(key<int>("fault.collapse_cycle", [](SimConfig& c) -> int& { return c.faults.collapse_cycle; }));
    k.push_back(key<double>("fault.dropout_start", [](SimConfig& c) -> double& { return c.faults.dropout_start; }));
    k.push_back(key<double>("fault.dropout_duration", [](SimConfig& c) -> double& { return c.faults.dropout_duration; }));
    k.push_back(key<bool>("sim.elide_static_frames", [](SimConfig& c) -> bool& { return c.elide_static_frames; }));
    return k;
  }();
  return keys;
}

// Derived fields that mirror a single configured value.
void sync(SimConfig& cfg) {
  cfg.hsv.outer.sat_min = cfg.hsv.inner.sat_min;
  cfg.hsv.outer.val_min = cfg.hsv.inner.val_min;
  cfg.damper.cycle_duration = cfg.workflow.cycle_s;
}

}  // namespace

void SimConfig::validate() const {
  specimen.validate();
  contact.validate();
  camera.validate(specimen.path);
  damper.validate();
  guard.validate();
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(ErrorKind::Config, "config", fmt::format("{}: {}", key, why));
  };
  if (!(detector_threshold > 0.0)) fail("detector.threshold", "must be positive");
  if (!(ring_width >= 0.0)) fail("detector.ring_width", "must be non-negative");
  if (hsv.erode_px < 0) fail("detector.erode_px", "must be non-negative");
  if (observer.sigma < 0.0) fail("observer.sigma", "must be non-negative");
  if (force_sigma < 0.0) fail("force.sigma", "must be non-negative");
  if (repeat.cycles < 1) fail("repeat.cycles", "must be >= 1");
  if (repeat.overcut < 0.0) fail("repeat.overcut", "must be non-negative");
  if (!(workflow.gate > 0.0 && workflow.gate < 1.0)) fail("workflow.gate", "must lie in (0, 1)");
  if (workflow.round_cap < 0) fail("workflow.round_cap", "must be >= 0");
  if (workflow.max_drilling_cycles < 1) fail("workflow.max_drilling_cycles", "must be >= 1");
  if (workflow.debounce_frames < 1) fail("workflow.debounce_frames", "must be >= 1");
  if (workflow.init_s < 0.0 || workflow.recognition_s < 0.0) fail("workflow.init_s", "phase times must be >= 0");
  if (!(workflow.cycle_s > 0.0)) fail("workflow.cycle_s", "must be positive");
  if (workflow.forcible_web_limit < 0.0) fail("workflow.forcible_web_limit", "must be non-negative");
  if (workflow.collapse_probability < 0.0 || workflow.collapse_probability > 1.0) {
    fail("workflow.collapse_probability", "must lie in [0, 1]");
  }
  if (workflow.strategic_radius_fraction < 0.6 || workflow.strategic_radius_fraction > 0.9) {
    fail("workflow.strategic_radius_fraction", "must lie in [0.6, 0.9]");
  }
  if (faults.dropout_duration < 0.0) fail("fault.dropout_duration", "must be non-negative");
}

SimConfig parse_config(std::istream& is) {
  SimConfig cfg;
  po::options_description desc("drillsim config");
  for (const auto& k : registry()) k.bind(desc, cfg);
  try {
    po::variables_map vm;
    po::store(po::parse_config_file(is, desc, false), vm);
    po::notify(vm);
  } catch (const po::error& e) {
    throw Error(ErrorKind::Config, "config", e.what());
  }
  sync(cfg);
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Config, "config", fmt::format("cannot open config file {}", path.string()));
  return parse_config(is);
}

void write_config(std::ostream& os, const SimConfig& cfg) {
  for (const auto& k : registry()) os << k.name << " = " << k.show(cfg) << '\n';
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : registry()) out.push_back(k.name);
  return out;
}

}  // namespace drillsim

#include "drillsim/specimen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include <fmt/format.h>

#include "drillsim/error.hpp"
#include "drillsim/rng.hpp"

namespace drillsim {

const char* to_string(FlapState state) {
  return state == FlapState::Detachable ? "Detachable" : "NonDetachable";
}

void DrillPath::validate() const {
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::Config, "specimen/path", "drill path radius must be positive");
  }
  if (sample_count < 4) {
    throw Error(ErrorKind::Config, "specimen/path", "drill path needs at least 4 sample points");
  }
}

double DrillPath::sample_angle(int k) const {
  return kTwoPi * static_cast<double>(k) / static_cast<double>(sample_count);
}

Vec2 DrillPath::sample_point(int k) const { return point_at(sample_angle(k)); }

Vec2 DrillPath::point_at(double angle) const {
  return {center.x + radius * std::cos(angle), center.y + radius * std::sin(angle)};
}

double SamplePointTruth::completion() const {
  if (thickness <= 0.0) return 1.0;
  return std::clamp(drilled_depth / thickness, 0.0, 1.0);
}

double SpecimenTruth::total_web() const {
  double sum = 0.0;
  for (const auto& p : points) sum += p.web();
  return sum;
}

bool SpecimenTruth::detachable() const {
  return std::all_of(points.begin(), points.end(),
                     [](const SamplePointTruth& p) { return p.web() == 0.0; });
}

double SpecimenTruth::displacement_at(Vec2 q) const {
  return flap_displacement + dot(flap_tilt, q - path.center);
}

double SpecimenTruth::drilled_depth_at(double angle) const {
  const int n = static_cast<int>(points.size());
  if (n == 0) return 0.0;
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const double pos = a / kTwoPi * n;
  const int k0 = static_cast<int>(std::floor(pos)) % n;
  const int k1 = (k0 + 1) % n;
  const double w = pos - std::floor(pos);
  return (1.0 - w) * points[k0].drilled_depth + w * points[k1].drilled_depth;
}

void SpecimenParams::validate() const {
  path.validate();
  if (!(thickness_mean > 0.0) || thickness_sigma < 0.0) {
    throw Error(ErrorKind::Config, "specimen/params",
                "thickness mean must be positive and sigma non-negative");
  }
  if (springback_max < 0.0) {
    throw Error(ErrorKind::Config, "specimen/params", "springback_max must be non-negative");
  }
  if (!(surface_base_depth > 0.0)) {
    throw Error(ErrorKind::Config, "specimen/params", "surface base depth must be positive");
  }
}

void ContactModel::validate() const {
  if (!(k_attached_per_mm > 0.0 && k_free > 0.0 && membrane_force_limit > 0.0 &&
        membrane_overdrill_margin > 0.0 && web_compliance > 0.0)) {
    throw Error(ErrorKind::Config, "specimen/contact", "contact model fields must be positive");
  }
}

double ContactModel::stiffness(const SpecimenTruth& spec) const {
  return spec.detachable() ? k_free : k_attached_per_mm * spec.total_web();
}

SpecimenTruth generate_specimen(std::uint64_t seed, const SpecimenParams& params) {
  params.validate();
  std::mt19937_64 gen(rng::derive(seed, rng::kSpecimen));
  std::normal_distribution<double> thickness(params.thickness_mean, params.thickness_sigma);
  std::uniform_real_distribution<double> springback(0.0, params.springback_max);

  SpecimenTruth spec;
  spec.path = params.path;
  spec.surface_base_depth = params.surface_base_depth;
  spec.points.reserve(static_cast<std::size_t>(params.path.sample_count));
  constexpr double kMinThickness = 1e-3;
  for (int k = 0; k < params.path.sample_count; ++k) {
    SamplePointTruth p;
    p.index = k;
    p.thickness = params.thickness_sigma > 0.0 ? std::max(kMinThickness, thickness(gen))
                                               : params.thickness_mean;
    p.springback = params.springback_max > 0.0 ? springback(gen) : 0.0;
    spec.points.push_back(p);
  }
  return spec;
}

SpecimenTruth apply_drill_pass(SpecimenTruth spec, int k, double commanded_depth,
                               const ContactModel& contact) {
  if (k < 0 || k >= static_cast<int>(spec.points.size())) {
    throw Error(ErrorKind::Pipeline, "specimen/drill",
                fmt::format("sample index {} out of range", k));
  }
  if (commanded_depth <= 0.0) return spec;
  auto& p = spec.points[static_cast<std::size_t>(k)];
  const double reached = commanded_depth - p.springback;
  if (reached > p.drilled_depth) {
    p.drilled_depth = reached;
    ++spec.groove_revision;
  }
  if (commanded_depth > p.thickness + contact.membrane_overdrill_margin) {
    spec.membrane_intact = false;
  }
  return spec;
}

namespace {

void set_pose_from_press(SpecimenTruth& spec, Vec2 point, double press_displacement) {
  const Vec2 offset = point - spec.path.center;
  const double rho = norm(offset);
  double centre = press_displacement;
  Vec2 tilt{};
  if (rho > 1e-9) {
    // Rigid tilt about the opposite path point: zero there, press_displacement at the tip.
    const double slope = press_displacement / (spec.path.radius + rho);
    centre = slope * spec.path.radius;
    tilt = (slope / rho) * offset;
  }
  if (centre != spec.flap_displacement || !(tilt == spec.flap_tilt)) {
    spec.flap_displacement = centre;
    spec.flap_tilt = tilt;
    ++spec.pose_revision;
  }
}

}  // namespace

ContactResult apply_contact_force(SpecimenTruth spec, Vec2 point, double tip_depth,
                                  const ContactModel& contact) {
  if (norm(point - spec.path.center) > spec.path.radius + 1e-9) {
    throw Error(ErrorKind::Pipeline, "specimen/contact", "contact point lies outside the flap");
  }
  if (tip_depth <= 0.0) return {0.0, std::move(spec)};

  const double indentation = tip_depth;
  double force = 0.0;
  if (spec.detachable()) {
    set_pose_from_press(spec, point, indentation);
    force = contact.k_free * indentation;
    if (force > contact.membrane_force_limit) spec.membrane_intact = false;
  } else {
    const double web = spec.total_web();
    force = contact.k_attached_per_mm * web * indentation;
    set_pose_from_press(spec, point,
                        indentation * web / (web + contact.web_compliance));
  }
  return {force, std::move(spec)};
}

SpecimenTruth relax_flap(SpecimenTruth spec) {
  if (spec.flap_displacement != 0.0 || !(spec.flap_tilt == Vec2{})) {
    spec.flap_displacement = 0.0;
    spec.flap_tilt = {};
    ++spec.pose_revision;
  }
  return spec;
}

SpecimenTruth collapse_flap(SpecimenTruth spec, double sag) {
  spec.flap_displacement = sag;
  spec.flap_tilt = {};
  ++spec.pose_revision;
  return spec;
}

CaseOutcome ground_truth_case(const SpecimenTruth& spec, FlapState /*verdict*/,
                              double forcible_web_limit) {
  // The label follows the physical outcome. A flap the system called
  // detachable that still hangs on a thin web is Case 3 (removable by hand);
  // one that hangs on more than the forcible limit is Case 4 whatever the verdict.
  if (!spec.membrane_intact) return {CaseLabel::Case2, false};
  if (spec.detachable()) return {CaseLabel::Case1, true};
  if (spec.total_web() <= forcible_web_limit) return {CaseLabel::Case3, true};
  return {CaseLabel::Case4, false};
}

void write_debug_dump(std::ostream& os, const SpecimenTruth& spec) {
  for (const auto& p : spec.points) {
    os << fmt::format("{} {:.6f} {:.6f} {:.6f} {:.6f}\n", p.index, p.thickness,
                      p.drilled_depth, p.web(), p.springback);
  }
}

}  // namespace drillsim

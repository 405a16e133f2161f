#pragma once

// Ground-truth eggshell model: circular drill path, per-point shell thickness,
// material removal with elastic springback, flap attachment mechanics and the
// membrane underneath. Everything the sensors observe is derived from here.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "drillsim/geometry.hpp"

namespace drillsim {

enum class FlapState { NonDetachable, Detachable };

const char* to_string(FlapState state);

struct DrillPath {
  Vec2 center;
  double radius = 4.0;  // mm
  int sample_count = 32;

  void validate() const;
  double sample_angle(int k) const;
  Vec2 sample_point(int k) const;
  Vec2 point_at(double angle) const;
  friend bool operator==(const DrillPath&, const DrillPath&) = default;
};

struct SamplePointTruth {
  int index = 0;
  double thickness = 0.0;      // t_k, mm
  double drilled_depth = 0.0;  // d_k, mm removed from the original surface
  double springback = 0.0;     // elastic residue left behind by every pass, mm

  double web() const { return thickness > drilled_depth ? thickness - drilled_depth : 0.0; }
  double completion() const;
  friend bool operator==(const SamplePointTruth&, const SamplePointTruth&) = default;
};

struct SpecimenTruth {
  DrillPath path;
  std::vector<SamplePointTruth> points;
  double surface_base_depth = 500.0;  // camera-frame depth of the undisturbed shell, mm
  bool membrane_intact = true;
  double flap_displacement = 0.0;  // downward displacement of the flap centre, mm
  Vec2 flap_tilt;                  // d(displacement)/d(position), dimensionless

  // Bumped whenever something the camera can see changes. Frames rendered at
  // equal revisions differ only by sensor noise.
  std::uint64_t pose_revision = 0;
  std::uint64_t groove_revision = 0;

  double total_web() const;
  bool detachable() const;
  // Downward flap displacement at world point q (only meaningful inside the flap).
  double displacement_at(Vec2 q) const;
  // Drilled depth along the path at an arbitrary angle (linear between samples).
  double drilled_depth_at(double angle) const;

  friend bool operator==(const SpecimenTruth&, const SpecimenTruth&) = default;
};

struct SpecimenParams {
  DrillPath path;
  double thickness_mean = 0.35;   // mm
  double thickness_sigma = 0.05;  // mm
  double springback_max = 0.05;   // mm, springback ~ U[0, springback_max]
  double surface_base_depth = 500.0;

  void validate() const;
};

struct ContactModel {
  double k_attached_per_mm = 2.0;  // N/mm per mm of total web
  double k_free = 1.0;             // N/mm, detached flap riding on the membrane
  double membrane_force_limit = 0.60;
  double membrane_overdrill_margin = 0.10;
  // Compliance constant c, mm: an attached flap moves by
  // indentation * web / (web + c), a small fraction for any realistic web.
  double web_compliance = 5.0;

  void validate() const;
  double stiffness(const SpecimenTruth& spec) const;
};

SpecimenTruth generate_specimen(std::uint64_t seed, const SpecimenParams& params);

SpecimenTruth apply_drill_pass(SpecimenTruth spec, int k, double commanded_depth,
                               const ContactModel& contact);

struct ContactResult {
  double force_z = 0.0;  // compressive force on the tip, N (>= 0)
  SpecimenTruth specimen;
};

// Quasi-static plant: the tip at `point`, `tip_depth` mm below the original
// surface. The flap tilts about the path point diametrically opposite the
// press point.
ContactResult apply_contact_force(SpecimenTruth spec, Vec2 point, double tip_depth,
                                  const ContactModel& contact);

// Tip withdrawn: the flap returns to rest.
SpecimenTruth relax_flap(SpecimenTruth spec);

// Detached flap dropping onto the membrane during drilling.
SpecimenTruth collapse_flap(SpecimenTruth spec, double sag);

enum class CaseLabel { Case1 = 1, Case2 = 2, Case3 = 3, Case4 = 4 };

struct CaseOutcome {
  CaseLabel label = CaseLabel::Case4;
  bool successful = false;
};

CaseOutcome ground_truth_case(const SpecimenTruth& spec, FlapState verdict,
                              double forcible_web_limit = 0.15);

// One line per sample point: index thickness drilled_depth web springback.
void write_debug_dump(std::ostream& os, const SpecimenTruth& spec);

}  // namespace drillsim

#include "drillsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "drillsim/error.hpp"

namespace drillsim {

void DamperParams::validate() const {
  if (!(0.0 <= c_lo && c_lo <= c_hi && c_hi <= 1.0)) {
    throw Error(ErrorKind::Config, "trajectory/damper", "need 0 <= c_lo <= c_hi <= 1");
  }
  if (v_full < 0.0 || v_slow < 0.0 || v_slow > v_full) {
    throw Error(ErrorKind::Config, "trajectory/damper", "need 0 <= v_slow <= v_full");
  }
  if (!(cycle_duration > 0.0)) {
    throw Error(ErrorKind::Config, "trajectory/damper", "cycle duration must be positive");
  }
}

double damper_step(double completion, double dt, const DamperParams& params) {
  if (!(completion >= 0.0 && completion <= 1.0)) {
    spdlog::debug("damper: completion {} clamped to [0, 1]", completion);
    completion = std::isnan(completion) ? 0.0 : std::clamp(completion, 0.0, 1.0);
  }
  const double cycles = std::max(dt, 0.0) / params.cycle_duration;
  if (completion < params.c_lo) return params.v_full * cycles;
  if (completion < params.c_hi) return params.v_slow * cycles;
  return 0.0;
}

DrillPlan initial_plan(const DrillPath& path, const DamperParams& damper) {
  path.validate();
  DrillPlan plan;
  plan.path = path;
  const double dz = damper_step(0.0, damper.cycle_duration, damper);
  for (int k = 0; k < path.sample_count; ++k) {
    plan.knots.push_back({k, path.sample_angle(k), dz, 0.0});
  }
  plan.history.resize(static_cast<std::size_t>(path.sample_count));
  return plan;
}

DrillPlan update_plan(DrillPlan plan, const CompletionObservation& observation, const DamperParams& damper) {
  if (observation.levels.size() != plan.knots.size()) {
    throw Error(ErrorKind::Planner, "trajectory/update",
                fmt::format("observation has {} levels, plan has {} knots", observation.levels.size(),
                            plan.knots.size()));
  }
  plan.history.resize(plan.knots.size());
  for (std::size_t k = 0; k < plan.knots.size(); ++k) {
    auto& knot = plan.knots[k];
    const double level = observation.levels[k];
    plan.history[k].push_back({knot.z_command, level});
    knot.completion_estimate = level;
    knot.z_command += damper_step(level, damper.cycle_duration, damper);
  }
  return plan;
}

std::vector<double> repeat_targets(const DrillPlan& plan, const RepeatParams& params) {
  std::vector<double> out(plan.knots.size());
  for (std::size_t k = 0; k < plan.knots.size(); ++k) {
    const auto& hist = k < plan.history.size() ? plan.history[k] : std::vector<PlanObservation>{};
    double n = 0, sz = 0, sl = 0, szz = 0, szl = 0;
    double zmin = std::numeric_limits<double>::infinity();
    double zmax = -zmin;
    for (const auto& h : hist) {
      if (!(h.level > 0.05 && h.level < 0.95)) continue;
      n += 1;
      sz += h.z_command;
      sl += h.level;
      szz += h.z_command * h.z_command;
      szl += h.z_command * h.level;
      zmin = std::min(zmin, h.z_command);
      zmax = std::max(zmax, h.z_command);
    }
    const double z_now = plan.knots[k].z_command;
    double full = z_now;
    const double denom = n * szz - sz * sz;
    if (n >= 2 && zmax > zmin && denom > 0.0) {
      const double slope = (n * szl - sz * sl) / denom;
      const double icpt = (sl - slope * sz) / n;
      full = slope > 0.0 ? (1.0 - icpt) / slope : z_now;
    } else if (!hist.empty()) {
      // Too few usable points: scale the last observation.
      const auto& last = hist.back();
      full = last.z_command / std::max(last.level, 1e-3);
    }
    out[k] = full + params.overcut;
  }
  return out;
}

DrillPlan repeat_step(DrillPlan plan, const std::vector<double>& targets, const DamperParams& damper) {
  if (targets.size() != plan.knots.size()) {
    throw Error(ErrorKind::Planner, "trajectory/repeat", "target count differs from knot count");
  }
  for (std::size_t k = 0; k < plan.knots.size(); ++k) {
    if (plan.knots[k].z_command < targets[k]) plan.knots[k].z_command += damper.v_slow;
  }
  return plan;
}

ClosedTrajectory::ClosedTrajectory(DrillPath path, std::vector<SamplePointPlan> knots, std::vector<double> slopes)
    : path_(std::move(path)), knots_(std::move(knots)), slopes_(std::move(slopes)) {}

ClosedTrajectory::Local ClosedTrajectory::locate(double theta) const {
  const std::size_t n = knots_.size();
  const double base = knots_.front().angle;
  double a = std::fmod(theta - base, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  a += base;
  // Last knot with angle <= a.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), a,
                             [](double v, const SamplePointPlan& p) { return v < p.angle; });
  std::size_t k = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  k = k == 0 ? 0 : k - 1;
  const double next = k + 1 < n ? knots_[k + 1].angle : knots_.front().angle + kTwoPi;
  const double h = next - knots_[k].angle;
  return {k, std::clamp((a - knots_[k].angle) / h, 0.0, 1.0), h};
}

double ClosedTrajectory::z_at(double theta) const {
  if (knots_.empty()) return 0.0;
  const Local l = locate(theta);
  const std::size_t k1 = (l.k + 1) % knots_.size();
  const double t = l.t;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * knots_[l.k].z_command + h10 * l.h * slopes_[l.k] + h01 * knots_[k1].z_command +
         h11 * l.h * slopes_[k1];
}

double ClosedTrajectory::dz_at(double theta) const {
  if (knots_.empty()) return 0.0;
  const Local l = locate(theta);
  const std::size_t k1 = (l.k + 1) % knots_.size();
  const double t = l.t;
  const double t2 = t * t;
  const double d00 = 6 * t2 - 6 * t;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = -6 * t2 + 6 * t;
  const double d11 = 3 * t2 - 2 * t;
  return (d00 * knots_[l.k].z_command + d01 * knots_[k1].z_command) / l.h + d10 * slopes_[l.k] +
         d11 * slopes_[k1];
}

Vec3 ClosedTrajectory::point_at(double theta) const {
  const Vec2 p = path_.point_at(theta);
  return {p.x, p.y, z_at(theta)};
}

void ClosedTrajectory::write_csv(std::ostream& os, int samples) const {
  os << "theta,x,y,z\n";
  for (int i = 0; i < samples; ++i) {
    const double theta = kTwoPi * i / samples;
    const Vec3 p = point_at(theta);
    os << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f}\n", theta, p.x, p.y, p.z);
  }
}

ClosedTrajectory build_spline(const DrillPath& path, const std::vector<SamplePointPlan>& knots) {
  const std::size_t n = knots.size();
  if (n < 2) throw Error(ErrorKind::Planner, "trajectory/spline", "need at least two knots");
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(knots[k + 1].angle > knots[k].angle)) {
      throw Error(ErrorKind::Planner, "trajectory/spline",
                  fmt::format("knot angles must be strictly increasing (knot {})", k + 1));
    }
  }
  if (!(knots.back().angle - knots.front().angle < kTwoPi)) {
    throw Error(ErrorKind::Planner, "trajectory/spline", "knot angles span a full turn or more");
  }
  // Secant slope of segment k (k -> k+1, wrapping).
  std::vector<double> secant(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k1 = (k + 1) % n;
    const double h = k1 == 0 ? knots[0].angle + kTwoPi - knots[k].angle : knots[k1].angle - knots[k].angle;
    secant[k] = (knots[k1].z_command - knots[k].z_command) / h;
  }
  std::vector<double> slopes(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = secant[(k + n - 1) % n];
    const double b = secant[k];
    slopes[k] = (a * b <= 0.0) ? 0.0 : 2.0 * a * b / (a + b);
  }
  return ClosedTrajectory(path, knots, std::move(slopes));
}

}  // namespace drillsim

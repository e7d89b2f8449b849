#pragma once

#include <limits>
#include <vector>

#include "safecct/push_profile.hpp"

namespace safecct {

struct Slab {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

enum class Phase { upper, lower };

enum class PathEnd {
  exit_low,
  exit_high,
  rest,         // settled on the z1 axis
  horizon,
  cap,          // |z2| reached the cap
  closed,       // returned to an earlier axis crossing
  axis_origin,  // backward curve reached the point where the motion started
  not_tangent,  // backward curve has no admissible direction at its start
};

const char* to_string(PathEnd end);

struct PlanarOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  double horizon = 20.0;
  double event_tol = 1e-12;
  double cap = std::numeric_limits<double>::infinity();
  double closure_tol = 1e-4;  // absolute, in the (z1, z2) plane
  /// Stop forward runs as exits once the motion can no longer change direction before the slab edge.
  bool drift_exit = true;
  bool record = false;
  int dense_samples = 3;  // extra points per step when recording
};

struct PlanarPath {
  std::vector<Vec2> points;
  std::vector<double> times;
  PathEnd end = PathEnd::horizon;
  bool by_drift = false;
  double t_end = 0.0;
  Vec2 z_end = Vec2::Zero();
  long steps = 0;

  bool exited() const { return end == PathEnd::exit_low || end == PathEnd::exit_high; }
};

/// The decoupled machine under the velocity-signed extremal feedback of one input mode.
///
/// The vector field is (z2, F(z1) - d z2) with F the upper field while z2 > 0 and the lower
/// field while z2 < 0; crossings of z2 = 0 are resolved by the sign of both fields there.
class ClosedLoop {
 public:
  ClosedLoop(const MachineModel& machine, Slab slab, InputMode mode, PlanarOptions opts = {});

  double upper(double z1) const { return profile_.upper_field(z1, mode_); }
  double lower(double z1) const { return profile_.lower_field(z1, mode_); }
  double damping() const { return profile_.d(); }

  const Slab& slab() const { return slab_; }
  InputMode mode() const { return mode_; }
  const PlanarOptions& options() const { return opts_; }
  const PushProfile& profile() const { return profile_; }

  /// Sorted distinct points of [lo, hi]: both ends plus the zeros of both fields.
  const std::vector<double>& critical_points() const { return critical_; }
  const std::vector<double>& upper_zeros() const { return upper_zeros_; }
  const std::vector<double>& lower_zeros() const { return lower_zeros_; }

  /// Forward verdict: does the closed loop keep z1 inside the slab?  Branches at ambiguous axis points.
  bool viable(const Vec2& z0, double horizon) const;
  bool viable(const Vec2& z0) const { return viable(z0, opts_.horizon); }

  PlanarPath forward(const Vec2& z0, Phase phase, double horizon) const;
  PlanarPath backward(const Vec2& z0, Phase phase, double horizon) const;

 private:
  PlanarPath run(Vec2 z, Phase phase, double dir, double horizon) const;

  PushProfile profile_;
  Slab slab_;
  InputMode mode_;
  PlanarOptions opts_;
  std::vector<double> kinks_;
  std::vector<double> critical_;
  std::vector<double> upper_zeros_;
  std::vector<double> lower_zeros_;
  double upper_last_stop_;  // sup{z : upper(z) <= 0}, or -inf
  double lower_first_stop_; // inf{z : lower(z) >= 0}, or +inf
};

}  // namespace safecct

#pragma once

#include <vector>

#include "safecct/dynamics.hpp"

namespace safecct {

/// helpful maximises ż₂ pointwise, harmful minimises it.
enum class InputMode { helpful, harmful };

const char* to_string(InputMode mode);

/// Per-neighbour argmin (helpful) or argmax (harmful) of sin(z1 - u_j) over the box [u_lower_j, u_upper_j].
std::vector<double> extremal_input(const MachineModel& machine, double z1, InputMode mode);

/// Velocity-signed closed-loop selection: helpful brakes the motion (it opposes z₂), harmful drives it.
/// At z₂ = 0 this falls back to extremal_input.
std::vector<double> feedback_input(const MachineModel& machine, const Vec2& z, InputMode mode);

/// Envelopes of ż₂ at zero velocity over all admissible inputs, and the closed-loop fields built on them.
class PushProfile {
 public:
  PushProfile() = default;
  explicit PushProfile(const MachineModel& machine);

  /// p - Σ K_j min sin(z1 - u_j)
  double up(double z1) const;
  /// p - Σ K_j max sin(z1 - u_j)
  double down(double z1) const;

  /// Forcing used while z₂ > 0 and while z₂ < 0; the damping term is added by the caller.
  double upper_field(double z1, InputMode mode) const { return mode == InputMode::helpful ? down(z1) : up(z1); }
  double lower_field(double z1, InputMode mode) const { return mode == InputMode::helpful ? up(z1) : down(z1); }

  double p() const { return p_; }
  double d() const { return d_; }

  /// Sorted z1 values in [lo, hi] where some per-neighbour extremiser switches branch.
  std::vector<double> kinks(double lo, double hi) const;

 private:
  struct Nb {
    double K, a, b, sa, ca, sb, cb;
  };
  double p_ = 0.0;
  double d_ = 0.0;
  std::vector<Nb> nb_;
};

}  // namespace safecct

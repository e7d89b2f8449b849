#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "safecct/model.hpp"
#include "safecct/ode.hpp"

namespace safecct {

using Vec2 = Eigen::Vector2d;

/// Right-hand side of the coupled swing equations on a stacked (angles, velocities) vector.
Vec coupled_rhs(const StageModel& stage, const Vec& x);
Vec coupled_rhs(const StageModel& stage, const GridState& state);

/// One machine cut out of the post-fault network; neighbour angles become box-bounded inputs.
struct MachineModel {
  int index = 0;
  double p = 0.0;
  double d = 0.0;
  std::vector<int> neighbors;
  std::vector<double> K;
  std::vector<double> u_lower;
  std::vector<double> u_upper;

  int n() const { return static_cast<int>(neighbors.size()); }
};

MachineModel make_machine(const StageModel& stage, const Bounds& bounds, int i);

Vec2 decoupled_rhs(const MachineModel& machine, const Vec2& z, std::span<const double> u);

/// Fault-on or post-fault run of the coupled model.
ode::Trajectory<Vec> simulate_stage(const StageModel& stage, const Vec& x0, double t0, double t1,
                                    const ode::Settings& settings);

ode::Settings ode_settings(const SolverSettings& s);

/// CSV with header `t, x_11, ..., x_m1, x_12, ..., x_m2`, sampled every `dt` plus the final node.
void write_trajectory_csv(std::ostream& out, const ode::Trajectory<Vec>& traj, double dt);

}  // namespace safecct

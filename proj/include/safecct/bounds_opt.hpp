#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "safecct/cct.hpp"

namespace safecct {

struct BoundsCandidate {
  Bounds bounds;
  double objective = -kInf;
  bool feasible = false;
  std::vector<double> areas;
  std::vector<std::string> warnings;
  long evaluation = 0;
};

/// Both equilibria must sit inside the box for every machine.
bool bounds_feasible(const FramedScenario& fs, const Bounds& bounds);

/// Weighted total MRPI area; −∞ without set assembly when infeasible.
BoundsCandidate objective(const FramedScenario& fs, const Bounds& bounds, const SolverSettings& settings,
                          const std::vector<double>& weights = {});

struct OptimizeOptions {
  long budget = 200;
  std::uint64_t seed = 1;
  double margin = 0.3;        // initial inflation of the equilibrium hull, rad
  double min_gap = 1e-3;      // smallest margin per side, and the slack kept below 2π
  int population = 0;         // 0: 5 per coordinate, clamped to [6, 24]
  double F = 0.5;
  double CR = 0.9;
  std::vector<double> weights;
  Exec exec = Exec::parallel;
};

struct HistoryRow {
  int generation = 0;
  int candidate = 0;
  BoundsCandidate value;
  double best_so_far = -kInf;
};

struct OptimizeResult {
  BoundsCandidate best;
  std::vector<HistoryRow> history;
};

/// Equilibrium hull inflated by `margin` on both sides, clamped to [min_gap, reach].
Bounds default_bounds(const FramedScenario& fs, double margin, double min_gap = 1e-3);

/// Differential evolution (rand/1/bin) over the per-machine outward margins of the equilibrium hull.
OptimizeResult optimize_bounds(const FramedScenario& fs, const SolverSettings& settings, const OptimizeOptions& opts);

/// `generation, candidate, objective, feasible, lower_1..m, upper_1..m`
void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history);

}  // namespace safecct

#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "safecct/equilibrium.hpp"
#include "safecct/safety_sets.hpp"

namespace safecct {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Stages expressed in the post-fault synchronous frame, plus both equilibria.
struct FramedScenario {
  Scenario scenario;
  double omega_pre = 0.0;
  double omega_fault = 0.0;
  double omega_post = 0.0;
  StageModel pre;    // shifted by its own synchronous frequency
  StageModel fault;  // shifted by omega_post
  StageModel post;   // shifted by omega_post
  EquilibriumResult pre_eq;
  EquilibriumResult post_eq;
  Vec x0;  // fault-on initial state: pre-fault angles, velocities (omega_pre - omega_post)

  int size() const { return scenario.size(); }
  const Bounds& bounds() const { return *scenario.bounds; }
};

/// Frame shifts and equilibria; the post-fault solve starts from the pre-fault angles.
FramedScenario frame_scenario(const Scenario& scenario, int gauge = 0);

struct MachineSets {
  SafetySet admissible;
  SafetySet mrpi;
};

/// Both sets for every machine; the post-fault equilibrium projection serves as the consistency probe.
std::vector<MachineSets> assemble_all(const FramedScenario& fs, const Bounds& bounds, const SolverSettings& settings,
                                      Exec exec = Exec::parallel);

/// Machine i's plane: angle re-based to the slab centre, velocity unchanged.
Vec2 project(const Vec& x, int i, const Slab& slab);

ode::Trajectory<Vec> simulate_fault(const FramedScenario& fs, double horizon, const ode::Settings& settings);

struct CrossingTimes {
  double t_mrpi = kInf;
  double t_admissible = kInf;
  bool mrpi_horizon_limited = false;
  bool admissible_horizon_limited = false;
};

/// Elapsed time after the trajectory start at which each projection first leaves the interior of each set.
std::vector<CrossingTimes> crossing_times(const ode::Trajectory<Vec>& traj, const std::vector<MachineSets>& sets,
                                          double event_tol, Exec exec = Exec::parallel);

enum class Classification { safe, potentially_safe, unsafe };
const char* to_string(Classification c);

struct CctReport {
  std::vector<CrossingTimes> machines;
  double t_safe = kInf;
  double t_unsafe = kInf;
  bool t_safe_horizon_limited = false;
  bool t_unsafe_horizon_limited = false;
  std::vector<int> attain_safe;    // machines attaining t_safe
  std::vector<int> attain_unsafe;  // machines attaining t_unsafe
  std::vector<int> empty_mrpi;
  std::vector<int> critical;  // empty-MRPI machines if any, else attain_safe
  double horizon = 0.0;
  std::vector<std::pair<double, Classification>> table;
};

CctReport cct_summary(const std::vector<CrossingTimes>& times, double horizon,
                      const std::vector<int>& empty_mrpi = {});

/// `elapsed` is the fault duration t_clear - t_fault.
Classification classify(double elapsed, const CctReport& report);

/// Full step 5: fault simulation with horizon doubling, crossing times, summary.
CctReport compute_cct(const FramedScenario& fs, const std::vector<MachineSets>& sets, const SolverSettings& settings,
                      double horizon, ode::Trajectory<Vec>* trajectory_out = nullptr, Exec exec = Exec::parallel);

struct SlabVerdict {
  bool in_slab = true;
  double exit_after = kInf;  // seconds after clearing
  int machine = -1;
  Vec clearing_state;
};

/// Fault-on to t_clear, then post-fault for `horizon` seconds, watching every angle against its slab.
SlabVerdict verify_classification(const FramedScenario& fs, double t_clear, double horizon,
                                  const ode::Settings& settings);

}  // namespace safecct

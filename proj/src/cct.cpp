#include "safecct/cct.hpp"

#include <algorithm>
#include <cmath>

namespace safecct {

FramedScenario frame_scenario(const Scenario& scenario, int gauge) {
  if (!scenario.bounds) throw ValidationError("scenario has no bounds");
  FramedScenario fs;
  fs.scenario = scenario;
  const auto pre = rotating_frame_shift(scenario.pre);
  const auto post = rotating_frame_shift(scenario.post);
  fs.omega_pre = pre.omega_synch;
  fs.omega_post = post.omega_synch;
  fs.omega_fault = rotating_frame_shift(scenario.fault).omega_synch;
  fs.pre = pre.stage;
  fs.post = post.stage;
  fs.fault = shift_by(scenario.fault, fs.omega_post);
  const int m = scenario.size();
  fs.pre_eq = find_equilibrium(fs.pre, Vec::Zero(m), gauge);
  fs.post_eq = find_equilibrium(fs.post, fs.pre_eq.angles, gauge);
  fs.x0.resize(2 * m);
  fs.x0.head(m) = fs.pre_eq.angles;
  fs.x0.tail(m).setConstant(fs.omega_pre - fs.omega_post);
  return fs;
}

std::vector<MachineSets> assemble_all(const FramedScenario& fs, const Bounds& bounds, const SolverSettings& settings,
                                      Exec exec) {
  const int m = fs.size();
  std::vector<MachineSets> out(m);
  for_each_index(2L * m, exec, [&](long k) {
    const int i = static_cast<int>(k / 2);
    const MachineModel mm = make_machine(fs.post, bounds, i);
    const Vec2 probe(rebase_angle(fs.post_eq.angles[i], 0.5 * (bounds.lower[i] + bounds.upper[i])), 0.0);
    if (k % 2 == 0)
      out[i].admissible = assemble_set(mm, bounds, SetKind::admissible, settings, probe);
    else
      out[i].mrpi = assemble_set(mm, bounds, SetKind::mrpi, settings, probe);
  });
  return out;
}

Vec2 project(const Vec& x, int i, const Slab& slab) {
  const auto m = x.size() / 2;
  return {rebase_angle(x[i], slab.center()), x[m + i]};
}

ode::Trajectory<Vec> simulate_fault(const FramedScenario& fs, double horizon, const ode::Settings& settings) {
  const double t0 = fs.scenario.t_fault;
  return simulate_stage(fs.fault, fs.x0, t0, t0 + horizon, settings);
}

std::vector<CrossingTimes> crossing_times(const ode::Trajectory<Vec>& traj, const std::vector<MachineSets>& sets,
                                          double event_tol, Exec exec) {
  const int m = static_cast<int>(sets.size());
  std::vector<CrossingTimes> out(m);
  const double t0 = traj.t_begin();
  auto first_exit = [&](const SafetySet& set, int i, bool& limited) {
    limited = false;
    if (set.empty) return 0.0;
    auto outside = [&](const Vec& x) { return !interior(set, project(x, i, set.slab)); };
    const auto t = ode::event_time(traj, outside, event_tol);
    if (!t) {
      limited = true;
      return kInf;
    }
    return *t - t0;
  };
  for_each_index(m, exec, [&](long k) {
    const int i = static_cast<int>(k);
    out[i].t_mrpi = first_exit(sets[i].mrpi, i, out[i].mrpi_horizon_limited);
    out[i].t_admissible = first_exit(sets[i].admissible, i, out[i].admissible_horizon_limited);
  });
  return out;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::safe: return "safe";
    case Classification::potentially_safe: return "potentially_safe";
    case Classification::unsafe: return "unsafe";
  }
  return "?";
}

CctReport cct_summary(const std::vector<CrossingTimes>& times, double horizon, const std::vector<int>& empty_mrpi) {
  CctReport r;
  r.machines = times;
  r.horizon = horizon;
  r.empty_mrpi = empty_mrpi;
  for (const auto& c : times) {
    r.t_safe = std::min(r.t_safe, c.t_mrpi);
    r.t_unsafe = std::min(r.t_unsafe, c.t_admissible);
  }
  for (int i = 0; i < static_cast<int>(times.size()); ++i) {
    if (times[i].t_mrpi == r.t_safe) r.attain_safe.push_back(i);
    if (times[i].t_admissible == r.t_unsafe) r.attain_unsafe.push_back(i);
  }
  r.t_safe_horizon_limited = std::isinf(r.t_safe);
  r.t_unsafe_horizon_limited = std::isinf(r.t_unsafe);
  r.critical = r.empty_mrpi.empty() ? r.attain_safe : r.empty_mrpi;
  return r;
}

Classification classify(double elapsed, const CctReport& report) {
  if (elapsed >= report.t_unsafe) return Classification::unsafe;
  if (report.empty_mrpi.empty() && elapsed <= report.t_safe) return Classification::safe;
  return Classification::potentially_safe;
}

CctReport compute_cct(const FramedScenario& fs, const std::vector<MachineSets>& sets, const SolverSettings& settings,
                      double horizon, ode::Trajectory<Vec>* trajectory_out, Exec exec) {
  std::vector<int> empty;
  for (int i = 0; i < static_cast<int>(sets.size()); ++i)
    if (sets[i].mrpi.empty) empty.push_back(i);
  const auto ode_s = ode_settings(settings);
  const double cap = std::max(horizon, settings.horizon_cap_s);
  double h = horizon;
  for (;;) {
    auto traj = simulate_fault(fs, h, ode_s);
    auto times = crossing_times(traj, sets, settings.event_tol, exec);
    bool pending_safe = true, pending_unsafe = true;
    for (const auto& c : times) {
      pending_safe = pending_safe && std::isinf(c.t_mrpi);
      pending_unsafe = pending_unsafe && std::isinf(c.t_admissible);
    }
    const int m = fs.size();
    const bool bounded = traj.back().allFinite() && traj.back().tail(m).cwiseAbs().maxCoeff() < 1e3;
    if ((pending_safe || pending_unsafe) && bounded && h < cap) {
      h = std::min(2 * h, cap);
      continue;
    }
    if (trajectory_out) *trajectory_out = std::move(traj);
    return cct_summary(times, h, empty);
  }
}

SlabVerdict verify_classification(const FramedScenario& fs, double t_clear, double horizon,
                                  const ode::Settings& settings) {
  const double tf = fs.scenario.t_fault;
  if (t_clear < tf) throw ValidationError("clearing time precedes the fault");
  const Bounds& b = fs.bounds();
  const int m = fs.size();
  SlabVerdict v;
  v.clearing_state = t_clear > tf ? simulate_stage(fs.fault, fs.x0, tf, t_clear, settings).back() : fs.x0;
  auto out_of = [&](const Vec& x) {
    for (int i = 0; i < m; ++i) {
      const double a = rebase_angle(x[i], 0.5 * (b.lower[i] + b.upper[i]));
      if (a < b.lower[i] || a > b.upper[i]) return i;
    }
    return -1;
  };
  auto post_rhs = [&](double, const Vec& x) { return coupled_rhs(fs.post, x); };
  const auto traj = ode::integrate(post_rhs, v.clearing_state, t_clear, t_clear + horizon, settings,
                                   [&](double, const Vec& x) { return out_of(x) >= 0; });
  const auto t = ode::event_time(traj, [&](const Vec& x) { return out_of(x) >= 0; }, 1e-6);
  if (t) {
    v.in_slab = false;
    v.exit_after = *t - t_clear;
    v.machine = out_of(traj(*t));
  }
  return v;
}

}  // namespace safecct

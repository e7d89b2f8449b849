#include "safecct/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace safecct {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    sink_.emplace_back(name, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json indices_json(const std::vector<int>& idx, const Scenario& s) {
  json a = json::array();
  for (int i : idx) a.push_back(s.machine_name(i));
  return a;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string scenario_digest(const Scenario& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : save_scenario(s)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json certificate_json(const Certificate& c) {
  return {{"gamma", number(c.gamma)}, {"lhs", number(c.lhs)}, {"rhs", number(c.rhs)},
          {"passed", c.passed},       {"margin", number(c.margin)}};
}

AnalysisReport run_pipeline(const Scenario& scenario, const PipelineOptions& opts) {
  AnalysisReport r;
  Stopwatch clock(r.timing);
  r.scenario = scenario;
  if (opts.bounds) r.scenario.bounds = *opts.bounds;
  if (!r.scenario.bounds) throw ValidationError("no bounds: give them in the scenario or with --bounds");
  r.scenario.bounds->validate(r.scenario.size());
  r.digest = scenario_digest(r.scenario);
  const SolverSettings& settings = r.scenario.solver;

  run_stage("step 1 (frame shift)", [&] {
    r.omega_pre = rotating_frame_shift(r.scenario.pre).omega_synch;
    r.omega_fault = rotating_frame_shift(r.scenario.fault).omega_synch;
    r.omega_post = rotating_frame_shift(r.scenario.post).omega_synch;
  });
  clock.lap("frame_shift");

  run_stage("step 2 (certificate)", [&] {
    r.certificate_pre = sync_certificate(rotating_frame_shift(r.scenario.pre).stage, opts.gamma);
    r.certificate_post = sync_certificate(rotating_frame_shift(r.scenario.post).stage, opts.gamma);
    if (!r.certificate_pre.passed)
      r.warnings.push_back("pre-fault synchronization condition fails at gamma=" + fmt(opts.gamma) +
                           " (not required; the pre-fault equilibrium is solved directly)");
    const Certificate& c = r.certificate_post;
    if (!c.passed) {
      const std::string what = "post-fault synchronization condition fails at gamma=" + fmt(c.gamma) + ": lhs " +
                               fmt(c.lhs) + " > sin(gamma) " + fmt(c.rhs);
      if (!opts.force) throw CertificateError(what);
      r.warnings.push_back(what + " (continuing with --force)");
    }
  });
  clock.lap("certificate");

  r.framed = run_stage("step 3 (equilibria)", [&] { return frame_scenario(r.scenario); });
  auto& fs = *r.framed;
  clock.lap("equilibria");

  if (opts.optimize) {
    auto best = run_stage("step 3b (bound optimization)",
                          [&] { return optimize_bounds(fs, settings, opts.optimizer).best; });
    r.optimized = best;
    r.scenario.bounds = best.bounds;
    fs.scenario.bounds = best.bounds;
    r.digest = scenario_digest(r.scenario);
    clock.lap("optimize_bounds");
  }
  r.bounds = *r.scenario.bounds;
  if (!bounds_feasible(fs, r.bounds))
    r.warnings.push_back("an equilibrium lies outside the bounds; the fault starts outside the constraint set");

  r.sets = run_stage("step 4 (safety sets)", [&] { return assemble_all(fs, r.bounds, settings, opts.exec); });
  for (int i = 0; i < fs.size(); ++i) {
    for (const SafetySet* s : {&r.sets[i].admissible, &r.sets[i].mrpi})
      r.summaries.push_back({i, s->kind, s->empty, volume(*s), static_cast<int>(s->boundary.size()), s->cap});
  }
  clock.lap("safety_sets");

  const double horizon = opts.horizon.value_or(settings.horizon_s);
  r.cct = run_stage("step 5 (crossing times)",
                    [&] { return compute_cct(fs, r.sets, settings, horizon, &r.trajectory, opts.exec); });
  clock.lap("cct");

  if (opts.t_clear) {
    r.t_clear = opts.t_clear;
    const double elapsed = *opts.t_clear - r.scenario.t_fault;
    if (elapsed < 0) throw ValidationError("t_clear precedes t_fault");
    r.classification = classify(elapsed, r.cct);
    r.cct.table.emplace_back(*opts.t_clear, *r.classification);
    r.verdict = run_stage("step 6 (verification)", [&] {
      return verify_classification(fs, *opts.t_clear, opts.verify_horizon, ode_settings(settings));
    });
    clock.lap("verification");
  }
  return r;
}

json report_json(const AnalysisReport& r, bool with_timing) {
  const Scenario& s = r.scenario;
  json j;
  j["tool"] = {{"name", "safecct"}, {"version", kVersion}};
  j["scenario"] = {{"digest", r.digest}, {"machines", s.size()}, {"t_fault", number(s.t_fault)}};
  json names = json::array();
  for (int i = 0; i < s.size(); ++i) names.push_back(s.machine_name(i));
  j["scenario"]["names"] = names;
  const auto& v = s.solver;
  j["settings"] = {{"abs_tol", v.abs_tol},
                   {"rel_tol", v.rel_tol},
                   {"event_tol", v.event_tol},
                   {"horizon_s", v.horizon_s},
                   {"horizon_cap_s", v.horizon_cap_s},
                   {"z2_cap", v.z2_cap},
                   {"grid_resolution", v.grid_resolution},
                   {"backward_horizon_s", v.backward_horizon_s},
                   {"oracle_horizon_s", v.oracle_horizon_s},
                   {"closure_tol", v.closure_tol},
                   {"tol_band_frac", v.tol_band_frac}};
  j["omega_synch"] = {{"pre", number(r.omega_pre)}, {"fault", number(r.omega_fault)}, {"post", number(r.omega_post)}};
  j["certificate"] = {{"pre", certificate_json(r.certificate_pre)}, {"post", certificate_json(r.certificate_post)}};
  if (r.framed) {
    j["equilibria"] = {
        {"pre", {{"angles", vec_json(r.framed->pre_eq.angles)}, {"residual", number(r.framed->pre_eq.residual)}}},
        {"post", {{"angles", vec_json(r.framed->post_eq.angles)}, {"residual", number(r.framed->post_eq.residual)}}}};
  }
  j["bounds"] = {{"lower", vec_json(r.bounds.lower)}, {"upper", vec_json(r.bounds.upper)}};
  if (r.optimized) {
    json areas = json::array();
    for (double a : r.optimized->areas) areas.push_back(number(a));
    j["optimized_bounds"] = {{"objective", number(r.optimized->objective)}, {"areas", areas}};
  }
  json sets = json::array();
  for (const auto& ss : r.summaries) {
    sets.push_back({{"machine", s.machine_name(ss.machine)},
                    {"kind", to_string(ss.kind)},
                    {"empty", ss.empty},
                    {"area", number(ss.area)},
                    {"vertices", ss.vertices},
                    {"z2_cap", number(ss.cap)}});
  }
  j["sets"] = sets;
  json machines = json::array();
  for (std::size_t i = 0; i < r.cct.machines.size(); ++i) {
    const auto& c = r.cct.machines[i];
    machines.push_back({{"machine", s.machine_name(static_cast<int>(i))},
                        {"t_mrpi", number(c.t_mrpi)},
                        {"t_admissible", number(c.t_admissible)},
                        {"mrpi_horizon_limited", c.mrpi_horizon_limited},
                        {"admissible_horizon_limited", c.admissible_horizon_limited}});
  }
  json table = json::array();
  for (const auto& [t, cl] : r.cct.table) table.push_back({{"t_clear", number(t)}, {"classification", to_string(cl)}});
  j["cct"] = {{"machines", machines},
              {"t_safe", number(r.cct.t_safe)},
              {"t_unsafe", number(r.cct.t_unsafe)},
              {"t_safe_horizon_limited", r.cct.t_safe_horizon_limited},
              {"t_unsafe_horizon_limited", r.cct.t_unsafe_horizon_limited},
              {"attaining_safe", indices_json(r.cct.attain_safe, s)},
              {"attaining_unsafe", indices_json(r.cct.attain_unsafe, s)},
              {"empty_mrpi", indices_json(r.cct.empty_mrpi, s)},
              {"critical", indices_json(r.cct.critical, s)},
              {"horizon", number(r.cct.horizon)},
              {"classifications", table}};
  if (r.verdict) {
    j["verification"] = {{"t_clear", number(*r.t_clear)},
                         {"in_slab", r.verdict->in_slab},
                         {"exit_after", number(r.verdict->exit_after)},
                         {"machine", r.verdict->machine < 0 ? json(nullptr) : json(s.machine_name(r.verdict->machine))},
                         {"clearing_state", vec_json(r.verdict->clearing_state)}};
  }
  j["warnings"] = r.warnings;
  j["summary"] = summary_line(r);
  if (with_timing) {
    json t = json::object();
    double total = 0;
    for (const auto& [name, sec] : r.timing) {
      t[name] = sec;
      total += sec;
    }
    t["total"] = total;
    j["timing"] = t;
  }
  return j;
}

std::string summary_line(const AnalysisReport& r) {
  std::ostringstream o;
  o << "t_safe=" << fmt(r.cct.t_safe) << ", t_unsafe=" << fmt(r.cct.t_unsafe) << ", critical=";
  if (r.cct.critical.empty()) o << "none";
  for (std::size_t k = 0; k < r.cct.critical.size(); ++k)
    o << (k ? "+" : "") << r.scenario.machine_name(r.cct.critical[k]);
  if (r.t_clear && r.classification)
    o << ", classification(t_C=" << fmt(*r.t_clear) << ")=" << to_string(*r.classification);
  return o.str();
}

}  // namespace safecct

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "safecct/bounds_opt.hpp"

namespace safecct {

inline constexpr const char* kVersion = "0.4.0";

struct PipelineOptions {
  std::optional<Bounds> bounds;  // overrides the scenario's bounds
  double gamma = std::numbers::pi / 2;
  std::optional<double> t_clear;  // absolute clearing time
  std::optional<double> horizon;  // initial fault-on horizon
  bool optimize = false;
  OptimizeOptions optimizer;
  bool force = false;
  double verify_horizon = 20.0;
  Exec exec = Exec::parallel;
};

struct SetSummary {
  int machine = 0;
  SetKind kind = SetKind::admissible;
  bool empty = true;
  double area = 0.0;
  int vertices = 0;
  double cap = 0.0;
};

struct AnalysisReport {
  std::string digest;
  Scenario scenario;
  Bounds bounds;
  double omega_pre = 0.0, omega_fault = 0.0, omega_post = 0.0;
  Certificate certificate_pre, certificate_post;
  std::vector<std::string> warnings;
  std::optional<FramedScenario> framed;
  std::vector<MachineSets> sets;
  std::vector<SetSummary> summaries;
  std::optional<BoundsCandidate> optimized;
  ode::Trajectory<Vec> trajectory;
  CctReport cct;
  std::optional<double> t_clear;
  std::optional<Classification> classification;
  std::optional<SlabVerdict> verdict;
  std::vector<std::pair<std::string, double>> timing;  // seconds per stage
};

/// Tags errors with the pipeline stage, keeping their type.
template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(stage + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(stage + ": " + e.what());
  } catch (const CertificateError& e) {
    throw CertificateError(stage + ": " + e.what());
  } catch (const IntegrationError& e) {
    throw IntegrationError(stage + ": " + e.what());
  } catch (const SolverError& e) {
    throw SolverError(stage + ": " + e.what());
  } catch (const TopologyError& e) {
    throw TopologyError(stage + ": " + e.what());
  }
}

/// Hex FNV-1a of the canonical scenario text.
std::string scenario_digest(const Scenario& s);

/// Frame shift, certificate, equilibria, optional bound search, sets, fault simulation, crossings, classification.
AnalysisReport run_pipeline(const Scenario& scenario, const PipelineOptions& opts);

/// Serialized report; sorted keys, non-finite numbers as strings, timing only when asked.
nlohmann::json report_json(const AnalysisReport& r, bool with_timing = true);
nlohmann::json certificate_json(const Certificate& c);
nlohmann::json number(double v);

/// `t_safe=…, t_unsafe=…, critical=G…[, classification(t_C=…)=…]`
std::string summary_line(const AnalysisReport& r);

/// Per-machine boundary CSVs, SVG renderings and the trajectory CSV.
std::vector<std::filesystem::path> export_geometry(const AnalysisReport& r, const std::filesystem::path& dir);

/// Standalone SVG of one machine's plane.
std::string render_svg(const AnalysisReport& r, int machine);

}  // namespace safecct

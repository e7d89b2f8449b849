// safecct command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "safecct/report.hpp"

using namespace safecct;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, parse = 2, validation = 3, certificate = 4, solver = 5, integration = 6, topology = 7, io = 8,
            usage = 64, internal = 70 };

struct Common {
  std::string scenario;
  std::string bounds;
  std::string out;
  double gamma = std::numbers::pi / 2;
  bool serial = false;
};

fs::path out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("SAFECCT_OUT_DIR"); env && *env) return env;
  return "safecct_out";
}

Scenario load(const Common& c) {
  Scenario s = load_scenario_file(c.scenario);
  if (!c.bounds.empty()) {
    Bounds b = parse_bounds_arg(c.bounds);
    b.validate(s.size());
    s.bounds = std::move(b);
  }
  return s;
}

void emit(const json& j, const fs::path& file = {}) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!file.empty()) {
    fs::create_directories(file.parent_path());
    std::ofstream f(file);
    if (!f) throw std::ios_base::failure("cannot write " + file.string());
    f << text;
  }
}

json eq_json(const EquilibriumResult& e, const StageModel& stage) {
  json a = json::array();
  for (Eigen::Index i = 0; i < e.angles.size(); ++i) a.push_back(e.angles[i]);
  return {{"angles", a},
          {"residual", number(e.residual)},
          {"iterations", e.iterations},
          {"cohesive_gamma", number(e.cohesive_gamma)},
          {"linearly_stable", linearization_stable(stage, e.angles)}};
}

void add_common(CLI::App* cmd, Common& c, bool bounds, bool out) {
  cmd->add_option("--scenario", c.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  if (bounds) cmd->add_option("--bounds", c.bounds, "bounds file or inline lo:hi,lo:hi,...");
  if (out) cmd->add_option("--out", c.out, "output directory (default $SAFECCT_OUT_DIR or ./safecct_out)");
  cmd->add_flag("--serial", c.serial, "run per-machine work on one thread");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-based safe/unsafe critical clearing times for swing-equation networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common c;
  std::string stage_name = "all";
  double t_clear = -1, horizon = -1, dt = 0.01, margin = 0.3;
  long budget = 200;
  std::uint64_t seed = 1;
  std::vector<double> weights;
  bool force = false, optimize = false;

  auto* certify = app.add_subcommand("certify", "synchronization condition per stage (exit 4 if one fails)");
  add_common(certify, c, false, false);
  certify->add_option("--gamma", c.gamma, "cohesiveness angle in rad (default pi/2)");
  certify->add_option("--stage", stage_name, "pre, fault, post or all")->check(CLI::IsMember({"pre", "fault", "post", "all"}));

  auto* equilibrium = app.add_subcommand("equilibrium", "frame shifts and pre/post-fault equilibria");
  add_common(equilibrium, c, false, false);

  auto* sets = app.add_subcommand("sets", "admissible sets and MRPIs with geometry export");
  add_common(sets, c, true, true);

  auto* cct = app.add_subcommand("cct", "crossing times, t_safe/t_unsafe, classification");
  add_common(cct, c, true, true);
  auto* analyze = app.add_subcommand("analyze", "full pipeline; report.json and geometry in --out");
  add_common(analyze, c, true, true);
  for (auto* cmd : {cct, analyze}) {
    cmd->add_option("--t-clear", t_clear, "clearing time to classify and verify, s");
    cmd->add_option("--horizon", horizon, "initial fault-on horizon, s");
    cmd->add_option("--gamma", c.gamma, "cohesiveness angle in rad (default pi/2)");
    cmd->add_flag("--force", force, "continue when the synchronization condition fails");
  }
  analyze->add_flag("--optimize", optimize, "search bounds before assembling the sets");

  auto* opt = app.add_subcommand("optimize-bounds", "differential-evolution search for bounds maximizing MRPI area");
  add_common(opt, c, false, true);
  for (auto* cmd : {opt, analyze}) {
    cmd->add_option("--budget", budget, "objective evaluations")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--margin", margin, "initial hull inflation, rad");
    cmd->add_option("--weights", weights, "per-machine objective weights");
  }

  auto* simulate = app.add_subcommand("simulate", "coupled trajectory as CSV");
  add_common(simulate, c, false, true);
  simulate->add_option("--stage", stage_name, "pre, fault, post, or clear (fault then post)")
      ->check(CLI::IsMember({"pre", "fault", "post", "clear"}));
  simulate->add_option("--t-clear", t_clear, "clearing time for --stage clear, s");
  simulate->add_option("--horizon", horizon, "simulated span, s");
  simulate->add_option("--dt", dt, "output step, s")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    const Exec exec = c.serial ? Exec::serial : Exec::parallel;
    Scenario scenario = load(c);

    if (certify->parsed()) {
      json j;
      bool all_pass = true;
      for (const char* name : {"pre", "fault", "post"}) {
        if (stage_name != "all" && stage_name != name) continue;
        const StageModel& st = name[1] == 'r' ? scenario.pre : name[0] == 'f' ? scenario.fault : scenario.post;
        const Certificate cert = sync_certificate(rotating_frame_shift(st).stage, c.gamma);
        all_pass = all_pass && cert.passed;
        j[name] = certificate_json(cert);
      }
      emit(j);
      return all_pass ? ok : certificate;
    }

    if (equilibrium->parsed()) {
      const FramedScenario f = frame_scenario(scenario);
      emit({{"omega_synch", {{"pre", f.omega_pre}, {"fault", f.omega_fault}, {"post", f.omega_post}}},
            {"pre", eq_json(f.pre_eq, f.pre)},
            {"post", eq_json(f.post_eq, f.post)}});
      return ok;
    }

    if (simulate->parsed()) {
      const FramedScenario f = frame_scenario(scenario);
      const double span = horizon > 0 ? horizon : scenario.solver.horizon_s;
      const auto s = ode_settings(scenario.solver);
      ode::Trajectory<Vec> traj;
      const double t0 = scenario.t_fault;
      if (stage_name == "pre") {
        Vec x0 = Vec::Zero(2 * f.size());
        x0.head(f.size()) = f.pre_eq.angles;
        traj = simulate_stage(f.pre, x0, t0, t0 + span, s);
      } else if (stage_name == "post") {
        Vec x0 = Vec::Zero(2 * f.size());
        x0.head(f.size()) = f.pre_eq.angles;
        traj = simulate_stage(f.post, x0, t0, t0 + span, s);
      } else if (stage_name == "clear") {
        if (t_clear < t0) throw ValidationError("--stage clear needs --t-clear >= t_fault");
        const Vec xc = t_clear > t0 ? simulate_stage(f.fault, f.x0, t0, t_clear, s).back() : f.x0;
        traj = simulate_stage(f.post, xc, t_clear, t_clear + span, s);
      } else {
        traj = simulate_fault(f, span, s);
      }
      const fs::path dir = out_dir(c);
      fs::create_directories(dir);
      const fs::path file = dir / ("trajectory_" + stage_name + ".csv");
      std::ofstream o(file);
      if (!o) throw std::ios_base::failure("cannot write " + file.string());
      write_trajectory_csv(o, traj, dt);
      std::cout << file.string() << "\n";
      return ok;
    }

    if (opt->parsed()) {
      const FramedScenario f = frame_scenario(scenario);
      OptimizeOptions oo;
      oo.budget = budget;
      oo.seed = seed;
      oo.margin = margin;
      oo.weights = weights;
      oo.exec = exec;
      const auto res = optimize_bounds(f, scenario.solver, oo);
      const fs::path dir = out_dir(c);
      fs::create_directories(dir);
      std::ofstream h(dir / "optimize_history.csv");
      if (!h) throw std::ios_base::failure("cannot write history");
      write_history_csv(h, res.history);
      json lo = json::array(), hi = json::array(), areas = json::array();
      for (int i = 0; i < f.size(); ++i) {
        lo.push_back(res.best.bounds.lower[i]);
        hi.push_back(res.best.bounds.upper[i]);
        areas.push_back(res.best.areas[i]);
      }
      emit({{"bounds", {{"lower", lo}, {"upper", hi}}},
            {"objective", number(res.best.objective)},
            {"areas", areas},
            {"evaluations", res.history.size()},
            {"seed", seed}},
           dir / "optimized_bounds.json");
      return ok;
    }

    if (sets->parsed()) {
      if (!scenario.bounds) throw ValidationError("no bounds: give them in the scenario or with --bounds");
      AnalysisReport r;
      r.scenario = scenario;
      r.bounds = *scenario.bounds;
      r.framed = frame_scenario(scenario);
      r.sets = assemble_all(*r.framed, r.bounds, scenario.solver, exec);
      json arr = json::array();
      for (int i = 0; i < scenario.size(); ++i) {
        for (const SafetySet* s : {&r.sets[i].admissible, &r.sets[i].mrpi}) {
          arr.push_back({{"machine", scenario.machine_name(i)},
                         {"kind", to_string(s->kind)},
                         {"empty", s->empty},
                         {"area", volume(*s)},
                         {"vertices", s->boundary.size()},
                         {"z2_cap", number(s->cap)}});
        }
      }
      const fs::path dir = out_dir(c);
      export_geometry(r, dir);
      emit({{"sets", arr}}, dir / "sets.json");
      return ok;
    }

    PipelineOptions po;
    po.gamma = c.gamma;
    po.force = force;
    po.exec = exec;
    if (t_clear >= 0) po.t_clear = t_clear;
    if (horizon > 0) po.horizon = horizon;
    if (analyze->parsed() && optimize) {
      po.optimize = true;
      po.optimizer.budget = budget;
      po.optimizer.seed = seed;
      po.optimizer.margin = margin;
      po.optimizer.weights = weights;
      po.optimizer.exec = exec;
    }
    const AnalysisReport r = run_pipeline(scenario, po);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    const fs::path dir = out_dir(c);
    if (analyze->parsed()) {
      fs::create_directories(dir);
      std::ofstream f(dir / "report.json");
      if (!f) throw std::ios_base::failure("cannot write report");
      f << report_json(r).dump(2) << "\n";
      export_geometry(r, dir);
    } else {
      std::cout << report_json(r).dump(2) << "\n";
    }
    std::cout << summary_line(r) << "\n";
    return ok;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return parse;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return validation;
  } catch (const CertificateError& e) {
    std::cerr << "certificate failed: " << e.what() << "\n";
    return certificate;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return solver;
  } catch (const IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return integration;
  } catch (const TopologyError& e) {
    std::cerr << "set assembly error: " << e.what() << "\n";
    return topology;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return io;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return io;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return internal;
  }
}

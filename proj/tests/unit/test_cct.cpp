#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace safecct;

namespace {

CctReport summary_of(std::vector<std::pair<double, double>> tm_ta, std::vector<int> empty = {}) {
  std::vector<CrossingTimes> t;
  for (auto [m, a] : tm_ta) t.push_back({m, a, std::isinf(m), std::isinf(a)});
  return cct_summary(t, 5.0, empty);
}

}  // namespace

TEST_CASE("fault simulation starts at the pre-fault equilibrium") {
  const auto fs = frame_scenario(test::ieee14());
  const auto traj = simulate_fault(fs, 1.0, ode_settings(fs.scenario.solver));
  CHECK(traj.t_begin() == fs.scenario.t_fault);
  CHECK((traj(fs.scenario.t_fault) - fs.x0).norm() == 0.0);
  CHECK((fs.x0.head(5) - fs.pre_eq.angles).norm() == 0.0);
  // in the post-fault frame the pre-fault rest state drifts at omega_pre - omega_post
  CHECK(fs.x0[5] == doctest::Approx(fs.omega_pre - fs.omega_post));
}

TEST_CASE("summary takes infima") {
  const CctReport r = summary_of({{2.0, 3.0}, {1.5, kInf}, {kInf, 2.5}});
  CHECK(r.t_safe == 1.5);
  CHECK(r.t_unsafe == 2.5);
  CHECK(r.attain_safe == std::vector<int>{1});
  CHECK(r.attain_unsafe == std::vector<int>{2});
  CHECK(r.critical == std::vector<int>{1});
  CHECK(r.t_safe <= r.t_unsafe);

  const CctReport none = summary_of({{kInf, kInf}});
  CHECK(std::isinf(none.t_safe));
  CHECK(none.t_safe_horizon_limited);

  const CctReport one = summary_of({{0.7, 1.9}});
  CHECK(one.t_safe == 0.7);
  CHECK(one.t_unsafe == 1.9);

  const CctReport emp = summary_of({{0.0, 1.0}, {0.0, 2.0}, {3.0, 4.0}}, {1});
  CHECK(emp.critical == std::vector<int>{1});
  CHECK(emp.attain_safe == std::vector<int>({0, 1}));
}

TEST_CASE("classification is a threshold function") {
  const CctReport r = summary_of({{1.0, 2.0}});
  CHECK(classify(0.0, r) == Classification::safe);
  CHECK(classify(1.0, r) == Classification::safe);
  CHECK(classify(1.5, r) == Classification::potentially_safe);
  CHECK(classify(2.0, r) == Classification::unsafe);
  CHECK(classify(7.0, r) == Classification::unsafe);
  // an empty MRPI never certifies safety
  const CctReport e = summary_of({{0.0, 2.0}}, {0});
  CHECK(classify(0.0, e) == Classification::potentially_safe);
  CHECK(classify(2.5, e) == Classification::unsafe);
  CHECK(std::string(to_string(Classification::potentially_safe)) == "potentially_safe");
}

TEST_CASE("crossing times on the two-machine scenario") {
  const auto s = test::two_machine();
  const auto fs = frame_scenario(s);
  const auto sets = assemble_all(fs, fs.bounds(), s.solver);
  ode::Trajectory<Vec> traj;
  const CctReport r = compute_cct(fs, sets, s.solver, s.solver.horizon_s, &traj);
  CHECK(r.t_safe <= r.t_unsafe);
  CHECK(r.machines[1].t_mrpi == 0.0);  // empty MRPI
  CHECK(r.t_safe == 0.0);
  CHECK(std::isfinite(r.t_unsafe));
  for (const auto& c : r.machines) CHECK(c.t_mrpi <= c.t_admissible);
  // serial and parallel crossing detection agree
  const auto a = crossing_times(traj, sets, s.solver.event_tol, Exec::serial);
  const auto b = crossing_times(traj, sets, s.solver.event_tol, Exec::parallel);
  for (int i = 0; i < 2; ++i) CHECK(a[i].t_admissible == b[i].t_admissible);
}

TEST_CASE("a projection that never leaves is horizon limited") {
  Scenario s = test::two_machine();
  s.fault = s.pre;
  s.solver.horizon_cap_s = 10;
  const auto fs = frame_scenario(s);
  const auto sets = assemble_all(fs, fs.bounds(), s.solver);
  const CctReport r = compute_cct(fs, sets, s.solver, 5.0);
  CHECK(std::isinf(r.machines[0].t_admissible));
  CHECK(r.machines[0].admissible_horizon_limited);
  CHECK(r.horizon == 10.0);
}

TEST_CASE("widening the bounds never decreases admissible crossing times") {
  const auto s = test::two_machine();
  const auto fs = frame_scenario(s);
  const auto traj = simulate_fault(fs, 10.0, ode_settings(s.solver));
  Bounds wide = fs.bounds();
  for (int i = 0; i < 2; ++i) {
    wide.lower[i] -= 0.2;
    wide.upper[i] += 0.2;
  }
  // only the own slab grows; the neighbour box stays as in the base case
  for (int i = 0; i < 2; ++i) {
    const MachineModel m = make_machine(fs.post, fs.bounds(), i);
    std::vector<MachineSets> base(1), big(1);
    base[0].admissible = assemble_set(m, fs.bounds(), SetKind::admissible, s.solver);
    big[0].admissible = assemble_set(m, wide, SetKind::admissible, s.solver);
    base[0].mrpi = big[0].mrpi = SafetySet{};
    auto t = [&](const std::vector<MachineSets>& ms) {
      const auto& set = ms[0].admissible;
      auto out = [&](const Vec& x) { return !interior(set, project(x, i, set.slab)); };
      const auto e = ode::event_time(traj, out, 1e-6);
      return e ? *e : kInf;
    };
    CHECK(t(big) >= t(base) - 1e-6);
  }
}

TEST_CASE("verification by direct simulation") {
  Scenario s = test::two_machine();
  s.fault = s.pre;
  s.post = s.pre;
  const auto fs = frame_scenario(s);
  const auto v = verify_classification(fs, s.t_fault, 30.0, ode_settings(s.solver));
  CHECK(v.in_slab);
  CHECK(std::isinf(v.exit_after));
  CHECK_THROWS_AS(verify_classification(fs, s.t_fault - 1.0, 5.0, ode_settings(s.solver)), ValidationError);
}

TEST_CASE("clearing past t_unsafe leaves the slab on the fixture") {
  const auto sc = test::ieee14();
  const auto fs = frame_scenario(sc);
  const auto sets = assemble_all(fs, fs.bounds(), sc.solver);
  const CctReport r = compute_cct(fs, sets, sc.solver, sc.solver.horizon_s);
  CHECK(r.t_safe == 0.0);
  CHECK(r.critical == std::vector<int>{0});
  REQUIRE(std::isfinite(r.t_unsafe));
  const auto v = verify_classification(fs, sc.t_fault + r.t_unsafe + 0.1, 20.0, ode_settings(sc.solver));
  CHECK_FALSE(v.in_slab);
}

#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace safecct;

TEST_CASE("infeasible bounds skip assembly") {
  const auto fs = frame_scenario(test::two_machine());
  Bounds b = fs.bounds();
  b.lower[0] = fs.pre_eq.angles[0] + 0.1;
  b.upper[0] = b.lower[0] + 1.0;
  const auto c = objective(fs, b, fs.scenario.solver);
  CHECK_FALSE(c.feasible);
  CHECK(c.objective == -kInf);
  CHECK(c.areas.empty());
}

TEST_CASE("vanishing slab has vanishing objective") {
  const auto fs = frame_scenario(test::two_machine());
  const Bounds b = default_bounds(fs, 1e-4);
  const auto c = objective(fs, b, fs.scenario.solver);
  CHECK(c.feasible);
  CHECK(c.objective < 1e-2);
}

TEST_CASE("fixture bounds keep the emptiness pattern") {
  const auto fs = frame_scenario(test::ieee14());
  const auto c = objective(fs, fs.bounds(), fs.scenario.solver);
  // the fixture's G3 post-fault equilibrium lies below the tabulated lower bound
  CHECK_FALSE(c.feasible);
  Bounds b = fs.bounds();
  b.lower[2] = -1.2;
  const auto d = objective(fs, b, fs.scenario.solver);
  CHECK(d.feasible);
  REQUIRE(d.areas.size() == 5);
  CHECK(d.areas[0] == 0.0);
  for (int i = 1; i < 5; ++i) CHECK(d.areas[i] > 0.0);
}

TEST_CASE("budget of one returns the initial candidate") {
  const auto fs = frame_scenario(test::two_machine());
  OptimizeOptions o;
  o.budget = 1;
  const auto r = optimize_bounds(fs, fs.scenario.solver, o);
  REQUIRE(r.history.size() == 1);
  CHECK(r.best.bounds == default_bounds(fs, o.margin));
  CHECK(r.best.objective == r.history[0].value.objective);
}

TEST_CASE("search contract on a short budget") {
  const auto fs = frame_scenario(test::two_machine());
  OptimizeOptions o;
  o.budget = 30;
  o.seed = 42;
  const auto a = optimize_bounds(fs, fs.scenario.solver, o);
  o.exec = Exec::serial;
  const auto b = optimize_bounds(fs, fs.scenario.solver, o);
  std::ostringstream ha, hb;
  write_history_csv(ha, a.history);
  write_history_csv(hb, b.history);
  CHECK(ha.str() == hb.str());
  CHECK(a.history.size() == 30);
  double best = -kInf;
  for (const auto& h : a.history) {
    CHECK(h.best_so_far >= best);
    best = h.best_so_far;
    CHECK(h.value.feasible == bounds_feasible(fs, h.value.bounds));
  }
  CHECK(a.best.feasible);
  CHECK(bounds_feasible(fs, a.best.bounds));
  CHECK(a.best.objective == best);
  // a larger budget on the same seed never reports a worse best
  o.budget = 45;
  const auto c = optimize_bounds(fs, fs.scenario.solver, o);
  CHECK(c.best.objective >= a.best.objective);
  std::istringstream in(ha.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "generation, candidate, objective, feasible, lower_1, lower_2, upper_1, upper_2");
}

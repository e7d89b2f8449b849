#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace safecct;

namespace {

MachineModel single(double p, double d, double lo, double hi, double K = 1.0) {
  MachineModel m;
  m.p = p;
  m.d = d;
  m.neighbors = {1};
  m.K = {K};
  m.u_lower = {lo};
  m.u_upper = {hi};
  return m;
}

Bounds slab_bounds(double lo, double hi, double ulo = -1, double uhi = 1) { return {Vec2(lo, ulo), Vec2(hi, uhi)}; }

SafetySet square_set() {
  SafetySet s;
  s.empty = false;
  s.boundary = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  s.slab = {0, 1};
  s.tol_band = 0.01;
  return s;
}

}  // namespace

TEST_CASE("extremal input") {
  const MachineModel m = single(0, 1, -0.5, 0.5);
  CHECK(extremal_input(m, 0.0, InputMode::helpful)[0] == doctest::Approx(0.5));
  CHECK(extremal_input(m, 0.0, InputMode::harmful)[0] == doctest::Approx(-0.5));
  const MachineModel wide = single(0, 1, 0.0, 3.0);
  CHECK(extremal_input(wide, 0.0, InputMode::helpful)[0] == doctest::Approx(std::numbers::pi / 2));
  const MachineModel point = single(0, 1, 0.7, 0.7);
  for (auto mode : {InputMode::helpful, InputMode::harmful})
    for (double z : {-2.0, 0.0, 0.7, 3.0}) CHECK(extremal_input(point, z, mode)[0] == 0.7);
}

TEST_CASE("extremal input is the pointwise extremum over the box") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    double a = U(rng), b = U(rng);
    if (a > b) std::swap(a, b);
    const MachineModel m = single(0.1, 1, a, b);
    const double z = U(rng);
    const double uh = extremal_input(m, z, InputMode::helpful)[0];
    const double ux = extremal_input(m, z, InputMode::harmful)[0];
    CHECK(uh >= a - 1e-12);
    CHECK(uh <= b + 1e-12);
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k <= 2000; ++k) {
      const double s = std::sin(z - (a + (b - a) * k / 2000.0));
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    CHECK(std::sin(z - uh) <= lo + 1e-9);
    CHECK(std::sin(z - ux) >= hi - 1e-9);
    const PushProfile pp(m);
    CHECK(pp.up(z) == doctest::Approx(0.1 - std::sin(z - uh)));
    CHECK(pp.down(z) == doctest::Approx(0.1 - std::sin(z - ux)));
  }
}

TEST_CASE("feedback input opposes or drives the motion") {
  const MachineModel m = single(0, 1, -0.5, 0.5);
  const PushProfile pp(m);
  auto acc = [&](const Vec2& z, InputMode mode) { return decoupled_rhs(m, z, feedback_input(m, z, mode))[1] + z[1]; };
  CHECK(acc({0.2, 1.0}, InputMode::helpful) == doctest::Approx(pp.down(0.2)));
  CHECK(acc({0.2, -1.0}, InputMode::helpful) == doctest::Approx(pp.up(0.2)));
  CHECK(acc({0.2, 1.0}, InputMode::harmful) == doctest::Approx(pp.up(0.2)));
  CHECK(acc({0.2, -1.0}, InputMode::harmful) == doctest::Approx(pp.down(0.2)));
}

TEST_CASE("barrier curve of a constant-push machine is a parabola") {
  // no neighbours, z1' = z2, z2' = -1: backward from (hi, 0) gives z1 = hi - z2^2 / 2
  MachineModel m;
  m.p = -1.0;
  m.d = 0.0;
  const Bounds b{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
  SolverSettings s;
  s.z2_cap = 50;
  const BarrierCurve c = barrier_curve(m, b, Corner::upper, InputMode::helpful, s);
  REQUIRE(c.points.size() > 5);
  CHECK(c.points.front().x() == 1.0);
  CHECK(c.points.front().y() == 0.0);
  for (const auto& p : c.points) {
    CHECK(p.y() >= -1e-12);
    CHECK(p.x() == doctest::Approx(1.0 - p.y() * p.y() / 2).epsilon(1e-7));
  }
  CHECK(c.stop == PathEnd::exit_low);
  CHECK(c.points.back().y() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("contains and volume") {
  const SafetySet sq = square_set();
  CHECK(contains(sq, {0.5, 0.5}).inside);
  CHECK_FALSE(contains(sq, {0.5, 0.5}).near_boundary);
  CHECK_FALSE(contains(sq, {1.5, 0.5}).inside);
  CHECK(contains(sq, {0.995, 0.5}).near_boundary);
  CHECK(volume(sq) == 1.0);
  SafetySet tri = sq;
  tri.boundary = {{0, 0}, {2, 0}, {0, 1}};
  CHECK(volume(tri) == 1.0);
  const SafetySet empty;
  CHECK_FALSE(contains(empty, {0, 0}).inside);
  CHECK(volume(empty) == 0.0);
  CHECK(interior(sq, {0.5, 0.5}));
  CHECK_FALSE(interior(sq, {1.0, 0.5}));
}

TEST_CASE("two-machine sets") {
  const auto fs = frame_scenario(test::two_machine());
  const auto sets = assemble_all(fs, fs.bounds(), fs.scenario.solver);
  CHECK_FALSE(sets[0].admissible.empty);
  CHECK_FALSE(sets[0].mrpi.empty);
  CHECK_FALSE(sets[1].admissible.empty);
  CHECK(sets[1].mrpi.empty);
  for (const auto& ms : sets) {
    for (const SafetySet* s : {&ms.admissible, &ms.mrpi}) {
      if (s->empty) {
        CHECK(s->boundary.empty());
        continue;
      }
      CHECK(geom::is_simple(s->boundary));
      CHECK(geom::signed_area(s->boundary) > 0);
      for (const auto& v : s->boundary) {
        CHECK(v.x() >= s->slab.lo - 1e-9);
        CHECK(v.x() <= s->slab.hi + 1e-9);
        CHECK(std::abs(v.y()) <= s->cap + 1e-9);
      }
    }
  }
  // the MRPI of machine 1 holds its own post-fault equilibrium projection
  const Vec2 eq(rebase_angle(fs.post_eq.angles[0], sets[0].mrpi.slab.center()), 0.0);
  CHECK(contains(sets[0].mrpi, eq).inside);
}

TEST_CASE("sets agree with the simulation oracle") {
  const auto s = test::two_machine();
  const auto fs = frame_scenario(s);
  for (int i = 0; i < 2; ++i) {
    const MachineModel m = make_machine(fs.post, fs.bounds(), i);
    for (SetKind kind : {SetKind::admissible, SetKind::mrpi}) {
      const SafetySet set = assemble_set(m, fs.bounds(), kind, s.solver);
      const auto grid = oracle_set(m, fs.bounds(), kind, s.solver, set.cap, 40);
      const Agreement a = compare_with_oracle(set, grid);
      INFO("machine ", i, " ", to_string(kind));
      CHECK(a.compared > 1000);
      CHECK(a.fraction() >= 0.99);
    }
  }
}

TEST_CASE("MRPI inside the admissible set, sampled") {
  std::mt19937_64 rng(5);
  for (const auto& sc : {test::two_machine(), test::ieee14()}) {
    const auto fs = frame_scenario(sc);
    const auto sets = assemble_all(fs, fs.bounds(), sc.solver);
    for (const auto& ms : sets) {
      if (ms.mrpi.empty) continue;
      std::uniform_real_distribution<double> z1(ms.mrpi.slab.lo, ms.mrpi.slab.hi), z2(-ms.mrpi.cap, ms.mrpi.cap);
      int violations = 0;
      for (int k = 0; k < 2000; ++k) {
        const Vec2 z(z1(rng), z2(rng));
        const auto in_m = contains(ms.mrpi, z), in_a = contains(ms.admissible, z);
        if (in_m.inside && !in_a.inside && !in_a.near_boundary && !in_m.near_boundary) ++violations;
      }
      CHECK(violations == 0);
    }
  }
}

TEST_CASE("fixture emptiness pattern") {
  const auto fs = frame_scenario(test::ieee14());
  const auto sets = assemble_all(fs, fs.bounds(), fs.scenario.solver);
  CHECK(sets[0].mrpi.empty);
  CHECK_FALSE(sets[0].admissible.empty);
  for (int i = 1; i < 5; ++i) CHECK_FALSE(sets[i].mrpi.empty);
}

TEST_CASE("point-symmetric machine gives a point-symmetric set") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(0.3, 1.2), K(0.5, 2.0), d(0.3, 3.0);
  for (int t = 0; t < 4; ++t) {
    const double h = w(rng), u = w(rng);
    const MachineModel m = single(0.0, d(rng), -u, u, K(rng));
    const Bounds b = slab_bounds(-h, h, -u, u);
    for (SetKind kind : {SetKind::admissible, SetKind::mrpi}) {
      const SafetySet s = assemble_set(m, b, kind, SolverSettings{});
      if (s.empty) continue;
      std::uniform_real_distribution<double> z1(-h, h), z2(-s.cap, s.cap);
      for (int k = 0; k < 300; ++k) {
        const Vec2 z(z1(rng), z2(rng));
        const auto a = contains(s, z), bm = contains(s, -z);
        if (!a.near_boundary && !bm.near_boundary) CHECK(a.inside == bm.inside);
      }
    }
  }
}

TEST_CASE("shrinking the own slab shrinks both sets") {
  const MachineModel m = single(0.2, 0.8, -0.6, 0.4);
  const Bounds big = slab_bounds(-1.0, 1.2, -0.6, 0.4);
  const Bounds small = slab_bounds(-0.8, 0.9, -0.6, 0.4);
  SolverSettings s;
  s.z2_cap = 20;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> z1(-0.8, 0.9), z2(-20, 20);
  for (SetKind kind : {SetKind::admissible, SetKind::mrpi}) {
    const SafetySet sb = assemble_set(m, big, kind, s), ss = assemble_set(m, small, kind, s);
    CHECK(volume(ss) <= volume(sb) + 1e-9);
    for (int k = 0; k < 2000; ++k) {
      const Vec2 z(z1(rng), z2(rng));
      const auto in_s = contains(ss, z), in_b = contains(sb, z);
      if (in_s.inside && !in_s.near_boundary && !in_b.near_boundary) CHECK(in_b.inside);
    }
  }
}

TEST_CASE("oracle trivia and execution modes") {
  const auto fs = frame_scenario(test::two_machine());
  const MachineModel m = make_machine(fs.post, fs.bounds(), 0);
  const auto serial = oracle_set(m, fs.bounds(), SetKind::mrpi, fs.scenario.solver, 10.0, 24, Exec::serial);
  const auto par = oracle_set(m, fs.bounds(), SetKind::mrpi, fs.scenario.solver, 10.0, 24, Exec::parallel);
  CHECK(serial.inside == par.inside);
  const Slab slab{fs.bounds().lower[0], fs.bounds().upper[0]};
  ClosedLoop help(m, slab, InputMode::helpful);
  int rests = 0;
  for (int k = 0; k <= 50; ++k) {
    const double z = slab.lo + slab.width() * k / 50;
    if (help.upper(z) <= 0 && help.lower(z) >= 0) {
      ++rests;
      CHECK(help.viable({z, 0.0}));
      CHECK(help.forward({z, 0.0}, Phase::upper, 5.0).end == PathEnd::rest);
    }
  }
  CHECK(rests > 0);
  ClosedLoop harm(m, slab, InputMode::harmful);
  CHECK_FALSE(harm.viable({slab.hi + 0.1, 0.0}));
}

#include <doctest.h>

#include <numbers>

#include "support.hpp"

using namespace safecct;

namespace {

const char* kPair = R"({
  "pre":   {"p": [0.5, -0.5], "d": [1, 1], "K": [[0, 1], [1, 0]]},
  "fault": {"p": [0.5, -0.5], "d": [1, 1], "K": [[0, 0.4], [0.4, 0]]},
  "post":  {"p": [0.5, -0.5], "d": [1, 1], "K": [[0, 1], [1, 0]]},
  "t_fault": 0.0
})";

}  // namespace

TEST_CASE("minimal two-machine document") {
  const Scenario s = load_scenario(kPair);
  CHECK(s.size() == 2);
  REQUIRE(s.pre.edges().size() == 1);
  CHECK(s.pre.edges()[0] == Edge{0, 1});
  CHECK_FALSE(s.bounds.has_value());
  CHECK(s.machine_name(1) == "G2");
}

TEST_CASE("asymmetric K names the entry") {
  Mat K(3, 3);
  K << 0, 1, 1, 1, 0, 2, 1, 2.5, 0;
  try {
    StageModel(Vec::Zero(3), Vec::Ones(3), K);
    FAIL("accepted an asymmetric K");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "K not symmetric at (2,3)");
  }
}

TEST_CASE("invariant violations") {
  Mat K = Mat::Zero(2, 2);
  CHECK_THROWS_AS(StageModel(Vec2(1, 1), Vec2(1, 0), K), ValidationError);
  K << 0, -1, -1, 0;
  CHECK_THROWS_AS(StageModel(Vec2(1, 1), Vec2(1, 1), K), ValidationError);
  CHECK_THROWS_AS(StageModel(Vec2(1, 1), Vec::Ones(3), Mat::Zero(2, 2)), ValidationError);
  CHECK_THROWS_AS((Bounds{Vec2(0, 0), Vec2(1, 7)}.validate(2)), ValidationError);
  CHECK_THROWS_AS((Bounds{Vec2(0, 1), Vec2(1, 1)}.validate(2)), ValidationError);
}

TEST_CASE("parse errors carry a location") {
  try {
    load_scenario("{\n  \"pre\": [1,\n}");
    FAIL("parsed garbage");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    load_scenario(R"({"pre": {"p": [1], "d": [1], "K": [[0]]}, "fault": {"p": [1], "d": [1], "K": [[0]]}})");
    FAIL("missing post accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("'post'") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario(R"({"pre": {"p": ["x"], "d": [1], "K": [[0]]}})"), ParseError);
}

TEST_CASE("unequal machine counts are rejected") {
  const char* doc = R"({
    "pre":   {"p": [0.5, -0.5], "d": [1, 1], "K": [[0, 1], [1, 0]]},
    "fault": {"p": [0.5], "d": [1], "K": [[0]]},
    "post":  {"p": [0.5, -0.5], "d": [1, 1], "K": [[0, 1], [1, 0]]},
    "t_fault": 0.0})";
  CHECK_THROWS_AS(load_scenario(doc), ValidationError);
}

TEST_CASE("save/load round trip") {
  for (const auto& s : {test::two_machine(), test::ieee14(), load_scenario(kPair)}) {
    const Scenario back = load_scenario(save_scenario(s));
    CHECK(back == s);
    CHECK(save_scenario(back) == save_scenario(s));
  }
}

TEST_CASE("angle helpers") {
  constexpr double pi = std::numbers::pi;
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  for (double a : {-20.0, -3.3, 0.0, 0.7, 9.1}) {
    const double w = wrap_angle(a);
    CHECK(w > -pi);
    CHECK(w <= pi);
    CHECK(std::remainder(a - w, 2 * pi) == doctest::Approx(0.0).epsilon(1e-12));
    for (double c : {-1.0, 0.0, 2.5}) {
      const double r = rebase_angle(a, c);
      CHECK(r >= c - pi);
      CHECK(r < c + pi);
      CHECK(std::remainder(a - r, 2 * pi) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  const GridState g = GridState::from_lifted(Vec2(7.0, -4.0), Vec2(1.0, 2.0));
  CHECK(g.angles[0] == doctest::Approx(7.0 - 2 * pi));
  CHECK(g.stacked().size() == 4);
}

TEST_CASE("frame shift") {
  const auto s = test::ieee14();
  for (const StageModel* st : {&s.pre, &s.fault, &s.post}) {
    const auto f = rotating_frame_shift(*st);
    CHECK(f.omega_synch == doctest::Approx(st->p().sum() / st->d().sum()));
    CHECK(std::abs(f.stage.p().sum()) < 1e-12);
    CHECK(f.stage.K() == st->K());
    CHECK(rotating_frame_shift(f.stage).omega_synch == doctest::Approx(0.0).epsilon(1e-15));
  }
  // balanced injections need no shift
  CHECK(rotating_frame_shift(test::pair(0.3, 1.0)).omega_synch == 0.0);
}

TEST_CASE("bounds arguments") {
  const Bounds b = parse_bounds_arg("-1:1, -0.5:2");
  CHECK(b.lower[1] == -0.5);
  CHECK(b.upper[1] == 2.0);
  const Bounds j = parse_bounds_arg(R"({"lower": [-1, -2], "upper": [1, 2]})");
  CHECK(j.width(1) == 4.0);
  CHECK_THROWS_AS(parse_bounds_arg("-1:x"), ParseError);
  CHECK_THROWS_AS(parse_bounds_arg("/nonexistent/bounds.json"), ParseError);
}

TEST_CASE("metadata passes through") {
  const auto s = test::ieee14();
  REQUIRE(s.metadata.size() == 5);
  CHECK(s.metadata[0].name == "G1");
  CHECK(s.metadata[0].H.has_value());
  CHECK(s.machine_name(4) == "G5");
}

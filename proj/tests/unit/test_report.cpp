#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "support.hpp"

using namespace safecct;
namespace fs = std::filesystem;

TEST_CASE("two-machine pipeline") {
  PipelineOptions o;
  o.t_clear = 0.5;
  const AnalysisReport r = run_pipeline(test::two_machine(), o);
  CHECK(r.certificate_post.passed);
  REQUIRE(r.framed);
  CHECK(r.framed->post_eq.angles[0] - r.framed->post_eq.angles[1] == doctest::Approx(std::asin(0.5)).epsilon(1e-12));
  CHECK(r.summaries.size() == 4);
  CHECK_FALSE(r.summaries[0].empty);
  CHECK(std::isfinite(r.cct.t_unsafe));
  REQUIRE(r.classification);
  CHECK(r.cct.table.size() == 1);
  const std::string line = summary_line(r);
  CHECK(std::regex_match(line, std::regex(R"(t_safe=\S+, t_unsafe=\S+, critical=G\d(\+G\d)*, classification\(t_C=0\.5\)=\w+)")));
}

TEST_CASE("report documents are reproducible") {
  PipelineOptions o;
  o.t_clear = 0.3;
  const auto a = report_json(run_pipeline(test::two_machine(), o), false).dump(2);
  const auto b = report_json(run_pipeline(test::two_machine(), o), false).dump(2);
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK_FALSE(j.contains("timing"));
  CHECK(j["settings"]["grid_resolution"] == 200);
  CHECK(j["scenario"]["digest"].get<std::string>().size() == 16);
  CHECK(report_json(run_pipeline(test::two_machine(), o))["timing"].contains("total"));
}

TEST_CASE("non-finite numbers serialize as strings") {
  CHECK(number(kInf) == "inf");
  CHECK(number(-kInf) == "-inf");
  CHECK(number(1.5) == 1.5);
}

TEST_CASE("failing post-fault certificate aborts unless forced") {
  Scenario s = test::two_machine();
  Mat K(2, 2);
  K << 0, 0.45, 0.45, 0;
  s.post = StageModel(s.post.p(), s.post.d(), K);  // P/k > 1: no equilibrium either
  PipelineOptions o;
  try {
    run_pipeline(s, o);
    FAIL("no abort");
  } catch (const CertificateError& e) {
    CHECK(std::string(e.what()).rfind("step 2", 0) == 0);
  }
  o.force = true;
  CHECK_THROWS_AS(run_pipeline(s, o), SolverError);
}

TEST_CASE("stage tags keep the error type") {
  CHECK_THROWS_AS(run_stage("step 9", []() -> int { throw TopologyError("x"); }), TopologyError);
  try {
    run_stage("step 9", []() -> int { throw IntegrationError("boom"); });
  } catch (const IntegrationError& e) {
    CHECK(std::string(e.what()) == "step 9: boom");
  }
}

TEST_CASE("geometry export") {
  const fs::path dir = fs::temp_directory_path() / "safecct_export_test";
  fs::remove_all(dir);
  const AnalysisReport r = run_pipeline(test::two_machine(), PipelineOptions{});
  const auto files = export_geometry(r, dir);
  CHECK(files.size() == 7);
  for (const auto& f : files) CHECK(fs::file_size(f) > 0);
  std::ifstream csv(dir / "G1_admissible.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "z1, z2");
  const std::string g1 = render_svg(r, 0), g2 = render_svg(r, 1);
  CHECK(g1.find("class=\"mrpi\"") != std::string::npos);
  CHECK(g1.find("MRPI empty") == std::string::npos);
  CHECK(g2.find("class=\"mrpi\"") == std::string::npos);
  CHECK(g2.find("class=\"admissible\"") != std::string::npos);
  CHECK(g2.find("class=\"slab\"") != std::string::npos);
  CHECK(g2.find("MRPI empty") != std::string::npos);
  CHECK(g1.find("class=\"trajectory\"") != std::string::npos);
  fs::remove_all(dir);
}

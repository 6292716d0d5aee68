#include <doctest.h>

#include <fstream>
#include <stdexcept>

#include "fplab/scenario.hpp"
#include "test_support.hpp"

using namespace fplab;

TEST_CASE("empty text yields the default scenario") {
  const Scenario s = parse_scenario_text("", "inline");
  CHECK(s.model == "LINEAR");
  CHECK(s.dimension == 1);
  CHECK(s.n == 256);
  CHECK(s.half_width == 10.0);
  CHECK(s.horizon == 0.25);
  CHECK(s.solver.time_step == 1e-3);
  CHECK(s.initial == "model");
  CHECK(s.particles == 10000);
  CHECK(s.estimator == "gaussian_kernel");
  CHECK(s.checks == "all");
  CHECK(s.snapshots.empty());
}

TEST_CASE("a full scenario file parses with comments and blank lines") {
  const char* text =
      "# run description\n"
      "model = CUBIC-DRIFT\n"
      "dimension = 1\n"
      "\n"
      "n = 128          # spatial resolution\n"
      "half_width = 8.5\n"
      "T = 0.125\n"
      "seed = 42\n"
      "time_step = 2e-3\n"
      "newton_tol = 1e-11\n"
      "newton_max_iter = 25\n"
      "damping = 0.5\n"
      "epsilon_reg = 1e-3\n"
      "mollifier_width = 0.25\n"
      "dealias = true\n"
      "krylov_max_iter = 150\n"
      "krylov_tol = 1e-9\n"
      "initial = random\n"
      "initial_amplitude = 0.1\n"
      "initial_band = 4\n"
      "particles = 50000\n"
      "particle_dt = 5e-4\n"
      "estimator = histogram\n"
      "bandwidth = 0.2\n"
      "snapshots = 0.0, 0.05, 0.125\n"
      "checks = barrier,gronwall\n"
      "output_stride = 10\n";
  const Scenario s = parse_scenario_text(text, "inline");
  CHECK(s.model == "CUBIC-DRIFT");
  CHECK(s.n == 128);
  CHECK(s.half_width == 8.5);
  CHECK(s.horizon == 0.125);
  CHECK(s.seed == 42);
  CHECK(s.solver.time_step == 2e-3);
  CHECK(s.solver.newton_tol == 1e-11);
  CHECK(s.solver.newton_max_iter == 25);
  CHECK(s.solver.damping == 0.5);
  CHECK(s.solver.epsilon_reg == 1e-3);
  CHECK(s.solver.mollifier_width == 0.25);
  CHECK(s.solver.dealias);
  CHECK(s.solver.krylov_max_iter == 150);
  CHECK(s.solver.krylov_tol == 1e-9);
  CHECK(s.initial == "random");
  CHECK(s.initial_amplitude == 0.1);
  CHECK(s.initial_band == 4);
  CHECK(s.particles == 50000);
  CHECK(s.particle_dt == 5e-4);
  CHECK(s.estimator == "histogram");
  CHECK(s.bandwidth == 0.2);
  REQUIRE(s.snapshots.size() == 3);
  CHECK(s.snapshots[1] == 0.05);
  CHECK(s.checks == "barrier,gronwall");
  CHECK(s.output_stride == 10);
}

TEST_CASE("parse errors carry the file line") {
  auto expect_line = [](const char* text, int line) {
    try {
      parse_scenario_text(text, "origin");
      FAIL("expected ScenarioError for: ", text);
    } catch (const ScenarioError& e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find("origin:" + std::to_string(line)) == 0);
    }
  };
  expect_line("model = LINEAR\nwhat is this\n", 2);
  expect_line("bogus_key = 3\n", 1);
  expect_line("n = twelve\n", 1);
  expect_line("\n\n= 5\n", 3);
  expect_line("dealias = maybe\n", 1);
  expect_line("initial = wild\n", 1);
  expect_line("estimator = parzen\n", 1);
  expect_line("particles = 0\n", 1);
  expect_line("output_stride = 0\n", 1);
  expect_line("particles = 1e4\n", 1);  // integers are parsed strictly
}

TEST_CASE("the last duplicate assignment wins") {
  const Scenario s = parse_scenario_text("n = 64\nn = 512\nT=0.1\nT = 0.2\n", "inline");
  CHECK(s.n == 512);
  CHECK(s.horizon == 0.2);
}

TEST_CASE("assignments reject unknown keys without a location") {
  Scenario s;
  CHECK_THROWS_AS(apply_assignment(s, "volume", "3"), std::invalid_argument);
  CHECK_NOTHROW(apply_assignment(s, "T", "0.75"));
  CHECK(s.horizon == 0.75);
  // Whitespace in numeric values is rejected, not silently truncated.
  CHECK_THROWS_AS(apply_assignment(s, "T", "0.75 extra"), std::invalid_argument);
}

TEST_CASE("scenario files load from disk and report missing paths") {
  testsup::ScratchDir dir("scenario");
  const std::string path = dir.sub("run.scn");
  {
    std::ofstream os(path);
    os << "model = CUBIC\nT = 0.0625\n";
  }
  const Scenario s = parse_scenario_file(path);
  CHECK(s.model == "CUBIC");
  CHECK(s.horizon == 0.0625);

  try {
    parse_scenario_file(dir.sub("absent.scn"));
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.line == 0);
  }
}

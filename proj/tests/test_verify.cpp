#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fplab/verify.hpp"
#include "test_support.hpp"

using namespace fplab;

TEST_CASE("closure constant maximization matches the closed form") {
  // max over a of 2(K a^{3/2} - g a^2) is attained at a = (3K/(4g))^2 and
  // equals 27 K^4 / (128 g^3).
  for (double K : {1.0, 2.7, 13.0}) {
    for (double g : {0.5, 1.0, 4.0}) {
      const double closed = 27.0 * std::pow(K, 4.0) / (128.0 * std::pow(g, 3.0));
      CHECK(young_closure_constant(K, g) == doctest::Approx(closed).epsilon(1e-6));
    }
  }
}

TEST_CASE("gronwall audit passes with slack on the cubic model") {
  const ModelProblem m = make_model("CUBIC", 1);
  const PeriodicGrid g(1, 10.0, 128);
  const ScalarField a = testsup::gaussian_field(g, 1.0);
  const ScalarField b = a + synthesize_random_field(g, 17, 5, 0.05);

  const GronwallResult res = gronwall_check(a, b, 0.05, m, SolverConfig{});
  CHECK(res.pass);
  CHECK(res.theoretical_constant ==
        doctest::Approx(res.brute_force_constant).epsilon(1e-6));
  CHECK(res.measured_slope <= res.theoretical_constant);
  REQUIRE(res.times.size() == res.squared_distance.size());
  CHECK(res.squared_distance.front() > 0.0);
  // Diffusion contracts the dual distance for these states.
  CHECK(res.squared_distance.back() < res.squared_distance.front());
}

TEST_CASE("gronwall audit of identical states reports a flat distance") {
  const ModelProblem m = make_model("CUBIC", 1);
  const PeriodicGrid g(1, 10.0, 64);
  const ScalarField a = testsup::gaussian_field(g, 1.0);
  const GronwallResult res = gronwall_check(a, a, 0.02, m, SolverConfig{});
  CHECK(res.pass);
  for (double d : res.squared_distance) CHECK(d < 1e-20);
}

TEST_CASE("l1 gaps never exceed the initial separation") {
  for (const char* name : {"LINEAR", "CUBIC-DRIFT"}) {
    const ModelProblem m = make_model(name, 1);
    const PeriodicGrid g(1, 10.0, 128);
    const ScalarField a = sample_field(g, m.initial_condition);
    const ScalarField b = a + synthesize_random_field(g, 29, 6, 0.05);
    const CheckResult res = l1_contraction_check(a, b, 0.05, m, SolverConfig{}, 1e-8);
    INFO(name, ": ", res.details);
    CHECK(res.pass);
    CHECK(res.name == "l1-nonexpansive");
    CHECK(res.measured <= res.bound + res.tolerance);
  }
}

TEST_CASE("barrier envelope dominates the sup norm along trajectories") {
  for (const char* name : {"LINEAR", "CUBIC-DRIFT"}) {
    const ModelProblem m = make_model(name, 1);
    const PeriodicGrid g(1, 10.0, 128);
    const ScalarField u0 = sample_field(g, m.initial_condition);
    const Trajectory traj = solve_mild(u0, 0.1, m, SolverConfig{});
    const CheckResult res = barrier_check(traj, m);
    INFO(name, ": ", res.details);
    CHECK(res.pass);
    CHECK(res.name == "sup-barrier");
    CHECK(res.measured <= res.bound + res.tolerance);
  }
}

TEST_CASE("weak residual decays about linearly in the step size") {
  const ModelProblem m = make_model("LINEAR", 1);
  const PeriodicGrid g(1, 10.0, 128);
  const ScalarField u0 = testsup::gaussian_field(g, 1.0);

  SolverConfig coarse;
  coarse.time_step = 2e-3;
  SolverConfig fine;
  fine.time_step = 1e-3;
  const double r_coarse = weak_residual(solve_mild(u0, 0.1, m, coarse), m, 5, 77);
  const double r_fine = weak_residual(solve_mild(u0, 0.1, m, fine), m, 5, 77);

  CHECK(r_coarse > 0.0);
  CHECK(r_fine > 0.0);
  // The trapezoid pairing with end-vanishing test functions cancels the
  // first-order defect on the linear model, so the order lands near two.
  const double order = std::log2(r_coarse / r_fine);
  CHECK(order > 0.9);
  CHECK(order < 2.6);
}

TEST_CASE("weak residual is reproducible and grows with the probe count") {
  const ModelProblem m = make_model("CUBIC", 1);
  const PeriodicGrid g(1, 10.0, 64);
  const ScalarField u0 = sample_field(g, m.initial_condition);
  const Trajectory traj = solve_mild(u0, 0.05, m, SolverConfig{});
  CHECK(weak_residual(traj, m, 4, 5) == weak_residual(traj, m, 4, 5));
  // The maximum over a superset of test functions cannot shrink.
  CHECK(weak_residual(traj, m, 8, 5) >= weak_residual(traj, m, 4, 5));
}

TEST_CASE("narrow continuity modulus shrinks with the step size") {
  const ModelProblem m = make_model("LINEAR", 1);
  const PeriodicGrid g(1, 10.0, 128);
  const ScalarField u0 = testsup::gaussian_field(g, 1.0);

  std::vector<ScalarField> probes;
  probes.push_back(ScalarField(g, 1.0));  // the mass probe sees no jump at all
  probes.push_back(synthesize_random_field(g, 41, 4, 1.0));

  SolverConfig coarse;
  coarse.time_step = 4e-3;
  SolverConfig fine;
  fine.time_step = 1e-3;
  const double mc = narrow_continuity_modulus(solve_mild(u0, 0.1, m, coarse), probes);
  const double mf = narrow_continuity_modulus(solve_mild(u0, 0.1, m, fine), probes);
  CHECK(mf < 0.75 * mc);

  // Constant probe alone: jumps vanish to solver accuracy by conservation.
  const double mass_only = narrow_continuity_modulus(
      solve_mild(u0, 0.1, m, fine), {ScalarField(g, 1.0)});
  CHECK(mass_only < 1e-10);
}

TEST_CASE("refinement ladder shrinks both nonlinear and linearized gaps") {
  const ModelProblem m = make_model("CUBIC", 1);
  SolverConfig cfg;
  const std::vector<ResolutionLevel> levels{{4e-3, 64}, {2e-3, 128}, {1e-3, 256}};
  const UniquenessResult res = uniqueness_probe(m, 10.0, 0.1, cfg, levels);
  INFO(res.summary.details);
  CHECK(res.summary.pass);
  CHECK(res.summary.name == "refinement-stability");
  REQUIRE(res.nonlinear_gaps.size() == 2);
  REQUIRE(res.linearized_gaps.size() == 2);
  CHECK(res.nonlinear_gaps[1] < res.nonlinear_gaps[0]);

  CHECK_THROWS_AS(uniqueness_probe(m, 10.0, 0.1, cfg, {{1e-3, 64}}), std::invalid_argument);
}

TEST_CASE("particle consistency improves with the particle count") {
  const ModelProblem m = make_model("LINEAR", 1);
  const std::vector<std::size_t> counts{2000, 20000};
  const ConsistencyResult res =
      pde_particle_consistency(m, 10.0, 128, 0.05, 1e-3, counts, 2, 100, DensityEstimator{}, 0.1);
  INFO(res.summary.details);
  CHECK(res.summary.pass);
  CHECK(res.summary.name == "particle-grid-consistency");
  REQUIRE(res.mean_gaps.size() == 2);
  CHECK(res.mean_gaps[1] <= res.mean_gaps[0]);
  CHECK(res.mean_gaps[1] < 0.1);
}

TEST_CASE("reports format as aligned text and quoted csv") {
  VerificationReport rep;
  rep.checks.push_back({"alpha", true, 1.0, 2.0, 0.1, "fine"});
  rep.checks.push_back({"beta, with comma", false, 3.0, 2.0, 0.0, "quote \" inside"});

  CHECK(!rep.all_pass());
  const std::string text = rep.to_text();
  CHECK(text.find("[PASS] alpha") != std::string::npos);
  CHECK(text.find("[FAIL] beta") != std::string::npos);

  const std::string csv = rep.to_csv();
  CHECK(csv.find("name,pass,measured,bound,tolerance,details") != std::string::npos);
  CHECK(csv.find("\"beta, with comma\"") != std::string::npos);
  CHECK(csv.find("\"quote \"\" inside\"") != std::string::npos);

  VerificationReport good;
  good.checks.push_back({"alpha", true, 1.0, 2.0, 0.1, ""});
  CHECK(good.all_pass());
}

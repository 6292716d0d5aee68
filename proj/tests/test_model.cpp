#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fplab/model.hpp"
#include "test_support.hpp"

using namespace fplab;

namespace {

// Golden-section maximizer, independent of the scan used by the library.
double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) > f(d))
      b = d;
    else
      a = c;
    c = b - inv_phi * (b - a);
    d = a + inv_phi * (b - a);
  }
  return f(0.5 * (a + b));
}

}  // namespace

TEST_CASE("registry exposes the four models and rejects unknown names") {
  const auto names = model_registry();
  REQUIRE(names.size() == 4);
  CHECK(std::count(names.begin(), names.end(), "LINEAR") == 1);
  CHECK(std::count(names.begin(), names.end(), "CUBIC") == 1);
  CHECK(std::count(names.begin(), names.end(), "LINEAR-DRIFT") == 1);
  CHECK(std::count(names.begin(), names.end(), "CUBIC-DRIFT") == 1);

  for (const auto& name : names)
    for (int dim : {1, 2}) CHECK(make_model(name, dim).dimension == dim);

  CHECK_THROWS_AS(make_model("QUARTIC", 1), std::invalid_argument);
  CHECK_THROWS_AS(make_model("LINEAR", 3), std::invalid_argument);
  CHECK_THROWS_AS(make_model("LINEAR", 0), std::invalid_argument);
}

TEST_CASE("cubic nonlinearity and its derivative have the closed forms") {
  const ModelProblem m = make_model("CUBIC", 1);
  CHECK(m.nonlinearity.beta(0.0) == 0.0);
  CHECK(m.nonlinearity.beta(2.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(m.nonlinearity.beta(-1.5) == doctest::Approx(-1.5 - 3.375).epsilon(1e-15));
  CHECK(m.nonlinearity.beta_prime(2.0) == doctest::Approx(13.0).epsilon(1e-15));
  CHECK(m.nonlinearity.gamma0 == doctest::Approx(1.0));

  const ModelProblem lin = make_model("LINEAR", 1);
  CHECK(lin.nonlinearity.beta(0.7) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(lin.nonlinearity.beta_prime(-3.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("lipschitz constants match closed forms on symmetric windows") {
  const ModelProblem cubic = make_model("CUBIC", 1);
  // max of 1+3r^2 over [-M,M] is attained at the endpoints.
  CHECK(lipschitz_constants(cubic, 2.0).beta_lipschitz == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(lipschitz_constants(cubic, 0.5).beta_lipschitz == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(lipschitz_constants(cubic, 2.0).drift_lipschitz == 0.0);

  const ModelProblem drifted = make_model("CUBIC-DRIFT", 1);
  // d/dr tanh(r) peaks at r = 0 with value 1; the spatial factor peaks at 1.
  CHECK(lipschitz_constants(drifted, 2.0).drift_lipschitz == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("diffusivity ratio is continued through zero") {
  const ModelProblem cubic = make_model("CUBIC", 1);
  CHECK(phi(cubic, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(phi(cubic, -2.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(phi(cubic, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi(cubic, 1e-300) == doctest::Approx(1.0).epsilon(1e-12));

  const ModelProblem lin = make_model("LINEAR", 1);
  for (double r : {-3.0, 0.0, 0.25, 10.0})
    CHECK(phi(lin, r) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bump profile is a normalized compactly supported mollifier shape") {
  CHECK(bump_profile(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bump_profile(1.0) == 0.0);
  CHECK(bump_profile(-1.2) == 0.0);
  CHECK(bump_profile(3.0) == 0.0);
  CHECK(bump_profile(0.5) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)).epsilon(1e-14));
  CHECK(bump_profile(0.999) > 0.0);
  CHECK(bump_profile(0.999) < 1e-100);

  // Cached slope peak against an independent golden-section maximizer.
  const double oracle = golden_max(
      [](double s) {
        const double w = 1.0 - s * s;
        return (w <= 0.0) ? 0.0 : 2.0 * s / (w * w) * std::exp(1.0 - 1.0 / w);
      },
      0.0, 0.999999);
  CHECK(bump_gradient_peak() == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("drift modulus matches the closed form and the sampled jacobian") {
  const ModelProblem m = make_model("CUBIC-DRIFT", 1);
  CHECK(delta_of(m, 0.0) == 0.0);
  const double expected = std::tanh(1.0) * bump_gradient_peak() / 2.0;
  CHECK(delta_of(m, 1.0) == doctest::Approx(expected).epsilon(1e-9));

  // Independent recovery: scan |b_x(x, r)| over the support.
  const double sampled = golden_max(
      [&](double x) { return operator_norm(m.drift.x_jacobian({x, 0.0}, 1.0), 1); }, 0.0,
      m.drift.support_radius);
  CHECK(delta_of(m, 1.0) == doctest::Approx(sampled).epsilon(1e-7));

  const ModelProblem lin = make_model("LINEAR", 1);
  CHECK(delta_of(lin, 0.7) == 0.0);
}

TEST_CASE("drift field evaluates velocity and flux consistently") {
  const ModelProblem m = make_model("CUBIC-DRIFT", 1);
  const Vec2 origin{0.0, 0.0};
  const double r = 0.5;
  const Vec2 v = drift_velocity(m, origin, r);
  CHECK(v[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
  const Vec2 f = drift_flux(m, origin, r);
  CHECK(f[0] == doctest::Approx(std::tanh(0.5) * 0.5).epsilon(1e-12));

  // Outside the compact support the drift vanishes.
  const Vec2 far{m.drift.support_radius + 0.5, 0.0};
  CHECK(drift_velocity(m, far, 1.0)[0] == 0.0);

  // Separable decomposition agrees with the direct value.
  REQUIRE(m.drift.separable);
  const Vec2 x{0.8, 0.0};
  const double direct = drift_velocity(m, x, r)[0];
  const double split = m.drift.profile(r) * m.drift.spatial(x)[0];
  CHECK(direct == doctest::Approx(split).epsilon(1e-14));
}

TEST_CASE("operator norm of 2x2 matrices matches known singular values") {
  CHECK(operator_norm({{{3.0, 0.0}, {0.0, -4.0}}}, 2) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(operator_norm({{{0.0, 1.0}, {0.0, 0.0}}}, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(operator_norm({{{3.0, 4.0}, {0.0, 0.0}}}, 2) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(operator_norm({{{2.0, 0.0}, {0.0, 0.0}}}, 1) == doctest::Approx(2.0).epsilon(1e-15));
  // Rotation has norm one.
  const double c = std::cos(0.3), s = std::sin(0.3);
  CHECK(operator_norm({{{c, -s}, {s, c}}}, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("initial conditions are unit-mass gaussians with recorded sup") {
  for (const auto& name : model_registry()) {
    for (int dim : {1, 2}) {
      const ModelProblem m = make_model(name, dim);
      const PeriodicGrid g(dim, 10.0, dim == 1 ? 256 : 128);
      const ScalarField u0 = sample_field(g, m.initial_condition);
      CHECK(mass(u0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(norm_linf(u0) == doctest::Approx(m.initial_sup).epsilon(1e-12));
      CHECK(*std::min_element(u0.values.begin(), u0.values.end()) >= 0.0);
    }
  }
}

TEST_CASE("structural assumptions validate on every registry model") {
  for (const auto& name : model_registry()) {
    for (int dim : {1, 2}) {
      const ModelProblem m = make_model(name, dim);
      const ValidationReport rep = validate_assumptions(m, 2.0, 200);
      for (const auto& c : rep.checks) {
        INFO(name, " dim ", dim, " check ", c.name);
        CHECK(c.pass);
      }
      CHECK(rep.all_pass());
    }
  }
}

TEST_CASE("validation flags a non-monotone nonlinearity") {
  ModelProblem bad = make_model("LINEAR", 1);
  bad.nonlinearity.beta = [](double r) { return r - r * r * r; };
  bad.nonlinearity.beta_prime = [](double r) { return 1.0 - 3.0 * r * r; };
  const ValidationReport rep = validate_assumptions(bad, 2.0, 200);
  CHECK(!rep.all_pass());
  bool floor_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "beta-prime-floor" && !c.pass) floor_failed = true;
  CHECK(floor_failed);
}

TEST_CASE("validation flags a derivative inconsistent with the function") {
  ModelProblem bad = make_model("CUBIC", 1);
  bad.nonlinearity.beta_prime = [](double) { return 1.0; };  // ignores the cubic term
  const ValidationReport rep = validate_assumptions(bad, 2.0, 200);
  bool quotient_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "beta-prime-matches-difference-quotient" && !c.pass) quotient_failed = true;
  CHECK(quotient_failed);
}

TEST_CASE("validation flags a drift that survives at the zero state") {
  ModelProblem bad = make_model("LINEAR-DRIFT", 1);
  auto base = bad.drift.value;
  bad.drift.value = [base](const Vec2& x, double) { return base(x, 1.0); };
  bad.drift.separable = false;  // the override breaks the factorization
  const ValidationReport rep = validate_assumptions(bad, 2.0, 200);
  bool zero_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "drift-vanishes-at-zero-state" && !c.pass) zero_failed = true;
  CHECK(zero_failed);
}

TEST_CASE("validation rejects bad windows and sample counts") {
  const ModelProblem m = make_model("LINEAR", 1);
  CHECK_THROWS_AS(validate_assumptions(m, 0.0, 200), std::invalid_argument);
  CHECK_THROWS_AS(validate_assumptions(m, -1.0, 200), std::invalid_argument);
  CHECK_THROWS_AS(validate_assumptions(m, 1.0, 1), std::invalid_argument);
}

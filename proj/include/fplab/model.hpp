#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fplab/grid.hpp"

namespace fplab {

using Mat2 = std::array<std::array<double, 2>, 2>;

// Largest singular value; dim 1 uses the (0,0) entry only.
double operator_norm(const Mat2& J, int dim);

// Monotone diffusion nonlinearity: beta(0) = 0 and beta' >= gamma0 > 0.
struct Nonlinearity {
  std::function<double(double)> beta;
  std::function<double(double)> beta_prime;
  double gamma0 = 0.0;
};

/**
 * Drift b(x,r): bounded, vanishing at r = 0, with bounded x-Jacobian and
 * r-derivative.  local_dispersion is delta(r) = sup_x |b_x(x,r)|; when the
 * closed form is absent it is recovered by sampling the Jacobian.
 *
 * Registry drifts are separable, b(x,r) = profile(r) * spatial(x), which
 * makes spatial mollification exact: only the spatial factor is smoothed.
 */
struct DriftField {
  bool is_zero = true;
  double sup_norm = 0.0;
  double support_radius = 0.0;  // |b| = 0 outside this radius; 0 means unknown
  std::function<Vec2(const Vec2&, double)> value;
  std::function<Vec2(const Vec2&, double)> r_derivative;
  std::function<Mat2(const Vec2&, double)> x_jacobian;
  std::function<double(double)> local_dispersion;
  bool separable = false;
  std::function<double(double)> profile;
  std::function<double(double)> profile_prime;
  std::function<Vec2(const Vec2&)> spatial;
};

struct ModelProblem {
  std::string name;
  int dimension = 1;
  Nonlinearity nonlinearity;
  DriftField drift;
  std::function<double(const Vec2&)> initial_condition;
  double initial_sup = 0.0;  // sup of the initial condition
};

// beta(r)/r continued across the removable singularity at r = 0.
double phi(const ModelProblem& m, double r);

// delta(r) = sup_x |b_x(x,r)|; zero for drift-free models.
double delta_of(const ModelProblem& m, double r);

Vec2 drift_velocity(const ModelProblem& m, const Vec2& x, double r);  // b(x,r)
Vec2 drift_flux(const ModelProblem& m, const Vec2& x, double r);      // b(x,r) r

struct LipschitzConstants {
  double beta_lipschitz;  // sup of beta' over [-M, M]
  double drift_lipschitz; // sup of |b_r| over the box and [-M, M]
};
LipschitzConstants lipschitz_constants(const ModelProblem& m, double M);

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  double worst_r = 0.0;
  Vec2 worst_x{0.0, 0.0};
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool all_pass() const;
};

// Samples the structural assumptions (monotonicity, bounds, derivative
// consistency, drift regularity, admissible initial data) on [-M, M].
ValidationReport validate_assumptions(const ModelProblem& m, double M, int n_samples);

std::vector<std::string> model_registry();

// Builds a registry model; throws std::invalid_argument for unknown names
// or unsupported dimensions.
ModelProblem make_model(const std::string& name, int dimension);

// C-infinity bump in the unit ball of the scaled radius: exp(1 - 1/(1-s^2))
// for s in [0,1), zero beyond.  Peak slope magnitude is cached after the
// first call.
double bump_profile(double s);
double bump_gradient_peak();

}  // namespace fplab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fplab/grid.hpp"
#include "fplab/model.hpp"
#include "fplab/particles.hpp"
#include "fplab/pde.hpp"

namespace fplab {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  std::string details;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  std::string to_text() const;
  std::string to_csv() const;
};

// Largest integrated weak-form defect of the trajectory against n_test
// seeded space-time test functions tau(t) X(x), where tau vanishes to
// second order at both ends and X is a band-limited trig polynomial.
double weak_residual(const Trajectory& traj, const ModelProblem& model, int n_test,
                     std::uint64_t seed);

// Largest jump |<u(t+) - u(t), psi>| over adjacent snapshots and probes.
double narrow_continuity_modulus(const Trajectory& traj,
                                 const std::vector<ScalarField>& probes);

/**
 * Two-solution growth audit: runs both initial states, tracks
 * D(t) = |u1 - u2|_{-2}^2 and compares the steepest log-slope against
 * 27 K^4 / (128 gamma0^3) with
 * K = beta_M + 2 (sup|b| + b_M max_t |u1(t)|_inf).
 * The closed-form constant is cross-checked by direct maximization.
 */
struct GronwallResult {
  double measured_slope = 0.0;
  double theoretical_constant = 0.0;
  double brute_force_constant = 0.0;
  bool pass = false;
  std::vector<double> times;
  std::vector<double> squared_distance;
};
GronwallResult gronwall_check(const ScalarField& u0a, const ScalarField& u0b, double T,
                              const ModelProblem& model, const SolverConfig& cfg);

// max over a >= 0 of 2 (K a^{3/2} - gamma0 a^2), found by scanning plus
// ternary refinement; equals the closed-form Gronwall constant.
double young_closure_constant(double K, double gamma0);

// L1 gaps along two runs never exceed the initial gap beyond `slack`.
CheckResult l1_contraction_check(const ScalarField& u0a, const ScalarField& u0b, double T,
                                 const ModelProblem& model, const SolverConfig& cfg,
                                 double slack);

// Every snapshot obeys max|u(t)| <= eta(t) + 1e-6 + 10 h, with eta from the
// dispersion ODE started at max|u(0)|.
CheckResult barrier_check(const Trajectory& traj, const ModelProblem& model);

struct ResolutionLevel {
  double time_step = 0.0;
  int n = 0;
};

// Same problem solved at increasing resolution: final states, refined onto
// the finest grid, must approach each other, and the frozen-coefficient
// rerun must do the same.
struct UniquenessResult {
  CheckResult summary;
  std::vector<double> nonlinear_gaps;
  std::vector<double> linearized_gaps;
};
UniquenessResult uniqueness_probe(const ModelProblem& model, double half_width, double T,
                                  const SolverConfig& cfg,
                                  const std::vector<ResolutionLevel>& levels);

// Seed-averaged L1 gap between the particle density and the grid solution
// at time T, per particle count; must not increase with the count and must
// end below final_cap.
struct ConsistencyResult {
  CheckResult summary;
  std::vector<std::size_t> particle_counts;
  std::vector<double> mean_gaps;
};
ConsistencyResult pde_particle_consistency(const ModelProblem& model, double half_width, int n,
                                           double T, double dt,
                                           const std::vector<std::size_t>& particle_counts,
                                           int seeds_per_count, std::uint64_t seed0,
                                           const DensityEstimator& est, double final_cap);

}  // namespace fplab

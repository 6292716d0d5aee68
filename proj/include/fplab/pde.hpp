#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fplab/grid.hpp"
#include "fplab/model.hpp"

namespace fplab {

struct SolverConfig {
  double time_step = 1e-3;
  double newton_tol = 1e-12;     // stage residual target, discrete L2
  int newton_max_iter = 30;
  double damping = 1.0;          // initial Newton step fraction in (0, 1]
  double epsilon_reg = 0.0;      // weight of the zero-order regularization
  double mollifier_width = 0.0;  // Gaussian width for drift smoothing
  bool dealias = false;          // 2/3-rule truncation of nonlinear products
  int krylov_max_iter = 200;
  double krylov_tol = 1e-10;     // inner relative residual target
};

// Throws std::invalid_argument on out-of-range settings.
void validate(const SolverConfig& cfg);

struct Trajectory {
  PeriodicGrid grid;
  std::string model_name;
  SolverConfig config;
  std::vector<double> times;
  std::vector<ScalarField> fields;

  const ScalarField& initial() const { return fields.front(); }
  const ScalarField& final() const { return fields.back(); }
};

// The stage iteration ran out of Newton and fallback iterations.
struct NonConvergence : std::runtime_error {
  NonConvergence(const std::string& what, std::size_t step, double residual_)
      : std::runtime_error(what), step_index(step), residual(residual_) {}
  std::size_t step_index;
  double residual;
};

// The inner linear solver stalled (for frozen coefficients this usually
// means the diffusion weight lost positivity).
struct LinearSolveFailure : std::runtime_error {
  LinearSolveFailure(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual;
};

/**
 * One implicit stage: solves
 *   u - h lap(beta(u)) + h epsilon_reg beta(u) + h div(b(.,u) u) = g
 * on the grid of g.  With epsilon_reg = 0 the mean of u is pinned to the
 * mean of g; the divergence and Laplacian have exactly zero mean spectrally,
 * so this removes only solver-tolerance drift.
 */
ScalarField implicit_step(const ScalarField& g, double h, const ModelProblem& model,
                          const SolverConfig& cfg);

// Backward-Euler chain of implicit stages from 0 to T; the last step is
// shortened so the final time is exactly T.  epsilon_reg and mollifier_width
// are forced to zero.
Trajectory solve_mild(const ScalarField& u0, double T, const ModelProblem& model,
                      const SolverConfig& cfg);

// Same chain with the zero-order term active and with the spatial drift
// factor Gaussian-smoothed by mollifier_width.  With epsilon_reg = 0 and
// mollifier_width = 0 this reproduces solve_mild bit for bit.
Trajectory solve_regularized(const ScalarField& u0, double T, const ModelProblem& model,
                             const SolverConfig& cfg);

/**
 * Time-tagged coefficients for the linear equation
 *   v_t - lap(psi v) + div(B v) = 0,  psi > 0.
 * Each stage uses the entry whose tag is nearest to the stage's end time, so
 * a single entry acts as constant coefficients.
 */
struct FrozenCoefficients {
  std::vector<double> times;
  std::vector<ScalarField> psi;
  std::vector<VectorField> drift;  // empty means no advection

  // psi = beta'(u(t)) and B = b(., u(t)) along a solved trajectory.
  static FrozenCoefficients from_trajectory(const Trajectory& traj, const ModelProblem& model);
};

Trajectory solve_linearized(const ScalarField& v0, const FrozenCoefficients& coeffs, double T,
                            const SolverConfig& cfg);

// Sup-norm barrier: eta' = delta(eta) eta, eta(0) = initial_sup, integrated
// with classical RK4 on n_steps uniform steps.
struct EtaTable {
  std::vector<double> times;
  std::vector<double> values;
  double at(double t) const;  // linear interpolation, clamped outside
};
EtaTable barrier_eta(double initial_sup, double T, const ModelProblem& model, int n_steps);

// L1 gaps between runs at consecutive step sizes (each half the previous)
// and the least-squares order fitted in log h.  A stationary chain (all gaps
// at rounding level) reports +infinity.
struct ConvergenceEstimate {
  std::vector<double> step_sizes;
  std::vector<double> distances;
  double fitted_order = 0.0;
};
ConvergenceEstimate self_convergence(const ScalarField& u0, double T, const ModelProblem& model,
                                     const SolverConfig& cfg,
                                     const std::vector<double>& step_sizes);

}  // namespace fplab

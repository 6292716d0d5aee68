#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fplab/grid.hpp"
#include "fplab/model.hpp"

namespace fplab {

enum class EstimatorKind { histogram, gaussian_kernel };

struct DensityEstimator {
  EstimatorKind kind = EstimatorKind::gaussian_kernel;
  double bandwidth = 0.0;  // <= 0 selects Silverman's rule per axis
};

/**
 * Interacting-particle state.  Draws are pure functions of
 * (seed, step_index, particle, axis), so trajectories are bitwise
 * reproducible for a fixed seed no matter how the work is scheduled.
 */
struct ParticleEnsemble {
  PeriodicGrid grid;
  std::uint64_t seed = 0;
  std::uint64_t step_index = 0;
  double time = 0.0;
  double weight = 1.0;             // total mass the ensemble represents
  std::vector<double> positions;   // interleaved per particle: x0 [, x1]

  std::size_t count() const { return positions.empty() ? 0 : positions.size() / grid.dim; }
};

// The density estimate turned negative beyond tolerance under a particle.
struct DegenerateDensity : std::runtime_error {
  DegenerateDensity(const std::string& what, double value_) : std::runtime_error(what), value(value_) {}
  double value;
};

// Inverse-CDF draw treating the nonnegative field as constant on each cell;
// in two dimensions the first axis is sampled from the marginal and the
// second from the conditional row.
ParticleEnsemble sample_initial(const ScalarField& u0, std::size_t n_particles,
                                std::uint64_t seed);

// Normalized so the result integrates to the ensemble weight.
ScalarField estimate_density(const ParticleEnsemble& ens, const DensityEstimator& est);

// One Euler-Maruyama step of dX = b(X, u(X)) dt + sqrt(2 phi(u(X))) dW with
// periodic wrap, u being the supplied density estimate.  The density is
// clamped at 1e-12 before entering phi.
ParticleEnsemble advance(const ParticleEnsemble& ens, double dt, const ModelProblem& model,
                         const ScalarField& density);

struct DensitySnapshot {
  double time = 0.0;
  ScalarField density;
};

// Runs the self-interacting chain (estimate, then advance) from 0 to T and
// records density estimates at the requested times, rounded to step
// boundaries.  Honors FPLAB_THREADS for the particle loops.
std::vector<DensitySnapshot> simulate(const ScalarField& u0, double T, double dt,
                                      std::size_t n_particles, std::uint64_t seed,
                                      const ModelProblem& model, const DensityEstimator& est,
                                      const std::vector<double>& snapshot_times);

// L1 gaps between matching snapshots; times and grids must agree.
std::vector<double> law_distance(const std::vector<DensitySnapshot>& a,
                                 const std::vector<DensitySnapshot>& b);

}  // namespace fplab

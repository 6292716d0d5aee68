#include "fplab/particles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "fplab/rng.hpp"
#include "fplab/spectral.hpp"

namespace fplab {
namespace {

// Draw-domain tags keep initial sampling and time stepping on disjoint
// counter streams.
constexpr std::uint64_t kInitTag = 0xA11;

int thread_count() {
  static const int n = [] {
    const char* env = std::getenv("FPLAB_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v < 1 ? 1 : (v > 64 ? 64 : v);
  }();
  return n;
}

template <class F>
void parallel_for(std::size_t n, F&& fn) {
  int workers = thread_count();
  if (workers <= 1 || n < 4096) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = (std::size_t)w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double wrap_coord(double x, double L) {
  double span = 2.0 * L;
  double w = std::fmod(x + L, span);
  if (w < 0.0) w += span;
  return w - L;
}

// Draws a cell index and an intra-cell fraction from cumulative weights.
std::pair<int, double> draw_cell(const std::vector<double>& cum, double target) {
  auto it = std::upper_bound(cum.begin(), cum.end(), target);
  int j = (int)std::min((std::size_t)(it - cum.begin()), cum.size() - 1);
  double lo = j == 0 ? 0.0 : cum[j - 1];
  double w = cum[j] - lo;
  double frac = w > 0.0 ? (target - lo) / w : 0.0;
  return {j, std::clamp(frac, 0.0, 1.0)};
}

}  // namespace

ParticleEnsemble sample_initial(const ScalarField& u0, std::size_t n_particles,
                                std::uint64_t seed) {
  if (n_particles == 0) throw std::invalid_argument("need at least one particle");
  const PeriodicGrid& g = u0.grid;
  double floor_tol = -1e-12 * (1.0 + norm_linf(u0));
  std::vector<double> w(u0.values.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u0.values[i] < floor_tol)
      throw std::invalid_argument("initial density is negative beyond tolerance");
    w[i] = std::max(u0.values[i], 0.0);
  }

  ParticleEnsemble ens;
  ens.grid = g;
  ens.seed = seed;
  ens.positions.resize(n_particles * g.dim);

  if (g.dim == 1) {
    std::vector<double> cum(g.n);
    double acc = 0.0;
    for (int j = 0; j < g.n; ++j) {
      acc += w[j];
      cum[j] = acc;
    }
    if (!(acc > 0.0)) throw std::invalid_argument("initial density carries no mass");
    ens.weight = acc * g.cell_volume();
    // Node values represent the density on cells centered at the nodes, so
    // the intra-cell placement runs from -dx/2 to +dx/2 around the node.
    parallel_for(n_particles, [&](std::size_t p) {
      double u = rng::uniform(seed, p, 0, kInitTag) * acc;
      auto [j, frac] = draw_cell(cum, u);
      ens.positions[p] = wrap_coord(g.coord(j) + (frac - 0.5) * g.dx(), g.half_width);
    });
  } else {
    std::vector<double> row(g.n, 0.0);
    std::vector<std::vector<double>> cond(g.n, std::vector<double>(g.n));
    for (int i0 = 0; i0 < g.n; ++i0) {
      double acc = 0.0;
      for (int i1 = 0; i1 < g.n; ++i1) {
        acc += w[(std::size_t)i0 * g.n + i1];
        cond[i0][i1] = acc;
      }
      row[i0] = acc;
    }
    std::vector<double> cum(g.n);
    double total = 0.0;
    for (int i0 = 0; i0 < g.n; ++i0) {
      total += row[i0];
      cum[i0] = total;
    }
    if (!(total > 0.0)) throw std::invalid_argument("initial density carries no mass");
    ens.weight = total * g.cell_volume();
    parallel_for(n_particles, [&](std::size_t p) {
      double u0d = rng::uniform(seed, p, 0, kInitTag) * total;
      auto [i0, f0] = draw_cell(cum, u0d);
      double u1d = rng::uniform(seed, p, 1, kInitTag) * std::max(row[i0], 1e-300);
      auto [i1, f1] = draw_cell(cond[i0], u1d);
      ens.positions[2 * p] = wrap_coord(g.coord(i0) + (f0 - 0.5) * g.dx(), g.half_width);
      ens.positions[2 * p + 1] = wrap_coord(g.coord(i1) + (f1 - 0.5) * g.dx(), g.half_width);
    });
  }
  return ens;
}

ScalarField estimate_density(const ParticleEnsemble& ens, const DensityEstimator& est) {
  if (ens.count() == 0) throw std::invalid_argument("empty ensemble");
  const PeriodicGrid& g = ens.grid;
  const std::size_t N = ens.count();
  ScalarField out(g);
  for (std::size_t p = 0; p < N; ++p) {
    int idx[2] = {0, 0};
    for (int a = 0; a < g.dim; ++a) {
      // Nearest node, matching the node-centered cells of sample_initial.
      double s = (ens.positions[p * g.dim + a] + g.half_width) / g.dx();
      int j = (int)std::floor(s + 0.5);
      idx[a] = ((j % g.n) + g.n) % g.n;
    }
    out.values[g.dim == 1 ? (std::size_t)idx[0] : (std::size_t)idx[0] * g.n + idx[1]] += 1.0;
  }
  double scale = ens.weight / ((double)N * g.cell_volume());
  for (double& v : out.values) v *= scale;

  if (est.kind == EstimatorKind::gaussian_kernel) {
    double bw[2] = {0.0, 0.0};
    if (est.bandwidth > 0.0) {
      bw[0] = bw[1] = est.bandwidth;
    } else {
      // Silverman-style rate per axis.
      double rate = std::pow((double)N, -1.0 / (g.dim + 4.0));
      for (int a = 0; a < g.dim; ++a) {
        double mean = 0.0;
        for (std::size_t p = 0; p < N; ++p) mean += ens.positions[p * g.dim + a];
        mean /= (double)N;
        double var = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
          double d = ens.positions[p * g.dim + a] - mean;
          var += d * d;
        }
        double sd = std::sqrt(var / (double)N);
        bw[a] = sd > 0.0 ? sd * rate : g.dx();
      }
    }
    auto spec = spectrum(out);
    const double base = std::numbers::pi / g.half_width;
    if (g.dim == 1) {
      for (int i = 0; i < g.n; ++i) {
        double k = base * detail::fold_mode(i, g.n);
        spec[i] *= std::exp(-0.5 * k * k * bw[0] * bw[0]);
      }
    } else {
      for (int i0 = 0; i0 < g.n; ++i0)
        for (int i1 = 0; i1 < g.n; ++i1) {
          double k0 = base * detail::fold_mode(i0, g.n);
          double k1 = base * detail::fold_mode(i1, g.n);
          spec[(std::size_t)i0 * g.n + i1] *=
              std::exp(-0.5 * (k0 * k0 * bw[0] * bw[0] + k1 * k1 * bw[1] * bw[1]));
        }
    }
    out = field_from_spectrum(g, std::move(spec));
    for (double& v : out.values) v = std::max(v, 0.0);
    double m = mass(out);
    if (m > 0.0) out *= ens.weight / m;
  }
  return out;
}

ParticleEnsemble advance(const ParticleEnsemble& ens, double dt, const ModelProblem& model,
                         const ScalarField& density) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(density.grid == ens.grid)) throw std::invalid_argument("density grid mismatch");
  const PeriodicGrid& g = ens.grid;
  const std::size_t N = ens.count();
  const double root_dt = std::sqrt(dt);
  const double neg_tol = -1e-9 * (1.0 + norm_linf(density));

  ParticleEnsemble out = ens;
  out.time = ens.time + dt;
  out.step_index = ens.step_index + 1;

  std::vector<double> bad(1, 0.0);
  bool degenerate = false;
  parallel_for(N, [&](std::size_t p) {
    Vec2 x{ens.positions[p * g.dim], g.dim == 2 ? ens.positions[p * g.dim + 1] : 0.0};
    double u_hat = interpolate(density, x);
    if (u_hat < neg_tol) {
      degenerate = true;
      bad[0] = u_hat;
      return;
    }
    double u = std::max(u_hat, 1e-12);
    Vec2 b = drift_velocity(model, x, u);
    double diff = std::sqrt(2.0 * phi(model, u)) * root_dt;
    for (int a = 0; a < g.dim; ++a) {
      double noise = rng::normal(ens.seed, ens.step_index, p, (std::uint64_t)a);
      out.positions[p * g.dim + a] =
          wrap_coord(x[a] + b[a] * dt + diff * noise, g.half_width);
    }
  });
  if (degenerate)
    throw DegenerateDensity("density estimate negative under a particle: " +
                                std::to_string(bad[0]),
                            bad[0]);
  return out;
}

std::vector<DensitySnapshot> simulate(const ScalarField& u0, double T, double dt,
                                      std::size_t n_particles, std::uint64_t seed,
                                      const ModelProblem& model, const DensityEstimator& est,
                                      const std::vector<double>& snapshot_times) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(T >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  const std::size_t n_steps = T > 0.0 ? (std::size_t)std::ceil(T / dt - 1e-9) : 0;

  // Requested times round to the nearest step boundary.
  std::vector<std::pair<std::size_t, std::size_t>> wanted;  // (step, output slot)
  for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
    double s = snapshot_times[k];
    if (s < -1e-12 || s > T + 1e-12)
      throw std::invalid_argument("snapshot time outside [0, T]");
    std::size_t target = std::min(n_steps, (std::size_t)std::llround(std::max(s, 0.0) / dt));
    wanted.emplace_back(target, k);
  }
  std::sort(wanted.begin(), wanted.end());

  std::vector<DensitySnapshot> out(snapshot_times.size());
  ParticleEnsemble ens = sample_initial(u0, n_particles, seed);
  std::size_t cursor = 0;
  double t = 0.0;
  for (std::size_t step = 0; step <= n_steps; ++step) {
    bool record = cursor < wanted.size() && wanted[cursor].first == step;
    if (record || step < n_steps) {
      ScalarField dens = estimate_density(ens, est);
      while (cursor < wanted.size() && wanted[cursor].first == step) {
        out[wanted[cursor].second] = {t, dens};
        ++cursor;
      }
      if (step < n_steps) {
        double t_new = std::min((double)(step + 1) * dt, T);
        ens = advance(ens, t_new - t, model, dens);
        t = t_new;
      }
    }
  }
  return out;
}

std::vector<double> law_distance(const std::vector<DensitySnapshot>& a,
                                 const std::vector<DensitySnapshot>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("snapshot counts differ");
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].time - b[i].time) > 1e-9 * (1.0 + std::abs(a[i].time)))
      throw std::invalid_argument("snapshot times differ");
    out.push_back(norm_l1(a[i].density - b[i].density));
  }
  return out;
}

}  // namespace fplab

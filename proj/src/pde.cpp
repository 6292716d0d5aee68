#include "fplab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>

#include "fplab/spectral.hpp"

namespace fplab {
namespace {

// Zeroes modes with |m| > n/3 on any axis (2/3 rule).
void dealias_spec(const PeriodicGrid& g, std::vector<std::complex<double>>& spec) {
  const int cut = g.n / 3;
  auto keep = [&](int m) { return std::abs(m) <= cut; };
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i)
      if (!keep(detail::fold_mode(i, g.n))) spec[i] = 0.0;
  } else {
    for (int i0 = 0; i0 < g.n; ++i0)
      for (int i1 = 0; i1 < g.n; ++i1)
        if (!keep(detail::fold_mode(i0, g.n)) || !keep(detail::fold_mode(i1, g.n)))
          spec[(std::size_t)i0 * g.n + i1] = 0.0;
  }
}

// Calls fn(i, k2_full, kd0, kd1) with the full |kappa|^2 and the
// Nyquist-zeroed first-derivative frequencies.
template <class F>
void for_modes(const PeriodicGrid& g, F&& fn) {
  const double base = std::numbers::pi / g.half_width;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      int m = detail::fold_mode(i, g.n);
      double k = base * m;
      fn((std::size_t)i, k * k, m == -g.n / 2 ? 0.0 : k, 0.0);
    }
  } else {
    for (int i0 = 0; i0 < g.n; ++i0) {
      int m0 = detail::fold_mode(i0, g.n);
      double k0 = base * m0;
      for (int i1 = 0; i1 < g.n; ++i1) {
        int m1 = detail::fold_mode(i1, g.n);
        double k1 = base * m1;
        fn((std::size_t)i0 * g.n + i1, k0 * k0 + k1 * k1, m0 == -g.n / 2 ? 0.0 : k0,
           m1 == -g.n / 2 ? 0.0 : k1);
      }
    }
  }
}

ScalarField resolvent(const ScalarField& f, double h, double gamma) {
  auto spec = spectrum(f);
  for_modes(f.grid, [&](std::size_t i, double k2, double, double) {
    spec[i] /= 1.0 + h * gamma * k2;
  });
  return field_from_spectrum(f.grid, std::move(spec));
}

struct KrylovOutcome {
  double rel_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Restarted GMRES with zero initial guess; the true residual is recomputed
// at each restart so the reported value is not a by-product of rounding.
KrylovOutcome gmres(const std::function<ScalarField(const ScalarField&)>& apply,
                    const ScalarField& rhs, ScalarField& x, int restart, int max_iter,
                    double rtol) {
  x = ScalarField(rhs.grid, 0.0);
  const double bnorm = norm_l2(rhs);
  KrylovOutcome out;
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  ScalarField r = rhs;
  double beta = bnorm;
  out.rel_residual = 1.0;
  while (out.iterations < max_iter && out.rel_residual > rtol) {
    std::vector<ScalarField> V;
    V.reserve(restart + 1);
    V.push_back((1.0 / beta) * r);
    std::vector<std::vector<double>> H(restart + 1, std::vector<double>(restart, 0.0));
    std::vector<double> cs(restart, 1.0), sn(restart, 0.0), g(restart + 1, 0.0);
    g[0] = beta;
    int cols = 0;
    bool breakdown = false;
    for (int j = 0; j < restart && out.iterations < max_iter; ++j) {
      ++out.iterations;
      ScalarField w = apply(V[j]);
      for (int i = 0; i <= j; ++i) {
        H[i][j] = inner_product(w, V[i]);
        w -= H[i][j] * V[i];
      }
      H[j + 1][j] = norm_l2(w);
      if (H[j + 1][j] > 1e-300)
        V.push_back((1.0 / H[j + 1][j]) * w);
      else
        breakdown = true;
      for (int i = 0; i < j; ++i) {
        double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      double denom = std::hypot(H[j][j], H[j + 1][j]);
      if (denom == 0.0) {
        breakdown = true;
        break;
      }
      cs[j] = H[j][j] / denom;
      sn[j] = H[j + 1][j] / denom;
      H[j][j] = denom;
      H[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      cols = j + 1;
      if (std::abs(g[j + 1]) / bnorm <= rtol || breakdown) break;
    }
    std::vector<double> y(cols, 0.0);
    for (int i = cols - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < cols; ++k) s -= H[i][k] * y[k];
      y[i] = H[i][i] != 0.0 ? s / H[i][i] : 0.0;
    }
    for (int i = 0; i < cols; ++i) x += y[i] * V[i];
    r = rhs - apply(x);
    beta = norm_l2(r);
    out.rel_residual = beta / bnorm;
    if (out.rel_residual <= rtol) {
      out.converged = true;
      break;
    }
    if (breakdown || cols == 0) break;
  }
  if (out.rel_residual <= rtol) out.converged = true;
  return out;
}

enum class DriftMode { none, separable, general };

/**
 * Shared state for the implicit stage
 *   u + h (-lap(beta(u)) + eps beta(u) + div(flux(u))) = g,
 * flux(u)(x) = b(x, u(x)) u(x).  A Newton iteration preconditioned by
 * (I - h gamma0 lap)^{-1} does the work; a damped contraction sweep with
 * weight (gamma0 + beta_M)/2 backs it up when Newton stalls.
 */
struct StageEngine {
  const ModelProblem& model;
  PeriodicGrid grid;
  SolverConfig cfg;
  DriftMode mode = DriftMode::none;
  std::vector<double> spatial0, spatial1;  // separable drift factor on nodes
  std::vector<Vec2> coords;                // node coordinates, general mode
  double gamma_fp = 0.0;

  StageEngine(const PeriodicGrid& g, const ModelProblem& m, const SolverConfig& c,
              double state_bound)
      : model(m), grid(g), cfg(c) {
    if (m.dimension != g.dim)
      throw std::invalid_argument("model dimension " + std::to_string(m.dimension) +
                                  " does not match grid dimension " + std::to_string(g.dim));
    if (!m.drift.is_zero) mode = m.drift.separable ? DriftMode::separable : DriftMode::general;
    if (mode == DriftMode::separable) {
      VectorField S(grid);
      for (int a = 0; a < grid.dim; ++a)
        S.comps[a] = sample_field(grid, [&](const Vec2& x) { return m.drift.spatial(x)[a]; });
      if (cfg.mollifier_width > 0.0) {
        const double w2 = cfg.mollifier_width * cfg.mollifier_width;
        for (int a = 0; a < grid.dim; ++a) {
          auto spec = spectrum(S.comps[a]);
          for_modes(grid, [&](std::size_t i, double k2, double, double) {
            spec[i] *= std::exp(-0.5 * k2 * w2);
          });
          S.comps[a] = field_from_spectrum(grid, std::move(spec));
        }
      }
      spatial0 = S.comps[0].values;
      if (grid.dim == 2) spatial1 = S.comps[1].values;
    } else if (mode == DriftMode::general) {
      if (cfg.mollifier_width > 0.0)
        throw std::invalid_argument(
            "drift mollification needs a separable drift (profile times spatial factor)");
      coords.resize(grid.size());
      if (grid.dim == 1) {
        for (int i = 0; i < grid.n; ++i) coords[i] = {grid.coord(i), 0.0};
      } else {
        for (int i0 = 0; i0 < grid.n; ++i0)
          for (int i1 = 0; i1 < grid.n; ++i1)
            coords[(std::size_t)i0 * grid.n + i1] = {grid.coord(i0), grid.coord(i1)};
      }
    }
    double beta_m = lipschitz_constants(m, std::max(state_bound, 1e-6)).beta_lipschitz;
    gamma_fp = 0.5 * (m.nonlinearity.gamma0 + beta_m);
  }

  // Accumulates the spectral image of -lap(beta) + eps beta + div(flux),
  // shared by the residual and the fallback sweep.
  std::vector<std::complex<double>> operator_spectrum(const ScalarField& u) const {
    const std::size_t N = grid.size();
    ScalarField beta_field(grid);
    for (std::size_t i = 0; i < N; ++i)
      beta_field.values[i] = model.nonlinearity.beta(u.values[i]);
    auto beta_spec = spectrum(beta_field);
    if (cfg.dealias) dealias_spec(grid, beta_spec);

    std::vector<std::complex<double>> acc(N);
    const double eps = cfg.epsilon_reg;
    for_modes(grid, [&](std::size_t i, double k2, double, double) {
      acc[i] = (k2 + eps) * beta_spec[i];
    });

    if (mode != DriftMode::none) {
      for (int a = 0; a < grid.dim; ++a) {
        ScalarField flux(grid);
        if (mode == DriftMode::separable) {
          const auto& S = a == 0 ? spatial0 : spatial1;
          for (std::size_t i = 0; i < N; ++i)
            flux.values[i] = model.drift.profile(u.values[i]) * u.values[i] * S[i];
        } else {
          for (std::size_t i = 0; i < N; ++i)
            flux.values[i] = model.drift.value(coords[i], u.values[i])[a] * u.values[i];
        }
        auto fspec = spectrum(flux);
        if (cfg.dealias) dealias_spec(grid, fspec);
        for_modes(grid, [&](std::size_t i, double, double kd0, double kd1) {
          acc[i] += std::complex<double>(0.0, a == 0 ? kd0 : kd1) * fspec[i];
        });
      }
    }
    return acc;
  }

  ScalarField residual(const ScalarField& u, const ScalarField& g, double h) const {
    ScalarField op = field_from_spectrum(grid, operator_spectrum(u));
    ScalarField F = u;
    for (std::size_t i = 0; i < F.values.size(); ++i)
      F.values[i] += h * op.values[i] - g.values[i];
    return F;
  }

  struct Linearization {
    std::vector<double> beta_prime;
    std::vector<double> advect0, advect1;  // d(flux)/du coefficient per node
  };

  Linearization linearize(const ScalarField& u) const {
    const std::size_t N = grid.size();
    Linearization lin;
    lin.beta_prime.resize(N);
    for (std::size_t i = 0; i < N; ++i)
      lin.beta_prime[i] = model.nonlinearity.beta_prime(u.values[i]);
    if (mode == DriftMode::separable) {
      lin.advect0.resize(N);
      if (grid.dim == 2) lin.advect1.resize(N);
      for (std::size_t i = 0; i < N; ++i) {
        double r = u.values[i];
        double c = model.drift.profile(r) + model.drift.profile_prime(r) * r;
        lin.advect0[i] = c * spatial0[i];
        if (grid.dim == 2) lin.advect1[i] = c * spatial1[i];
      }
    } else if (mode == DriftMode::general) {
      lin.advect0.resize(N);
      if (grid.dim == 2) lin.advect1.resize(N);
      for (std::size_t i = 0; i < N; ++i) {
        double r = u.values[i];
        Vec2 b = model.drift.value(coords[i], r);
        Vec2 br = model.drift.r_derivative(coords[i], r);
        lin.advect0[i] = b[0] + br[0] * r;
        if (grid.dim == 2) lin.advect1[i] = b[1] + br[1] * r;
      }
    }
    return lin;
  }

  ScalarField apply_jacobian(const Linearization& lin, const ScalarField& v, double h) const {
    const std::size_t N = grid.size();
    ScalarField w(grid);
    for (std::size_t i = 0; i < N; ++i) w.values[i] = lin.beta_prime[i] * v.values[i];
    auto wspec = spectrum(w);
    if (cfg.dealias) dealias_spec(grid, wspec);
    std::vector<std::complex<double>> acc(N);
    const double eps = cfg.epsilon_reg;
    for_modes(grid, [&](std::size_t i, double k2, double, double) {
      acc[i] = (k2 + eps) * wspec[i];
    });
    if (!lin.advect0.empty()) {
      for (int a = 0; a < grid.dim; ++a) {
        const auto& c = a == 0 ? lin.advect0 : lin.advect1;
        ScalarField flux(grid);
        for (std::size_t i = 0; i < N; ++i) flux.values[i] = c[i] * v.values[i];
        auto fspec = spectrum(flux);
        if (cfg.dealias) dealias_spec(grid, fspec);
        for_modes(grid, [&](std::size_t i, double, double kd0, double kd1) {
          acc[i] += std::complex<double>(0.0, a == 0 ? kd0 : kd1) * fspec[i];
        });
      }
    }
    ScalarField out = field_from_spectrum(grid, std::move(acc));
    for (std::size_t i = 0; i < N; ++i) out.values[i] = v.values[i] + h * out.values[i];
    return out;
  }

  // Damped fixed point u <- (I - h gamma* lap)^{-1} (g - h(op(u) - gamma* lap u)),
  // a contraction for gamma* between gamma0 and beta_M.
  ScalarField fallback_sweep(ScalarField u, const ScalarField& g, double h, double target,
                             double& fnorm) const {
    auto gspec = spectrum(g);
    for (int sweep = 0; sweep < 4000; ++sweep) {
      auto op = operator_spectrum(u);
      auto uspec = spectrum(u);
      std::vector<std::complex<double>> next(grid.size());
      for_modes(grid, [&](std::size_t i, double k2, double, double) {
        std::complex<double> num =
            gspec[i] - h * op[i] + h * gamma_fp * k2 * uspec[i];
        next[i] = num / (1.0 + h * gamma_fp * k2);
      });
      u = field_from_spectrum(grid, std::move(next));
      if (sweep % 8 == 7 || sweep >= 3996) {
        fnorm = norm_l2(residual(u, g, h));
        if (fnorm <= target || !std::isfinite(fnorm)) break;
      }
    }
    fnorm = norm_l2(residual(u, g, h));
    return u;
  }

  ScalarField solve(const ScalarField& g, double h, std::size_t step_index) const {
    if (h == 0.0) return g;
    const double target = cfg.newton_tol * std::max(1.0, norm_l2(g));
    const double gamma0 = model.nonlinearity.gamma0;
    ScalarField u = g;
    ScalarField F = residual(u, g, h);
    double fnorm = norm_l2(F);
    for (int it = 0; it < cfg.newton_max_iter && fnorm > target; ++it) {
      Linearization lin = linearize(u);
      auto apply = [&](const ScalarField& v) {
        return resolvent(apply_jacobian(lin, v, h), h, gamma0);
      };
      ScalarField rhs = resolvent(-1.0 * F, h, gamma0);
      ScalarField delta;
      gmres(apply, rhs, delta, 40, cfg.krylov_max_iter, cfg.krylov_tol);
      double lambda = cfg.damping;
      bool accepted = false;
      for (int trial = 0; trial < 14; ++trial) {
        ScalarField u_try = u + lambda * delta;
        ScalarField F_try = residual(u_try, g, h);
        double f_try = norm_l2(F_try);
        if (std::isfinite(f_try) && (f_try <= (1.0 - 1e-4 * lambda) * fnorm || f_try <= target)) {
          u = std::move(u_try);
          F = std::move(F_try);
          fnorm = f_try;
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
    }
    if (fnorm > target) u = fallback_sweep(g, g, h, target, fnorm);
    if (fnorm > target || !std::isfinite(fnorm))
      throw NonConvergence("implicit stage stalled at step " + std::to_string(step_index) +
                               ": residual " + std::to_string(fnorm) + " above target " +
                               std::to_string(target) +
                               "; retry with a smaller time_step or a looser newton_tol",
                           step_index, fnorm);
    if (cfg.epsilon_reg == 0.0) {
      // The continuous stage conserves mass exactly; pinning the mean
      // removes the solver-tolerance drift of the zero mode.
      double shift = (mass(g) - mass(u)) / grid.box_volume();
      for (double& v : u.values) v += shift;
    }
    return u;
  }
};

Trajectory run_chain(const ScalarField& u0, double T, const ModelProblem& model, SolverConfig cfg,
                     bool keep_regularization) {
  validate(cfg);
  if (!(T >= 0.0)) throw std::invalid_argument("time horizon must be nonnegative");
  if (!keep_regularization) {
    cfg.epsilon_reg = 0.0;
    cfg.mollifier_width = 0.0;
  }
  const double sup0 = norm_linf(u0);
  EtaTable eta = barrier_eta(sup0, std::max(T, cfg.time_step), model, 256);
  const double M = 2.0 * eta.values.back() + 1.0;
  ValidationReport rep = validate_assumptions(model, M, 200);
  if (!rep.all_pass()) {
    std::string bad;
    for (const auto& c : rep.checks)
      if (!c.pass) {
        bad = c.name;
        break;
      }
    throw std::invalid_argument("model '" + model.name + "' fails structural check: " + bad);
  }
  StageEngine engine(u0.grid, model, cfg, M);
  Trajectory traj{u0.grid, model.name, cfg, {0.0}, {u0}};
  const double h = cfg.time_step;
  const std::size_t n_steps = T > 0.0 ? (std::size_t)std::ceil(T / h - 1e-9) : 0;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    double t_new = std::min((double)i * h, T);
    double h_i = t_new - traj.times.back();
    traj.fields.push_back(engine.solve(traj.fields.back(), h_i, i - 1));
    traj.times.push_back(t_new);
  }
  return traj;
}

}  // namespace

void validate(const SolverConfig& cfg) {
  if (!(cfg.time_step > 0.0)) throw std::invalid_argument("time_step must be positive");
  if (!(cfg.newton_tol >= 1e-14)) throw std::invalid_argument("newton_tol must be at least 1e-14");
  if (cfg.newton_max_iter < 1) throw std::invalid_argument("newton_max_iter must be positive");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
    throw std::invalid_argument("damping must lie in (0, 1]");
  if (!(cfg.epsilon_reg >= 0.0)) throw std::invalid_argument("epsilon_reg must be nonnegative");
  if (!(cfg.mollifier_width >= 0.0))
    throw std::invalid_argument("mollifier_width must be nonnegative");
  if (cfg.krylov_max_iter < 1) throw std::invalid_argument("krylov_max_iter must be positive");
  if (!(cfg.krylov_tol > 0.0 && cfg.krylov_tol < 1.0))
    throw std::invalid_argument("krylov_tol must lie in (0, 1)");
}

ScalarField implicit_step(const ScalarField& g, double h, const ModelProblem& model,
                          const SolverConfig& cfg) {
  validate(cfg);
  if (!(h >= 0.0)) throw std::invalid_argument("step size must be nonnegative");
  StageEngine engine(g.grid, model, cfg, 2.0 * norm_linf(g) + 1.0);
  return engine.solve(g, h, 0);
}

Trajectory solve_mild(const ScalarField& u0, double T, const ModelProblem& model,
                      const SolverConfig& cfg) {
  return run_chain(u0, T, model, cfg, false);
}

Trajectory solve_regularized(const ScalarField& u0, double T, const ModelProblem& model,
                             const SolverConfig& cfg) {
  return run_chain(u0, T, model, cfg, true);
}

FrozenCoefficients FrozenCoefficients::from_trajectory(const Trajectory& traj,
                                                       const ModelProblem& model) {
  FrozenCoefficients out;
  out.times = traj.times;
  out.psi.reserve(traj.fields.size());
  for (const ScalarField& u : traj.fields) {
    ScalarField p(u.grid);
    for (std::size_t i = 0; i < u.values.size(); ++i)
      p.values[i] = model.nonlinearity.beta_prime(u.values[i]);
    out.psi.push_back(std::move(p));
  }
  if (!model.drift.is_zero) {
    out.drift.reserve(traj.fields.size());
    for (const ScalarField& u : traj.fields) {
      VectorField B(u.grid);
      const PeriodicGrid& g = u.grid;
      if (g.dim == 1) {
        for (int i = 0; i < g.n; ++i) {
          Vec2 b = drift_velocity(model, {g.coord(i), 0.0}, u.values[i]);
          B.comps[0].values[i] = b[0];
        }
      } else {
        for (int i0 = 0; i0 < g.n; ++i0)
          for (int i1 = 0; i1 < g.n; ++i1) {
            Vec2 b = drift_velocity(model, {g.coord(i0), g.coord(i1)}, u.at(i0, i1));
            B.comps[0].at(i0, i1) = b[0];
            B.comps[1].at(i0, i1) = b[1];
          }
      }
      out.drift.push_back(std::move(B));
    }
  }
  return out;
}

Trajectory solve_linearized(const ScalarField& v0, const FrozenCoefficients& coeffs, double T,
                            const SolverConfig& cfg) {
  validate(cfg);
  if (!(T >= 0.0)) throw std::invalid_argument("time horizon must be nonnegative");
  if (coeffs.times.empty() || coeffs.psi.size() != coeffs.times.size())
    throw std::invalid_argument("frozen coefficients need matching times and weights");
  if (!coeffs.drift.empty() && coeffs.drift.size() != coeffs.times.size())
    throw std::invalid_argument("frozen drift entries must match the time tags");
  for (const auto& p : coeffs.psi) require_same_grid(p, v0);

  const PeriodicGrid& grid = v0.grid;
  auto pick = [&](double t) {
    std::size_t best = 0;
    double gap = std::abs(coeffs.times[0] - t);
    for (std::size_t j = 1; j < coeffs.times.size(); ++j) {
      double d = std::abs(coeffs.times[j] - t);
      if (d < gap) {
        gap = d;
        best = j;
      }
    }
    return best;
  };

  Trajectory traj{grid, "linearized", cfg, {0.0}, {v0}};
  const double h = cfg.time_step;
  const std::size_t n_steps = T > 0.0 ? (std::size_t)std::ceil(T / h - 1e-9) : 0;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    double t_new = std::min((double)i * h, T);
    double h_i = t_new - traj.times.back();
    std::size_t idx = pick(t_new);
    const ScalarField& psi = coeffs.psi[idx];
    const VectorField* B = coeffs.drift.empty() ? nullptr : &coeffs.drift[idx];
    double psi_min = *std::min_element(psi.values.begin(), psi.values.end());
    double gamma = std::max(psi_min, 1e-12);

    auto apply_op = [&](const ScalarField& v) {
      ScalarField w(grid);
      for (std::size_t k = 0; k < w.values.size(); ++k)
        w.values[k] = psi.values[k] * v.values[k];
      auto wspec = spectrum(w);
      std::vector<std::complex<double>> acc(grid.size());
      for_modes(grid, [&](std::size_t k, double k2, double, double) { acc[k] = k2 * wspec[k]; });
      if (B) {
        for (int a = 0; a < grid.dim; ++a) {
          ScalarField flux(grid);
          for (std::size_t k = 0; k < flux.values.size(); ++k)
            flux.values[k] = B->comps[a].values[k] * v.values[k];
          auto fspec = spectrum(flux);
          for_modes(grid, [&](std::size_t k, double, double kd0, double kd1) {
            acc[k] += std::complex<double>(0.0, a == 0 ? kd0 : kd1) * fspec[k];
          });
        }
      }
      ScalarField out = field_from_spectrum(grid, std::move(acc));
      for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = v.values[k] + h_i * out.values[k];
      return out;
    };

    const ScalarField& rhs = traj.fields.back();
    double bnorm = norm_l2(rhs);
    ScalarField v_new(grid, 0.0);
    if (bnorm > 0.0) {
      auto apply = [&](const ScalarField& v) { return resolvent(apply_op(v), h_i, gamma); };
      ScalarField prhs = resolvent(rhs, h_i, gamma);
      double rtol = std::min(0.5, cfg.newton_tol * std::max(1.0, bnorm) / bnorm);
      KrylovOutcome kr = gmres(apply, prhs, v_new, 40, cfg.krylov_max_iter, rtol);
      if (!kr.converged)
        throw LinearSolveFailure(
            "frozen-coefficient stage stalled at step " + std::to_string(i - 1) +
                " (relative residual " + std::to_string(kr.rel_residual) +
                "); check that the diffusion weight stays positive or reduce time_step",
            kr.rel_residual);
      double shift = (mass(rhs) - mass(v_new)) / grid.box_volume();
      for (double& v : v_new.values) v += shift;
    }
    traj.fields.push_back(std::move(v_new));
    traj.times.push_back(t_new);
  }
  return traj;
}

double EtaTable::at(double t) const {
  if (times.empty()) throw std::logic_error("empty barrier table");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t j = (std::size_t)(it - times.begin());
  double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

EtaTable barrier_eta(double initial_sup, double T, const ModelProblem& model, int n_steps) {
  if (!(initial_sup >= 0.0)) throw std::invalid_argument("initial sup must be nonnegative");
  if (!(T >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  if (n_steps < 1) throw std::invalid_argument("need at least one barrier step");
  EtaTable tab;
  tab.times.push_back(0.0);
  tab.values.push_back(initial_sup);
  if (T == 0.0) return tab;
  auto rhs = [&](double e) { return delta_of(model, e) * e; };
  const double dt = T / n_steps;
  double eta = initial_sup;
  for (int i = 1; i <= n_steps; ++i) {
    double k1 = rhs(eta);
    double k2 = rhs(eta + 0.5 * dt * k1);
    double k3 = rhs(eta + 0.5 * dt * k2);
    double k4 = rhs(eta + dt * k3);
    eta += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tab.times.push_back(i * dt);
    tab.values.push_back(eta);
  }
  return tab;
}

ConvergenceEstimate self_convergence(const ScalarField& u0, double T, const ModelProblem& model,
                                     const SolverConfig& cfg,
                                     const std::vector<double>& step_sizes) {
  if (step_sizes.size() < 3)
    throw std::invalid_argument("need at least three step sizes");
  for (std::size_t k = 0; k + 1 < step_sizes.size(); ++k)
    if (std::abs(step_sizes[k + 1] - 0.5 * step_sizes[k]) > 1e-9 * step_sizes[k])
      throw std::invalid_argument("each step size must halve the previous one");

  ConvergenceEstimate est;
  est.step_sizes = step_sizes;
  std::vector<ScalarField> finals;
  finals.reserve(step_sizes.size());
  for (double h : step_sizes) {
    SolverConfig c = cfg;
    c.time_step = h;
    finals.push_back(solve_mild(u0, T, model, c).final());
  }
  for (std::size_t k = 0; k + 1 < finals.size(); ++k)
    est.distances.push_back(norm_l1(finals[k] - finals[k + 1]));

  const double floor_d = 1e-15 * (1.0 + norm_l1(u0));
  bool stationary = true;
  for (double d : est.distances) stationary = stationary && d < floor_d;
  if (stationary) {
    est.fitted_order = std::numeric_limits<double>::infinity();
    return est;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = (double)est.distances.size();
  for (std::size_t k = 0; k < est.distances.size(); ++k) {
    double x = std::log(step_sizes[k]);
    double y = std::log(std::max(est.distances[k], floor_d));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  est.fitted_order = denom != 0.0 ? (n * sxy - sx * sy) / denom
                                  : std::log2(est.distances.front() /
                                              std::max(est.distances.back(), floor_d));
  return est;
}

}  // namespace fplab

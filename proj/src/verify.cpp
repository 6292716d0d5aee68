#include "fplab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fplab/rng.hpp"

namespace fplab {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

bool VerificationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": measured=" << fmt(c.measured)
       << " bound=" << fmt(c.bound) << " tolerance=" << fmt(c.tolerance);
    if (!c.details.empty()) os << " | " << c.details;
    os << '\n';
  }
  return os.str();
}

std::string VerificationReport::to_csv() const {
  std::ostringstream os;
  os << "name,pass,measured,bound,tolerance,details\n";
  os.precision(17);
  for (const auto& c : checks)
    os << csv_quote(c.name) << ',' << (c.pass ? 1 : 0) << ',' << c.measured << ',' << c.bound
       << ',' << c.tolerance << ',' << csv_quote(c.details) << '\n';
  return os.str();
}

double weak_residual(const Trajectory& traj, const ModelProblem& model, int n_test,
                     std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("need at least one test function");
  if (traj.times.size() < 2) throw std::invalid_argument("trajectory has no time extent");
  const PeriodicGrid& g = traj.grid;
  const double T = traj.times.back();
  const std::size_t nt = traj.times.size();

  // Trapezoid weights on the (possibly non-uniform) time ladder.
  std::vector<double> wt(nt, 0.0);
  for (std::size_t i = 0; i + 1 < nt; ++i) {
    double half = 0.5 * (traj.times[i + 1] - traj.times[i]);
    wt[i] += half;
    wt[i + 1] += half;
  }

  struct TestFn {
    ScalarField lap;      // laplacian of the spatial factor
    VectorField grad;     // gradient of the spatial factor
    ScalarField shape;    // the spatial factor itself
    double slope;         // linear tilt of the time window
    double scale;         // normalizer of the time window
  };
  std::vector<TestFn> fns;
  fns.reserve(n_test);
  int band = std::min(6, g.n / 2 - 1);
  for (int k = 0; k < n_test; ++k) {
    TestFn f;
    f.shape = synthesize_random_field(g, seed + (std::uint64_t)k, band, 1.0);
    f.lap = laplacian(f.shape);
    f.grad = gradient(f.shape);
    f.slope = 0.5 * rng::uniform(seed, (std::uint64_t)k, 0xF00) / T;
    double peak = 0.0;
    for (int s = 0; s <= 1000; ++s) {
      double t = T * s / 1000.0;
      peak = std::max(peak, t * t * (T - t) * (T - t) * (1.0 + f.slope * t));
    }
    f.scale = peak > 0.0 ? 1.0 / peak : 1.0;
    fns.push_back(std::move(f));
  }
  auto window = [&](const TestFn& f, double t) {
    return f.scale * t * t * (T - t) * (T - t) * (1.0 + f.slope * t);
  };
  auto window_dt = [&](const TestFn& f, double t) {
    double a = t * t * (T - t) * (T - t);
    double da = 2.0 * t * (T - t) * (T - 2.0 * t);
    return f.scale * (da * (1.0 + f.slope * t) + a * f.slope);
  };

  const bool has_drift = !model.drift.is_zero;
  std::vector<double> acc(n_test, 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    const ScalarField& u = traj.fields[i];
    ScalarField beta_u(g);
    for (std::size_t j = 0; j < u.values.size(); ++j)
      beta_u.values[j] = model.nonlinearity.beta(u.values[j]);
    VectorField flux(g);
    if (has_drift) {
      if (g.dim == 1) {
        for (int j = 0; j < g.n; ++j) {
          Vec2 bs = drift_flux(model, {g.coord(j), 0.0}, u.values[j]);
          flux.comps[0].values[j] = bs[0];
        }
      } else {
        for (int j0 = 0; j0 < g.n; ++j0)
          for (int j1 = 0; j1 < g.n; ++j1) {
            Vec2 bs = drift_flux(model, {g.coord(j0), g.coord(j1)}, u.at(j0, j1));
            flux.comps[0].at(j0, j1) = bs[0];
            flux.comps[1].at(j0, j1) = bs[1];
          }
      }
    }
    double t = traj.times[i];
    for (int k = 0; k < n_test; ++k) {
      const TestFn& f = fns[k];
      double term = inner_product(u, f.shape) * window_dt(f, t) +
                    inner_product(beta_u, f.lap) * window(f, t);
      if (has_drift) {
        double adv = 0.0;
        for (int a = 0; a < g.dim; ++a) adv += inner_product(flux.comps[a], f.grad.comps[a]);
        term += adv * window(f, t);
      }
      acc[k] += wt[i] * term;
    }
  }
  double worst = 0.0;
  for (double v : acc) worst = std::max(worst, std::abs(v));
  return worst;
}

double narrow_continuity_modulus(const Trajectory& traj,
                                 const std::vector<ScalarField>& probes) {
  if (probes.empty()) throw std::invalid_argument("need at least one probe");
  double worst = 0.0;
  for (const ScalarField& psi : probes) {
    require_same_grid(psi, traj.fields.front());
    for (std::size_t i = 0; i + 1 < traj.fields.size(); ++i)
      worst = std::max(worst,
                       std::abs(inner_product(traj.fields[i + 1] - traj.fields[i], psi)));
  }
  return worst;
}

double young_closure_constant(double K, double gamma0) {
  if (!(K >= 0.0) || !(gamma0 > 0.0))
    throw std::invalid_argument("need K >= 0 and gamma0 > 0");
  if (K == 0.0) return 0.0;
  auto f = [&](double a) { return K * std::pow(a, 1.5) - gamma0 * a * a; };
  // The maximizer sits below (K / gamma0)^2; scan then ternary-refine.
  double hi = std::pow(K / gamma0, 2.0) + 1.0;
  double best_a = 0.0, best = 0.0;
  const int N = 200000;
  for (int i = 0; i <= N; ++i) {
    double a = hi * i / N;
    double v = f(a);
    if (v > best) {
      best = v;
      best_a = a;
    }
  }
  double lo = std::max(0.0, best_a - hi / N), up = best_a + hi / N;
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (up - lo) / 3.0, m2 = up - (up - lo) / 3.0;
    if (f(m1) < f(m2))
      lo = m1;
    else
      up = m2;
  }
  return 2.0 * f(0.5 * (lo + up));
}

GronwallResult gronwall_check(const ScalarField& u0a, const ScalarField& u0b, double T,
                              const ModelProblem& model, const SolverConfig& cfg) {
  Trajectory t1 = solve_mild(u0a, T, model, cfg);
  Trajectory t2 = solve_mild(u0b, T, model, cfg);

  GronwallResult out;
  out.times = t1.times;
  double run_sup = 0.0, first_sup = 0.0;
  for (const auto& u : t1.fields) {
    run_sup = std::max(run_sup, norm_linf(u));
    first_sup = std::max(first_sup, norm_linf(u));
  }
  for (const auto& u : t2.fields) run_sup = std::max(run_sup, norm_linf(u));

  LipschitzConstants lip = lipschitz_constants(model, std::max(run_sup, 1e-6));
  double K = lip.beta_lipschitz +
             2.0 * (model.drift.sup_norm + lip.drift_lipschitz * first_sup);
  double gamma0 = model.nonlinearity.gamma0;
  out.theoretical_constant = 27.0 * std::pow(K, 4.0) / (128.0 * std::pow(gamma0, 3.0));
  out.brute_force_constant = young_closure_constant(K, gamma0);

  out.squared_distance.reserve(t1.times.size());
  for (std::size_t i = 0; i < t1.fields.size(); ++i) {
    double d = neg_sobolev_norm(t1.fields[i] - t2.fields[i], 2);
    out.squared_distance.push_back(d * d);
  }
  const double floor_d = std::pow(1e-13 * (1.0 + norm_l2(u0a) + norm_l2(u0b)), 2);
  out.measured_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < out.squared_distance.size(); ++i) {
    double d0 = out.squared_distance[i], d1 = out.squared_distance[i + 1];
    if (d0 < floor_d || d1 < floor_d) continue;
    double dt = out.times[i + 1] - out.times[i];
    out.measured_slope = std::max(out.measured_slope, (std::log(d1) - std::log(d0)) / dt);
  }
  bool constant_consistent =
      std::abs(out.brute_force_constant - out.theoretical_constant) <=
      1e-6 * std::max(out.theoretical_constant, 1e-300);
  out.pass = constant_consistent && out.measured_slope <= out.theoretical_constant + 1e-9;
  return out;
}

CheckResult l1_contraction_check(const ScalarField& u0a, const ScalarField& u0b, double T,
                                 const ModelProblem& model, const SolverConfig& cfg,
                                 double slack) {
  Trajectory t1 = solve_mild(u0a, T, model, cfg);
  Trajectory t2 = solve_mild(u0b, T, model, cfg);
  double initial_gap = norm_l1(u0a - u0b);
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  for (std::size_t i = 0; i < t1.fields.size(); ++i) {
    double gap = norm_l1(t1.fields[i] - t2.fields[i]);
    if (gap - initial_gap > worst_excess) {
      worst_excess = gap - initial_gap;
      worst_time = t1.times[i];
    }
  }
  CheckResult c{"l1-nonexpansive", worst_excess <= slack, worst_excess, 0.0, slack,
                "initial gap " + fmt(initial_gap) + ", worst excess at t=" + fmt(worst_time)};
  return c;
}

CheckResult barrier_check(const Trajectory& traj, const ModelProblem& model) {
  const double T = traj.times.back();
  int steps = 10 * std::max<int>(1, (int)traj.times.size() - 1);
  EtaTable eta = barrier_eta(norm_linf(traj.fields.front()), T, model, steps);
  double tol = 1e-6 + 10.0 * traj.config.time_step;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  for (std::size_t i = 0; i < traj.fields.size(); ++i) {
    double excess = norm_linf(traj.fields[i]) - eta.at(traj.times[i]);
    if (excess > worst) {
      worst = excess;
      worst_time = traj.times[i];
    }
  }
  CheckResult c{"sup-barrier", worst <= tol, worst, 0.0, tol,
                "barrier end value " + fmt(eta.values.back()) + ", worst excess at t=" +
                    fmt(worst_time)};
  return c;
}

UniquenessResult uniqueness_probe(const ModelProblem& model, double half_width, double T,
                                  const SolverConfig& cfg,
                                  const std::vector<ResolutionLevel>& levels) {
  if (levels.size() < 2) throw std::invalid_argument("need at least two resolution levels");
  int finest = 0;
  for (const auto& lv : levels) finest = std::max(finest, lv.n);
  PeriodicGrid fine_grid(model.dimension, half_width, finest);

  std::vector<ScalarField> finals, lin_finals;
  for (const auto& lv : levels) {
    PeriodicGrid g(model.dimension, half_width, lv.n);
    ScalarField u0 = sample_field(g, model.initial_condition);
    SolverConfig c = cfg;
    c.time_step = lv.time_step;
    Trajectory traj = solve_mild(u0, T, model, c);
    finals.push_back(refine_to(traj.final(), fine_grid));
    FrozenCoefficients coeffs = FrozenCoefficients::from_trajectory(traj, model);
    Trajectory lin = solve_linearized(u0, coeffs, T, c);
    lin_finals.push_back(refine_to(lin.final(), fine_grid));
  }

  UniquenessResult out;
  for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
    out.nonlinear_gaps.push_back(norm_l1(finals[k] - finals[k + 1]));
    out.linearized_gaps.push_back(norm_l1(lin_finals[k] - lin_finals[k + 1]));
  }
  const double floor_gap = 1e-13;
  auto shrinking = [&](const std::vector<double>& gaps) {
    for (std::size_t k = 0; k + 1 < gaps.size(); ++k)
      if (!(gaps[k + 1] < gaps[k] || gaps[k + 1] <= floor_gap)) return false;
    return true;
  };
  bool ok = shrinking(out.nonlinear_gaps) && shrinking(out.linearized_gaps);
  std::string detail = "nonlinear gaps:";
  for (double v : out.nonlinear_gaps) detail += " " + fmt(v);
  detail += "; linearized gaps:";
  for (double v : out.linearized_gaps) detail += " " + fmt(v);
  out.summary = {"refinement-stability", ok, out.nonlinear_gaps.back(),
                 out.nonlinear_gaps.front(), 0.0, detail};
  return out;
}

ConsistencyResult pde_particle_consistency(const ModelProblem& model, double half_width, int n,
                                           double T, double dt,
                                           const std::vector<std::size_t>& particle_counts,
                                           int seeds_per_count, std::uint64_t seed0,
                                           const DensityEstimator& est, double final_cap) {
  if (particle_counts.empty()) throw std::invalid_argument("need particle counts");
  if (seeds_per_count < 1) throw std::invalid_argument("need at least one seed per count");
  PeriodicGrid g(model.dimension, half_width, n);
  ScalarField u0 = sample_field(g, model.initial_condition);
  SolverConfig cfg;
  cfg.time_step = dt;
  Trajectory traj = solve_mild(u0, T, model, cfg);
  const ScalarField& reference = traj.final();

  ConsistencyResult out;
  out.particle_counts = particle_counts;
  for (std::size_t N : particle_counts) {
    double sum = 0.0;
    for (int s = 0; s < seeds_per_count; ++s) {
      std::uint64_t seed = rng::hash(seed0, N, (std::uint64_t)s);
      auto snaps = simulate(u0, T, dt, N, seed, model, est, {T});
      sum += norm_l1(snaps.front().density - reference);
    }
    out.mean_gaps.push_back(sum / seeds_per_count);
  }
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < out.mean_gaps.size(); ++k)
    monotone = monotone && out.mean_gaps[k + 1] <= out.mean_gaps[k];
  bool capped = out.mean_gaps.back() <= final_cap;
  std::string detail = "mean gaps:";
  for (double v : out.mean_gaps) detail += " " + fmt(v);
  out.summary = {"particle-grid-consistency", monotone && capped, out.mean_gaps.back(),
                 final_cap, 0.0, detail};
  return out;
}

}  // namespace fplab

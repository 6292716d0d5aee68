#include "fplab/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fplab/rng.hpp"

namespace fplab {
namespace {

constexpr double kBumpRadius = 2.0;

double bump_scaled(const Vec2& x, int dim) {
  double rr = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
  return bump_profile(std::sqrt(rr) / kBumpRadius);
}

// d/ds of bump_profile, finite and smooth on [0,1), zero outside.
double bump_profile_slope(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double q = 1.0 - s * s;
  return -2.0 * s / (q * q) * bump_profile(s);
}

Vec2 bump_scaled_gradient(const Vec2& x, int dim) {
  double rr = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
  double r = std::sqrt(rr);
  double s = r / kBumpRadius;
  if (s >= 1.0 || r < 1e-300) return {0.0, 0.0};
  double factor = bump_profile_slope(s) / (kBumpRadius * r);
  return {factor * x[0], dim == 2 ? factor * x[1] : 0.0};
}

Nonlinearity linear_nonlinearity() {
  return {[](double r) { return r; }, [](double) { return 1.0; }, 1.0};
}

Nonlinearity cubic_nonlinearity() {
  return {[](double r) { return r + r * r * r; },
          [](double r) { return 1.0 + 3.0 * r * r; }, 1.0};
}

DriftField tanh_bump_drift(int dim) {
  DriftField d;
  d.is_zero = false;
  d.sup_norm = 1.0;
  d.support_radius = kBumpRadius;
  d.separable = true;
  d.profile = [](double r) { return std::tanh(r); };
  d.profile_prime = [](double r) {
    double c = std::cosh(r);
    return 1.0 / (c * c);
  };
  d.spatial = [dim](const Vec2& x) { return Vec2{bump_scaled(x, dim), 0.0}; };
  d.value = [dim](const Vec2& x, double r) {
    return Vec2{std::tanh(r) * bump_scaled(x, dim), 0.0};
  };
  d.r_derivative = [dim](const Vec2& x, double r) {
    double c = std::cosh(r);
    return Vec2{bump_scaled(x, dim) / (c * c), 0.0};
  };
  d.x_jacobian = [dim](const Vec2& x, double r) {
    Vec2 g = bump_scaled_gradient(x, dim);
    Mat2 J{};
    J[0][0] = std::tanh(r) * g[0];
    J[0][1] = std::tanh(r) * g[1];
    return J;
  };
  // The Jacobian has a single nonzero row, so its norm is that row's length,
  // maximized where the bump slope peaks.
  d.local_dispersion = [](double r) {
    return std::abs(std::tanh(r)) * bump_gradient_peak() / kBumpRadius;
  };
  return d;
}

std::function<double(const Vec2&)> gaussian_initial(int dim) {
  if (dim == 1)
    return [](const Vec2& x) {
      return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi);
    };
  return [](const Vec2& x) {
    return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])) / (2.0 * std::numbers::pi);
  };
}

std::vector<Vec2> probe_points(int dim, double radius, int per_axis) {
  std::vector<Vec2> pts;
  auto coord = [&](int i) { return -radius + 2.0 * radius * i / (per_axis - 1); };
  if (dim == 1) {
    pts.reserve(per_axis);
    for (int i = 0; i < per_axis; ++i) pts.push_back({coord(i), 0.0});
  } else {
    pts.reserve((std::size_t)per_axis * per_axis);
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j) pts.push_back({coord(i), coord(j)});
  }
  return pts;
}

double vec_norm(const Vec2& v, int dim) {
  return dim == 1 ? std::abs(v[0]) : std::hypot(v[0], v[1]);
}

}  // namespace

double bump_profile(double s) {
  if (s * s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double bump_gradient_peak() {
  static const double peak = [] {
    double best = 0.0;
    const int n = 2'000'000;
    for (int i = 1; i < n; ++i) {
      double s = (double)i / n;
      best = std::max(best, std::abs(bump_profile_slope(s)));
    }
    return best;
  }();
  return peak;
}

double operator_norm(const Mat2& J, int dim) {
  if (dim == 1) return std::abs(J[0][0]);
  double a = J[0][0] * J[0][0] + J[1][0] * J[1][0];
  double b = J[0][0] * J[0][1] + J[1][0] * J[1][1];
  double c = J[0][1] * J[0][1] + J[1][1] * J[1][1];
  double lam = 0.5 * ((a + c) + std::sqrt((a - c) * (a - c) + 4.0 * b * b));
  return std::sqrt(std::max(lam, 0.0));
}

double phi(const ModelProblem& m, double r) {
  if (std::abs(r) < 1e-8 * (1.0 + std::abs(r))) return m.nonlinearity.beta_prime(0.0);
  return m.nonlinearity.beta(r) / r;
}

double delta_of(const ModelProblem& m, double r) {
  if (m.drift.is_zero) return 0.0;
  if (m.drift.local_dispersion) return m.drift.local_dispersion(r);
  double R = m.drift.support_radius > 0.0 ? m.drift.support_radius : 4.0;
  double worst = 0.0;
  for (const Vec2& x : probe_points(m.dimension, R, 65))
    worst = std::max(worst, operator_norm(m.drift.x_jacobian(x, r), m.dimension));
  return worst;
}

Vec2 drift_velocity(const ModelProblem& m, const Vec2& x, double r) {
  if (m.drift.is_zero) return {0.0, 0.0};
  return m.drift.value(x, r);
}

Vec2 drift_flux(const ModelProblem& m, const Vec2& x, double r) {
  Vec2 b = drift_velocity(m, x, r);
  return {b[0] * r, b[1] * r};
}

LipschitzConstants lipschitz_constants(const ModelProblem& m, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("state bound M must be positive");
  LipschitzConstants out{0.0, 0.0};
  const int nr = 8192;
  for (int i = 0; i <= nr; ++i) {
    double r = -M + 2.0 * M * i / nr;
    out.beta_lipschitz = std::max(out.beta_lipschitz, m.nonlinearity.beta_prime(r));
  }
  if (!m.drift.is_zero) {
    double R = m.drift.support_radius > 0.0 ? m.drift.support_radius : 4.0;
    auto pts = probe_points(m.dimension, R, 33);
    for (int i = 0; i <= 256; ++i) {
      double r = -M + 2.0 * M * i / 256;
      for (const Vec2& x : pts)
        out.drift_lipschitz =
            std::max(out.drift_lipschitz, vec_norm(m.drift.r_derivative(x, r), m.dimension));
    }
  }
  return out;
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

ValidationReport validate_assumptions(const ModelProblem& m, double M, int n_samples) {
  if (!(M > 0.0)) throw std::invalid_argument("state bound M must be positive");
  if (n_samples < 100) throw std::invalid_argument("need at least 100 samples");
  const auto& nl = m.nonlinearity;
  ValidationReport rep;
  auto add = [&](AssumptionCheck c) { rep.checks.push_back(std::move(c)); };

  int nr = n_samples | 1;
  auto r_at = [&](int i) { return -M + 2.0 * M * i / (nr - 1); };

  add({"beta-zero-at-origin", std::abs(nl.beta(0.0)) <= 1e-15, std::abs(nl.beta(0.0)), 1e-15,
       0.0});

  {
    AssumptionCheck c{"beta-prime-floor", true, nl.beta_prime(r_at(0)), nl.gamma0, r_at(0)};
    for (int i = 0; i < nr; ++i) {
      double bp = nl.beta_prime(r_at(i));
      if (bp < c.measured) {
        c.measured = bp;
        c.worst_r = r_at(i);
      }
    }
    c.pass = c.measured >= nl.gamma0 - 1e-12;
    add(c);
  }

  {
    AssumptionCheck c{"beta-monotone-pairs", true, 0.0, 0.0, 0.0};
    double tol = 1e-10 * (1.0 + M * M);
    c.measured = tol;
    for (int i = 0; i < n_samples; ++i) {
      double a = -M + 2.0 * M * rng::uniform(0x5eed, 2 * i);
      double b = -M + 2.0 * M * rng::uniform(0x5eed, 2 * i + 1);
      double dr = a - b;
      double margin = (nl.beta(a) - nl.beta(b)) * dr - nl.gamma0 * dr * dr;
      if (margin < c.measured) {
        c.measured = margin;
        c.worst_r = a;
      }
    }
    c.pass = c.measured >= -tol;
    add(c);
  }

  {
    AssumptionCheck c{"beta-prime-matches-difference-quotient", true, 0.0, 1e-5, 0.0};
    for (int i = 0; i < 129; ++i) {
      double r = -M + 2.0 * M * i / 128;
      double e = 1e-6 * (1.0 + std::abs(r));
      double fd = (nl.beta(r + e) - nl.beta(r - e)) / (2.0 * e);
      double rel = std::abs(fd - nl.beta_prime(r)) / (1.0 + std::abs(nl.beta_prime(r)));
      if (rel > c.measured) {
        c.measured = rel;
        c.worst_r = r;
      }
    }
    c.pass = c.measured <= c.bound;
    add(c);
  }

  {
    AssumptionCheck c{"diffusion-ratio-floor", true, phi(m, r_at(0)), nl.gamma0, r_at(0)};
    for (int i = 0; i < nr; ++i) {
      double p = phi(m, r_at(i));
      if (p < c.measured) {
        c.measured = p;
        c.worst_r = r_at(i);
      }
    }
    c.pass = c.measured >= nl.gamma0 - 1e-12;
    add(c);
  }

  {
    AssumptionCheck c{"diffusion-ratio-continuity", true, 0.0, 0.0, 0.0};
    c.bound = 1e-4 * (1.0 + std::abs(nl.beta_prime(0.0)));
    for (double r : {1e-7, -1e-7, 1e-6, -1e-6}) {
      double gap = std::abs(nl.beta(r) / r - nl.beta_prime(0.0));
      if (gap > c.measured) {
        c.measured = gap;
        c.worst_r = r;
      }
    }
    c.pass = c.measured <= c.bound;
    add(c);
  }

  if (!m.drift.is_zero) {
    const auto& d = m.drift;
    double R = d.support_radius > 0.0 ? d.support_radius * 1.1 : 4.0;
    auto pts = probe_points(m.dimension, R, m.dimension == 1 ? 65 : 17);
    auto r_sub = [&](int i) { return -M + 2.0 * M * i / 64; };

    {
      AssumptionCheck c{"drift-vanishes-at-zero-state", true, 0.0, 1e-15, 0.0};
      for (const Vec2& x : pts) {
        double v = vec_norm(d.value(x, 0.0), m.dimension);
        if (v > c.measured) {
          c.measured = v;
          c.worst_x = x;
        }
      }
      c.pass = c.measured <= c.bound;
      add(c);
    }

    {
      AssumptionCheck c{"drift-sup-bound", true, 0.0, d.sup_norm, 0.0};
      for (int i = 0; i <= 64; ++i)
        for (const Vec2& x : pts) {
          double v = vec_norm(d.value(x, r_sub(i)), m.dimension);
          if (v > c.measured) {
            c.measured = v;
            c.worst_r = r_sub(i);
            c.worst_x = x;
          }
        }
      c.pass = c.measured <= d.sup_norm + 1e-12;
      add(c);
    }

    {
      AssumptionCheck c{"drift-r-derivative-matches-quotient", true, 0.0, 1e-5, 0.0};
      for (int i = 0; i <= 16; ++i)
        for (const Vec2& x : pts) {
          double r = r_sub(4 * i);
          double e = 1e-6 * (1.0 + std::abs(r));
          Vec2 hi = d.value(x, r + e), lo = d.value(x, r - e), dr = d.r_derivative(x, r);
          Vec2 err{(hi[0] - lo[0]) / (2.0 * e) - dr[0], (hi[1] - lo[1]) / (2.0 * e) - dr[1]};
          double rel = vec_norm(err, m.dimension) / (1.0 + vec_norm(dr, m.dimension));
          if (rel > c.measured) {
            c.measured = rel;
            c.worst_r = r;
            c.worst_x = x;
          }
        }
      c.pass = c.measured <= c.bound;
      add(c);
    }

    {
      AssumptionCheck c{"drift-jacobian-matches-quotient", true, 0.0, 1e-4, 0.0};
      for (int i = 0; i <= 8; ++i)
        for (const Vec2& x : pts) {
          double r = r_sub(8 * i);
          Mat2 J = d.x_jacobian(x, r);
          for (int axis = 0; axis < m.dimension; ++axis) {
            double e = 1e-6;
            Vec2 xp = x, xm = x;
            xp[axis] += e;
            xm[axis] -= e;
            Vec2 hi = d.value(xp, r), lo = d.value(xm, r);
            Vec2 err{(hi[0] - lo[0]) / (2.0 * e) - J[0][axis],
                     (hi[1] - lo[1]) / (2.0 * e) - J[1][axis]};
            double rel = vec_norm(err, m.dimension) / (1.0 + operator_norm(J, m.dimension));
            if (rel > c.measured) {
              c.measured = rel;
              c.worst_r = r;
              c.worst_x = x;
            }
          }
        }
      c.pass = c.measured <= c.bound;
      add(c);
    }

    {
      AssumptionCheck c{"dispersion-dominates-jacobian", true, 0.0, 0.0, 0.0};
      double worst = 1e300;
      for (int i = 0; i <= 64; ++i)
        for (const Vec2& x : pts) {
          double r = r_sub(i);
          double margin = delta_of(m, r) - operator_norm(d.x_jacobian(x, r), m.dimension);
          if (margin < worst) {
            worst = margin;
            c.worst_r = r;
            c.worst_x = x;
          }
        }
      c.measured = worst;
      c.pass = worst >= -1e-10;
      add(c);
    }

    if (d.separable) {
      AssumptionCheck c{"drift-separable-consistency", true, 0.0, 1e-13, 0.0};
      for (int i = 0; i <= 16; ++i)
        for (const Vec2& x : pts) {
          double r = r_sub(4 * i);
          Vec2 b = d.value(x, r), s = d.spatial(x);
          double p = d.profile(r);
          Vec2 err{b[0] - p * s[0], b[1] - p * s[1]};
          double gap = vec_norm(err, m.dimension);
          if (gap > c.measured) {
            c.measured = gap;
            c.worst_r = r;
            c.worst_x = x;
          }
        }
      c.pass = c.measured <= c.bound;
      add(c);
    }
  }

  if (m.initial_condition) {
    AssumptionCheck c{"initial-data-admissible", true, 0.0, m.initial_sup, 0.0};
    double lo = 0.0, hi = 0.0;
    for (const Vec2& x : probe_points(m.dimension, 8.0, m.dimension == 1 ? 257 : 33)) {
      double v = m.initial_condition(x);
      if (v > hi) {
        hi = v;
        c.worst_x = x;
      }
      lo = std::min(lo, v);
    }
    c.measured = hi;
    c.pass = lo >= -1e-12 && hi <= m.initial_sup * (1.0 + 1e-9);
    add(c);
  }

  return rep;
}

std::vector<std::string> model_registry() {
  return {"LINEAR", "CUBIC", "LINEAR-DRIFT", "CUBIC-DRIFT"};
}

ModelProblem make_model(const std::string& name, int dimension) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("model dimension must be 1 or 2");
  ModelProblem m;
  m.name = name;
  m.dimension = dimension;
  m.initial_condition = gaussian_initial(dimension);
  m.initial_sup = dimension == 1 ? 1.0 / std::sqrt(2.0 * std::numbers::pi)
                                 : 1.0 / (2.0 * std::numbers::pi);
  if (name == "LINEAR") {
    m.nonlinearity = linear_nonlinearity();
  } else if (name == "CUBIC") {
    m.nonlinearity = cubic_nonlinearity();
  } else if (name == "LINEAR-DRIFT") {
    m.nonlinearity = linear_nonlinearity();
    m.drift = tanh_bump_drift(dimension);
  } else if (name == "CUBIC-DRIFT") {
    m.nonlinearity = cubic_nonlinearity();
    m.drift = tanh_bump_drift(dimension);
  } else {
    throw std::invalid_argument("unknown model: " + name);
  }
  return m;
}

}  // namespace fplab

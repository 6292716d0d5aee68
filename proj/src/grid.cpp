#include "fplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "fplab/rng.hpp"
#include "fplab/spectral.hpp"

namespace fplab {
namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Calls fn(flat_index, kappa0, kappa1, nyquist0, nyquist1) for every mode.
template <class F>
void for_each_mode(const PeriodicGrid& g, F&& fn) {
  const double base = std::numbers::pi / g.half_width;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      int m = detail::fold_mode(i, g.n);
      fn((std::size_t)i, base * m, 0.0, m == -g.n / 2, false);
    }
  } else {
    for (int i0 = 0; i0 < g.n; ++i0) {
      int m0 = detail::fold_mode(i0, g.n);
      for (int i1 = 0; i1 < g.n; ++i1) {
        int m1 = detail::fold_mode(i1, g.n);
        fn((std::size_t)i0 * g.n + i1, base * m0, base * m1, m0 == -g.n / 2, m1 == -g.n / 2);
      }
    }
  }
}

}  // namespace

PeriodicGrid::PeriodicGrid(int dim_, double half_width_, int n_)
    : dim(dim_), n(n_), half_width(half_width_) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (!(half_width > 0.0)) throw std::invalid_argument("grid half width must be positive");
  if (n < 16 || !power_of_two(n))
    throw std::invalid_argument("grid size must be a power of two and at least 16");
}

std::size_t PeriodicGrid::size() const { return dim == 1 ? (std::size_t)n : (std::size_t)n * n; }

double PeriodicGrid::cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }

double PeriodicGrid::box_volume() const {
  double side = 2.0 * half_width;
  return dim == 1 ? side : side * side;
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("fields live on different grids");
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField r = a;
  return r += b;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  ScalarField r = a;
  return r -= b;
}

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField r = a;
  return r *= s;
}

ScalarField& operator+=(ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
  return a;
}

ScalarField& operator-=(ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= b.values[i];
  return a;
}

ScalarField& operator*=(ScalarField& a, double s) {
  for (double& v : a.values) v *= s;
  return a;
}

ScalarField sample_field(const PeriodicGrid& g, const std::function<double(const Vec2&)>& f) {
  ScalarField out(g);
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) out.values[i] = f({g.coord(i), 0.0});
  } else {
    for (int i0 = 0; i0 < g.n; ++i0)
      for (int i1 = 0; i1 < g.n; ++i1) out.at(i0, i1) = f({g.coord(i0), g.coord(i1)});
  }
  return out;
}

double mass(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double norm_l1(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += std::abs(v);
  return s * f.grid.cell_volume();
}

double norm_l2(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.cell_volume());
}

double norm_linf(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s = std::max(s, std::abs(v));
  return s;
}

double inner_product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * g.values[i];
  return s * f.grid.cell_volume();
}

std::vector<std::complex<double>> spectrum(const ScalarField& f) {
  std::vector<std::complex<double>> spec(f.values.begin(), f.values.end());
  detail::dft_forward(f.grid.dim, f.grid.n, spec.data());
  const double scale = f.grid.cell_volume();
  for (auto& c : spec) c *= scale;
  return spec;
}

ScalarField field_from_spectrum(const PeriodicGrid& g, std::vector<std::complex<double>> spec) {
  if (spec.size() != g.size()) throw std::invalid_argument("spectrum size does not match grid");
  detail::dft_backward(g.dim, g.n, spec.data());
  ScalarField out(g);
  const double scale = 1.0 / g.box_volume();
  for (std::size_t i = 0; i < spec.size(); ++i) out.values[i] = spec[i].real() * scale;
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  auto spec = spectrum(f);
  for_each_mode(f.grid, [&](std::size_t i, double k0, double k1, bool, bool) {
    spec[i] *= -(k0 * k0 + k1 * k1);
  });
  return field_from_spectrum(f.grid, std::move(spec));
}

VectorField gradient(const ScalarField& f) {
  auto spec = spectrum(f);
  VectorField out(f.grid);
  for (int a = 0; a < f.grid.dim; ++a) {
    auto comp = spec;
    for_each_mode(f.grid, [&](std::size_t i, double k0, double k1, bool ny0, bool ny1) {
      double k = a == 0 ? (ny0 ? 0.0 : k0) : (ny1 ? 0.0 : k1);
      comp[i] *= std::complex<double>(0.0, k);
    });
    out.comps[a] = field_from_spectrum(f.grid, std::move(comp));
  }
  return out;
}

ScalarField divergence(const VectorField& F) {
  if ((int)F.comps.size() != F.grid.dim)
    throw std::invalid_argument("vector field has wrong component count");
  std::vector<std::complex<double>> acc(F.grid.size(), 0.0);
  for (int a = 0; a < F.grid.dim; ++a) {
    if (!(F.comps[a].grid == F.grid))
      throw std::invalid_argument("vector component lives on a different grid");
    auto spec = spectrum(F.comps[a]);
    for_each_mode(F.grid, [&](std::size_t i, double k0, double k1, bool ny0, bool ny1) {
      double k = a == 0 ? (ny0 ? 0.0 : k0) : (ny1 ? 0.0 : k1);
      acc[i] += std::complex<double>(0.0, k) * spec[i];
    });
  }
  return field_from_spectrum(F.grid, std::move(acc));
}

ScalarField apply_gamma(const ScalarField& f, int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("resolvent power must be 1 or 2");
  auto spec = spectrum(f);
  for_each_mode(f.grid, [&](std::size_t i, double k0, double k1, bool, bool) {
    double denom = 1.0 + k0 * k0 + k1 * k1;
    spec[i] /= k == 1 ? denom : denom * denom;
  });
  return field_from_spectrum(f.grid, std::move(spec));
}

double neg_sobolev_norm(const ScalarField& f, int k) {
  if (k < 0 || k > 2) throw std::invalid_argument("dual norm order must be 0, 1 or 2");
  auto spec = spectrum(f);
  double s = 0.0;
  for_each_mode(f.grid, [&](std::size_t i, double k0, double k1, bool, bool) {
    double denom = 1.0 + k0 * k0 + k1 * k1;
    double w = k == 0 ? 1.0 : (k == 1 ? denom : denom * denom);
    s += std::norm(spec[i]) / w;
  });
  return std::sqrt(s / f.grid.box_volume());
}

bool InequalityReport::all_hold(double slack) const {
  double cap = 1.0 + slack;
  return gamma_ratio <= cap && divergence_ratio <= cap && interpolation_ratio <= cap;
}

InequalityReport check_inequalities(const ScalarField& f) {
  return check_inequalities(f, gradient(f));
}

InequalityReport check_inequalities(const ScalarField& f, const VectorField& F) {
  InequalityReport rep{};
  double l2 = norm_l2(f);
  double hm1 = neg_sobolev_norm(f, 1);
  double hm2 = neg_sobolev_norm(f, 2);
  rep.gamma_ratio = l2 > 0.0 ? hm1 / l2 : 0.0;
  double interp = std::sqrt(l2 * hm2);
  rep.interpolation_ratio = interp > 0.0 ? hm1 / interp : 0.0;
  double fl2 = 0.0;
  for (const auto& c : F.comps) fl2 += norm_l2(c) * norm_l2(c);
  fl2 = std::sqrt(fl2);
  double divn = neg_sobolev_norm(divergence(F), 1);
  rep.divergence_ratio = fl2 > 0.0 ? divn / (2.0 * fl2) : 0.0;
  return rep;
}

double interpolate(const ScalarField& f, const Vec2& x) {
  const PeriodicGrid& g = f.grid;
  int idx[2] = {0, 0};
  double w[2] = {0.0, 0.0};
  for (int a = 0; a < g.dim; ++a) {
    double s = (x[a] + g.half_width) / g.dx();
    s -= std::floor(s / g.n) * g.n;
    if (!(s >= 0.0) || s >= g.n) s = 0.0;
    idx[a] = (int)s;
    if (idx[a] >= g.n) idx[a] = g.n - 1;
    w[a] = s - idx[a];
  }
  if (g.dim == 1) {
    int i = idx[0], j = (idx[0] + 1) % g.n;
    return (1.0 - w[0]) * f.values[i] + w[0] * f.values[j];
  }
  int i0 = idx[0], j0 = (idx[0] + 1) % g.n;
  int i1 = idx[1], j1 = (idx[1] + 1) % g.n;
  return (1.0 - w[0]) * ((1.0 - w[1]) * f.at(i0, i1) + w[1] * f.at(i0, j1)) +
         w[0] * ((1.0 - w[1]) * f.at(j0, i1) + w[1] * f.at(j0, j1));
}

ScalarField refine_to(const ScalarField& f, const PeriodicGrid& finer) {
  const PeriodicGrid& g = f.grid;
  if (finer.dim != g.dim || finer.half_width != g.half_width || finer.n < g.n)
    throw std::invalid_argument("refinement target must share the box and not be coarser");
  if (finer.n == g.n) return f;
  auto coarse = spectrum(f);
  std::vector<std::complex<double>> fine(finer.size(), 0.0);
  // Signed mode -> FFT index on the fine grid.
  auto fidx = [&](int m) { return m >= 0 ? m : m + finer.n; };
  auto place = [&](int m0, int m1, std::complex<double> c) {
    std::size_t i = g.dim == 1 ? (std::size_t)fidx(m0) : (std::size_t)fidx(m0) * finer.n + fidx(m1);
    fine[i] += c;
  };
  const int ny = g.n / 2;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      int m = detail::fold_mode(i, g.n);
      if (m == -ny) {
        // The coarse Nyquist coefficient splits evenly over +-n/2 so the
        // refined field is real and matches at coarse nodes.
        place(ny, 0, 0.5 * coarse[i]);
        place(-ny, 0, 0.5 * coarse[i]);
      } else {
        place(m, 0, coarse[i]);
      }
    }
  } else {
    for (int i0 = 0; i0 < g.n; ++i0) {
      int m0 = detail::fold_mode(i0, g.n);
      for (int i1 = 0; i1 < g.n; ++i1) {
        int m1 = detail::fold_mode(i1, g.n);
        std::complex<double> c = coarse[(std::size_t)i0 * g.n + i1];
        auto axis_modes = [&](int m) {
          return m == -ny ? std::vector<std::pair<int, double>>{{ny, 0.5}, {-ny, 0.5}}
                          : std::vector<std::pair<int, double>>{{m, 1.0}};
        };
        for (auto [a0, w0] : axis_modes(m0))
          for (auto [a1, w1] : axis_modes(m1)) place(a0, a1, w0 * w1 * c);
      }
    }
  }
  return field_from_spectrum(finer, std::move(fine));
}

ScalarField synthesize_random_field(const PeriodicGrid& g, std::uint64_t seed, int max_mode,
                                    double amplitude) {
  if (max_mode < 0 || max_mode > g.n / 2 - 1)
    throw std::invalid_argument("band limit must lie within representable modes");
  std::vector<std::complex<double>> spec(g.size(), 0.0);
  auto sidx = [&](int m0, int m1) {
    auto wrap = [&](int m) { return m >= 0 ? m : m + g.n; };
    return g.dim == 1 ? (std::size_t)wrap(m0) : (std::size_t)wrap(m0) * g.n + wrap(m1);
  };
  const int b1 = g.dim == 2 ? max_mode : 0;
  for (int m0 = -max_mode; m0 <= max_mode; ++m0) {
    for (int m1 = -b1; m1 <= b1; ++m1) {
      bool canonical = m0 > 0 || (m0 == 0 && m1 >= 0);
      if (!canonical) continue;
      double decay = 1.0 / (1.0 + m0 * m0 + m1 * m1);
      std::uint64_t u = (std::uint64_t)(m0 + 32768), v = (std::uint64_t)(m1 + 32768);
      double re = rng::normal(seed, u, v, 0) * decay;
      double im = rng::normal(seed, u, v, 1) * decay;
      if (m0 == 0 && m1 == 0) im = 0.0;  // keep the mean real
      spec[sidx(m0, m1)] += std::complex<double>(re, im);
      if (!(m0 == 0 && m1 == 0)) spec[sidx(-m0, -m1)] += std::complex<double>(re, -im);
    }
  }
  ScalarField out = field_from_spectrum(g, std::move(spec));
  double peak = norm_linf(out);
  if (peak > 0.0) out *= amplitude / peak;
  return out;
}

void write_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  std::uint32_t dim = (std::uint32_t)f.grid.dim, n = (std::uint32_t)f.grid.n;
  double L = f.grid.half_width;
  os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&L), sizeof L);
  os.write(reinterpret_cast<const char*>(f.values.data()),
           (std::streamsize)(f.values.size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed: " + path);
}

ScalarField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::uint32_t dim = 0, n = 0;
  double L = 0.0;
  is.read(reinterpret_cast<char*>(&dim), sizeof dim);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&L), sizeof L);
  if (!is) throw std::runtime_error("truncated field header: " + path);
  ScalarField f{PeriodicGrid((int)dim, L, (int)n)};
  is.read(reinterpret_cast<char*>(f.values.data()),
          (std::streamsize)(f.values.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated field payload: " + path);
  return f;
}

void write_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.precision(17);
  const PeriodicGrid& g = f.grid;
  if (g.dim == 1) {
    os << "x0,value\n";
    for (int i = 0; i < g.n; ++i) os << g.coord(i) << ',' << f.values[i] << '\n';
  } else {
    os << "x0,x1,value\n";
    for (int i0 = 0; i0 < g.n; ++i0)
      for (int i1 = 0; i1 < g.n; ++i1)
        os << g.coord(i0) << ',' << g.coord(i1) << ',' << f.at(i0, i1) << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace fplab

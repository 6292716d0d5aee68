#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fplab {

// Spatial point or vector; the second component is unused in one dimension.
using Vec2 = std::array<double, 2>;

/**
 * Uniform periodic grid on [-L, L)^dim with n nodes per axis.
 *
 * Frequencies are kappa = pi*m/L for integer m in [-n/2, n/2).  Forward
 * transforms are scaled by dx^dim so the zero mode equals the integral of
 * the field; with that convention Parseval reads
 *   |f|_2^2 = sum_m |c_m|^2 / (2L)^dim.
 */
struct PeriodicGrid {
  int dim = 1;
  int n = 0;
  double half_width = 0.0;

  PeriodicGrid() = default;
  PeriodicGrid(int dim, double half_width, int n);

  double dx() const { return 2.0 * half_width / n; }
  std::size_t size() const;
  double cell_volume() const;
  double box_volume() const;
  // Node coordinate along one axis.
  double coord(int i) const { return -half_width + i * dx(); }

  bool operator==(const PeriodicGrid&) const = default;
};

struct ScalarField {
  PeriodicGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}

  double& at(int i0, int i1 = 0) { return values[flat(i0, i1)]; }
  double at(int i0, int i1 = 0) const { return values[flat(i0, i1)]; }
  std::size_t flat(int i0, int i1) const {
    return grid.dim == 1 ? (std::size_t)i0 : (std::size_t)i0 * grid.n + i1;
  }
};

// One scalar component per spatial axis.
struct VectorField {
  PeriodicGrid grid;
  std::vector<ScalarField> comps;

  VectorField() = default;
  explicit VectorField(const PeriodicGrid& g) : grid(g), comps(g.dim, ScalarField(g)) {}
};

void require_same_grid(const ScalarField& a, const ScalarField& b);

// Pointwise arithmetic.  Operands must share a grid.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
ScalarField& operator+=(ScalarField& a, const ScalarField& b);
ScalarField& operator-=(ScalarField& a, const ScalarField& b);
ScalarField& operator*=(ScalarField& a, double s);

ScalarField sample_field(const PeriodicGrid& g, const std::function<double(const Vec2&)>& f);

// Integral, L^p norms and the discrete L^2 pairing <f,g> = sum f*g*dx^dim.
double mass(const ScalarField& f);
double norm_l1(const ScalarField& f);
double norm_l2(const ScalarField& f);
double norm_linf(const ScalarField& f);
double inner_product(const ScalarField& f, const ScalarField& g);

// Fourier coefficients c_m (forward transform times dx^dim), FFT mode order.
std::vector<std::complex<double>> spectrum(const ScalarField& f);
// Inverse of spectrum(); imaginary parts are discarded.
ScalarField field_from_spectrum(const PeriodicGrid& g, std::vector<std::complex<double>> spec);

/**
 * Spectral derivatives.  gradient and divergence zero the Nyquist mode so
 * that derivatives of real fields stay real and odd; laplacian and the
 * resolvent keep the full frequency square so that (I - lap) o gamma is the
 * identity on every representable field.  On fields band-limited below the
 * Nyquist frequency the composition divergence(gradient(f)) equals
 * laplacian(f) to rounding error.
 */
ScalarField laplacian(const ScalarField& f);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& F);

// gamma^k f where gamma = (I - laplacian)^{-1}; k in {1, 2}.
ScalarField apply_gamma(const ScalarField& f, int k);

// Dual Sobolev norm |f|_{-k}^2 = sum_m |c_m|^2 / ((2L)^dim (1+|kappa|^2)^k);
// k = 0 reproduces the L^2 norm exactly.
double neg_sobolev_norm(const ScalarField& f, int k);

struct InequalityReport {
  double gamma_ratio;          // |f|_{-1} / |f|_2, bounded by 1
  double divergence_ratio;     // |div F|_{-1} / (2 |F|_2), bounded by 1
  double interpolation_ratio;  // |f|_{-1} / (|f|_2^{1/2} |f|_{-2}^{1/2}), bounded by 1
  bool all_hold(double slack = 1e-12) const;
};
// Evaluates the three norm inequalities on f and F (F defaults to grad f).
InequalityReport check_inequalities(const ScalarField& f);
InequalityReport check_inequalities(const ScalarField& f, const VectorField& F);

// Periodic multilinear interpolation at an arbitrary point.
double interpolate(const ScalarField& f, const Vec2& x);

// Exact spectral refinement onto a finer grid with the same box.
ScalarField refine_to(const ScalarField& f, const PeriodicGrid& finer);

// Smooth band-limited field with deterministic pseudo-random coefficients,
// scaled so max|f| = amplitude.  Modes above max_mode per axis are zero.
ScalarField synthesize_random_field(const PeriodicGrid& g, std::uint64_t seed, int max_mode,
                                    double amplitude);

// Raw binary snapshot: header (dim u32, n u32, L f64, all little-endian)
// followed by the row-major node values as f64.
void write_field(const std::string& path, const ScalarField& f);
ScalarField read_field(const std::string& path);

// Plain-text table: one node per row, coordinates then value, 17 significant
// digits.  Columns: x0[,x1],value.
void write_field_csv(const std::string& path, const ScalarField& f);

}  // namespace fplab

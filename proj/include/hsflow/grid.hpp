#ifndef HSFLOW_GRID_HPP
#define HSFLOW_GRID_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hs {

using cplx = std::complex<double>;

constexpr double kPi     = 3.14159265358979323846;
constexpr double kTwoPi  = 2.0 * kPi;
constexpr double kFourPi = 4.0 * kPi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_abs2(cplx z) { return std::log(std::norm(z)); }

/// Node-centered uniform grid over the box
/// [x0, x0+(nx-1)h] x [y0, y0+(ny-1)h], row-major storage.
struct Grid {
  double x0 = 0.0, y0 = 0.0;
  double h  = 1.0;
  int nx = 0, ny = 0;
  int i0 = -1, j0 = -1;   // injection node (optional)

  /// Square grid of n x n nodes spanning roughly [-half, half]^2, shifted by
  /// at most h/2 so the injection point lands exactly on a node.
  static Grid square(double half, int n, cplx injection = {0.0, 0.0}) {
    Grid g;
    g.h  = 2.0 * half / (n - 1);
    g.nx = g.ny = n;
    g.i0 = (int)std::lround((injection.real() + half) / g.h);
    g.j0 = (int)std::lround((injection.imag() + half) / g.h);
    g.i0 = std::clamp(g.i0, 1, n - 2);
    g.j0 = std::clamp(g.j0, 1, n - 2);
    g.x0 = injection.real() - g.i0 * g.h;
    g.y0 = injection.imag() - g.j0 * g.h;
    return g;
  }

  int size() const { return nx * ny; }
  int idx(int i, int j) const { return j * nx + i; }
  cplx node(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
  cplx node(int k) const { return node(k % nx, k / nx); }
  cplx injection_point() const { return node(i0, j0); }
  double xmax() const { return x0 + (nx - 1) * h; }
  double ymax() const { return y0 + (ny - 1) * h; }

  bool on_frame(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  bool contains(cplx z, double margin = 0.0) const {
    return z.real() >= x0 + margin && z.real() <= xmax() - margin &&
           z.imag() >= y0 + margin && z.imag() <= ymax() - margin;
  }
  bool in_injection_patch(int i, int j, int radius = 1) const {
    return std::abs(i - i0) <= radius && std::abs(j - j0) <= radius;
  }
};

/// Scalar samples on a Grid.
struct Field {
  Grid g;
  std::vector<double> a;

  Field() = default;
  explicit Field(const Grid& grid, double fill = 0.0) : g(grid), a((size_t)grid.size(), fill) {}

  double& at(int i, int j) { return a[(size_t)g.idx(i, j)]; }
  double  at(int i, int j) const { return a[(size_t)g.idx(i, j)]; }
  double& operator[](int k) { return a[(size_t)k]; }
  double  operator[](int k) const { return a[(size_t)k]; }

  /// Bilinear interpolation, clamped to the grid box.
  double bilinear(cplx z) const {
    double fx = (z.real() - g.x0) / g.h;
    double fy = (z.imag() - g.y0) / g.h;
    fx = std::clamp(fx, 0.0, (double)(g.nx - 1));
    fy = std::clamp(fy, 0.0, (double)(g.ny - 1));
    int i = std::min((int)fx, g.nx - 2);
    int j = std::min((int)fy, g.ny - 2);
    double sx = fx - i, sy = fy - j;
    return (1 - sx) * (1 - sy) * at(i, j) + sx * (1 - sy) * at(i + 1, j) +
           (1 - sx) * sy * at(i, j + 1) + sx * sy * at(i + 1, j + 1);
  }

  /// Unscaled 5-point stencil sum(neighbors) - 4*center; interior nodes only.
  double lap5(int i, int j) const {
    return at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j);
  }
  double d2x(int i, int j) const { return at(i - 1, j) + at(i + 1, j) - 2.0 * at(i, j); }
  double d2y(int i, int j) const { return at(i, j - 1) + at(i, j + 1) - 2.0 * at(i, j); }

  double max_abs() const {
    double m = 0.0;
    for (double v : a)
      if (std::isfinite(v)) m = std::max(m, std::abs(v));
    return m;
  }
};

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v((size_t)n);
  for (int k = 0; k < n; ++k) v[(size_t)k] = a + (b - a) * k / (n - 1);
  return v;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n, s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace hs

#endif

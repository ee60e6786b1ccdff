#ifndef HSFLOW_FLOW_HPP
#define HSFLOW_FLOW_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "hsflow/obstacle.hpp"

namespace hs {

using DensityFn = std::function<double(cplx)>;

/// Weak flow domain at one time: node mask of {psi < -eps}, contour loops,
/// weighted area and pixel topology (4-connected mask, 8-connected complement).
struct FlowDomain {
  double t = 0.0;
  Grid grid;
  std::vector<uint8_t> mask;
  std::vector<std::vector<cplx>> loops;
  double area_omega = 0.0;
  double perimeter = 0.0;
  int components = 0;
  int holes = 0;
  cplx z0;

  bool in_mask(int i, int j) const { return mask[(size_t)grid.idx(i, j)] != 0; }
};

/// Marching-squares contours of f = level (inside means f < level).
std::vector<std::vector<cplx>> contour_loops(const Field& f, double level);

FlowDomain extract_domain(const EnvelopeField& field, const DensityFn& rho, double eps_mask);

struct NestingReport {
  bool nested = true;
  int violations = 0;
  double min_delta = 0.0;  // largest delta with Omega_t + B_{delta*dt} inside the next domain
};
NestingReport nesting_check(const std::vector<FlowDomain>& domains);

/// Complex moments M_k = sum over the mask of z^k rho h^2, k = 0..K.
std::vector<cplx> moments(const FlowDomain& dom, const DensityFn& rho, int K);

/// Log-kernel potential: -int_domain ln|z-w|^2 rho dA + t ln|z-z0|^2.
/// The cell containing z is integrated exactly; other cells midpoint rule.
double gustafsson_potential(const FlowDomain& dom, const DensityFn& rho, cplx z);

/// Max over exterior sample points of |int ln|z-w|^2 rho dA - t ln|z-z0|^2|.
/// Samples inside the mask are skipped (returned count reports them).
struct QuadratureIdentityReport {
  double max_deviation = 0.0;
  int used = 0, skipped = 0;
};
QuadratureIdentityReport quadrature_identity_check(const FlowDomain& dom, const DensityFn& rho,
                                                   const std::vector<cplx>& samples);

/// Per node, first time the envelope stack drops below -eps, bisected on the
/// concave-in-t interpolant between bracketing samples; capped at ts.back().
Field arrival_direct(const EnvelopeStack& stack, double eps_mask, int bisect_depth = 20);

/// Exact integral of ln((x-a)^2 + (y-b)^2) over a grid cell centered at c.
double log_kernel_cell_integral(cplx z, cplx cell_center, double h);

struct MeasureIdentityReport {
  double max_interior = 0.0;  // | rho + lap(psi)/4pi | on the eroded mask
  double max_exterior = 0.0;  // | lap(psi)/4pi | on the eroded complement
};
MeasureIdentityReport measure_identity(const EnvelopeField& field, const DensityFn& rho,
                                       double eps_mask);

/// Area of the contour band |psi + eps| < band (boundary thinness proxy).
double band_area(const EnvelopeField& field, double eps_mask, double band);

}  // namespace hs

#endif

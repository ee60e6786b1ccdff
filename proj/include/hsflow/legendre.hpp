#ifndef HSFLOW_LEGENDRE_HPP
#define HSFLOW_LEGENDRE_HPP

#include <vector>

#include "hsflow/flow.hpp"
#include "hsflow/obstacle.hpp"

namespace hs {

/// Per-node upper envelope of the support lines s -> psi_t(z) + (t-1)s over
/// the sampled times, reduced to its convex hull.  The function of s is the
/// weak solution slice s -> Phi(z, e^{-s/2}); it is convex, piecewise linear,
/// with slopes in [-1, 0] that never decrease.  Evaluation at a kink follows
/// the right-derivative convention.
class SupportFan {
 public:
  static SupportFan build(const EnvelopeStack& stack);

  const Grid& grid() const { return grid_; }
  int line_count(int node) const { return offs_[(size_t)node + 1] - offs_[(size_t)node]; }

  double value(int node, double s) const;
  double right_slope(int node, double s) const;
  double inverse_at(int node, double t) const;  // inf_{s>=0} fan(s) + (1-t)s

  /// Index (into this node's hull) of the line active at s+.
  int active_line(int node, double s) const;
  double line_slope(int node, int l) const { return slope_[(size_t)(offs_[(size_t)node] + l)]; }
  double line_intercept(int node, int l) const { return icpt_[(size_t)(offs_[(size_t)node] + l)]; }
  double line_time(int node, int l) const { return tval_[(size_t)(offs_[(size_t)node] + l)]; }

  Field slice(double s) const;           // Phi(., e^{-s/2})
  Field hamiltonian(double s) const;     // right slope field
  Field arrival() const;                 // H(., 1) + 1
  Field inverse_field(double t) const;

  /// Bilinear-in-z evaluation of the slice at an off-grid point.
  double value_interp(cplx z, double s) const;

 private:
  Grid grid_;
  std::vector<int> offs_;
  std::vector<double> slope_, icpt_, tval_, bkpt_;
};

struct MaResidualReport {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double max_flat = 0.0;  // restricted to nodes where the fan is a single flat line
};
/// Discrete mixed-Hessian determinant of the solution on (z, s) space,
/// expected to vanish: (pi rho + lap_z u / 4) u_ss - |grad_z u_s|^2 / 4.
MaResidualReport ma_residual(const SupportFan& fan, const DensityFn& rho,
                             const std::vector<double>& s_values, double ds = 0.05);

struct HModulusReport {
  double max_step[3] = {0, 0, 0};  // max |dH| at node distances h, 2h, 4h
  double lipschitz = 0.0;
  std::vector<std::pair<int, int>> flags;  // adjacent pairs with |dH| above threshold
};
HModulusReport h_modulus(const Field& arrival, double flag_threshold = 0.1);

/// Pullback boundary data for the rotation family on the sphere with the
/// Fubini-Study background: phi_tau(z) = ln(1+|tau z|^2) - ln(1+|z|^2) - c(|tau|),
/// normalized to zero mean against the background form.
struct TwistedBoundaryData {
  int quad_panels = 2000;
  double c_of_r(double r) const;          // numeric quadrature
  double phi(cplx z, cplx tau) const;
};

/// Disc-problem solution values: Phi(z, tau) = fan(tau z, s(tau)) + phi(z,tau) - ln|tau|^2.
Field twist_to_disc(const SupportFan& fan, const TwistedBoundaryData& data, cplx tau);

}  // namespace hs

#endif

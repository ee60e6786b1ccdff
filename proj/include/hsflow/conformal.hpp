#ifndef HSFLOW_CONFORMAL_HPP
#define HSFLOW_CONFORMAL_HPP

#include <vector>

#include "hsflow/flow.hpp"
#include "hsflow/legendre.hpp"

namespace hs {

/// Riemann map f : unit disc -> domain with f(0) = z0 and f'(0) > 0, held as
/// a boundary correspondence on equispaced angles plus the power series at 0.
struct ConformalMap {
  cplx z0;
  int M = 0;
  std::vector<double> theta;       // equispaced in [0, 2pi)
  std::vector<cplx> boundary;      // f(e^{i theta_j})
  std::vector<double> fprime_abs;  // |f'(e^{i theta_j})|
  std::vector<cplx> coeffs;        // f(tau) = z0 + sum_{k>=1} a_k tau^k
  double boundary_misfit = 0.0;    // vs the input polyline
  double a0_shift = 0.0;           // |raw a_0 - z0| before pinning

  cplx eval(cplx tau) const;
  cplx deriv(cplx tau) const;
};

/// Winding number of a closed polyline about z.
int winding_number(const std::vector<cplx>& loop, cplx z);
bool point_in_loop(const std::vector<cplx>& loop, cplx z);

std::vector<cplx> resample_closed(const std::vector<cplx>& loop, int M);

/// Boundary-correspondence construction through a second-kind integral
/// equation for the domain Green's function, conjugated along the boundary.
ConformalMap riemann_map_polyline(const std::vector<cplx>& polyline, cplx z0, int M,
                                  double tol = 0.0, int fourier_modes = 48);

/// Topology-checked entry point; refuses multiply connected domains.
ConformalMap riemann_map(const FlowDomain& domain, int M, double tol = 0.0);

struct HarmonicDiscReport {
  double max_identity = 0.0;  // |psi_t(f) + (1-t) ln|tau|^2 - Phi(f,tau)|
  double max_hamilton = 0.0;  // |H(f,tau) - (t-1)|
};
HarmonicDiscReport verify_harmonic_disc(const ConformalMap& map, double t,
                                        const EnvelopeField& psi, const SupportFan& fan,
                                        const std::vector<double>& radii = {0.25, 0.5, 0.75},
                                        int angles = 64);

struct InnerDomainReport {
  double t = 0.0, r = 0.0;
  double image_area = 0.0;     // omega_r-area of f(D_r)
  double resolved_area = 0.0;  // omega_r-area of the re-solved domain
  double symdiff_area = 0.0;   // omega_r-area of the symmetric difference
  double clamped_negative = 0.0;
};
/// Compare the mapped inner disc f(D_r) against the flow domain recomputed
/// for the fiber measure rho + lap(Phi(., r))/4pi on the same grid.
InnerDomainReport inner_domain_check(const ConformalMap& map, double t, double r,
                                     const SupportFan& fan, const DensityFn& rho,
                                     const EnvelopeOptions& opt = {});

}  // namespace hs

#endif

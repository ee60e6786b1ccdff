#ifndef HSFLOW_RADIAL_ORACLE_HPP
#define HSFLOW_RADIAL_ORACLE_HPP

#include "hsflow/area_form.hpp"

namespace hs {

/// Exact envelope for a radially symmetric form about the origin, written in
/// s = -ln|z|^2: the piecewise function equal to u left of the breakpoint and
/// affine of slope -t to the right of it.
struct RadialEnvelope {
  double t;
  double s0;   // breakpoint: u'(s0) = -t
  const RadialProfile* profile;

  double value_s(double s) const {
    if (s <= s0) return 0.0;
    return profile->u(s0) - t * (s - s0) - profile->u(s);
  }
};

/// Unique s0 with u'(s0) = -t, bisected to |u'(s0)+t| tolerance 1e-12.
double breakpoint(const RadialProfile& u, double t);

RadialEnvelope radial_envelope(const RadialProfile& u, double t);

/// psi_t(z) from the convex-minorant construction; -inf at z = 0.
double envelope_value(const RadialProfile& u, double t, cplx z);

/// Euclidean radius of the flow domain, e^{-s0/2}.
double domain_radius(const RadialProfile& u, double t);

}  // namespace hs

#endif

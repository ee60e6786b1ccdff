#include "hsflow/radial_oracle.hpp"

#include <cmath>

#include "hsflow/errors.hpp"

namespace hs {

double breakpoint(const RadialProfile& u, double t) {
  if (!(t > 0.0)) throw NoBreakpointError("breakpoint requires t > 0");
  double lo = u.smin, hi = u.smax;
  // want u'(s0) = -t with u' increasing from -inf to 0
  if (u.du(lo) > -t || u.du(hi) < -t)
    throw NoBreakpointError("t outside the range of -u' on the profile");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double d = u.du(mid) + t;
    if (std::abs(d) < 1e-12 && (hi - lo) < 1e-12) return mid;
    if (d < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

RadialEnvelope radial_envelope(const RadialProfile& u, double t) {
  return RadialEnvelope{t, breakpoint(u, t), &u};
}

double envelope_value(const RadialProfile& u, double t, cplx z) {
  if (t <= 0.0) return 0.0;
  if (std::norm(z) == 0.0) return kNegInf;
  RadialEnvelope env = radial_envelope(u, t);
  double s = -std::log(std::norm(z));
  return env.value_s(s);
}

double domain_radius(const RadialProfile& u, double t) {
  return std::exp(-0.5 * breakpoint(u, t));
}

}  // namespace hs

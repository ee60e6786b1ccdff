#include "hsflow/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "hsflow/errors.hpp"

namespace hs {

namespace {

// dense partial-pivot LU solve, A is row-major n x n, overwritten
void lu_solve(std::vector<double>& A, std::vector<double>& b, int n) {
  std::vector<int> piv((size_t)n);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(A[(size_t)k * n + k]);
    for (int r = k + 1; r < n; ++r) {
      double v = std::abs(A[(size_t)r * n + k]);
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best < 1e-300) throw MapError("singular integral-equation matrix", best);
    piv[(size_t)k] = p;
    if (p != k) {
      for (int c = 0; c < n; ++c) std::swap(A[(size_t)k * n + c], A[(size_t)p * n + c]);
      std::swap(b[(size_t)k], b[(size_t)p]);
    }
    double d = A[(size_t)k * n + k];
    for (int r = k + 1; r < n; ++r) {
      double f = A[(size_t)r * n + k] / d;
      if (f == 0.0) continue;
      A[(size_t)r * n + k] = 0.0;
      for (int c = k + 1; c < n; ++c) A[(size_t)r * n + c] -= f * A[(size_t)k * n + c];
      b[(size_t)r] -= f * b[(size_t)k];
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    double s = b[(size_t)k];
    for (int c = k + 1; c < n; ++c) s -= A[(size_t)k * n + c] * b[(size_t)c];
    b[(size_t)k] = s / A[(size_t)k * n + k];
  }
}

struct TrigCurve {
  std::vector<cplx> c;  // modes m = -K..K stored at index m+K
  int K;
  cplx eval(double t) const {
    cplx s{0, 0};
    for (int m = -K; m <= K; ++m) s += c[(size_t)(m + K)] * std::exp(cplx{0, m * t});
    return s;
  }
  cplx d1(double t) const {
    cplx s{0, 0};
    for (int m = -K; m <= K; ++m) s += c[(size_t)(m + K)] * cplx{0, (double)m} * std::exp(cplx{0, m * t});
    return s;
  }
  cplx d2(double t) const {
    cplx s{0, 0};
    for (int m = -K; m <= K; ++m)
      s += c[(size_t)(m + K)] * (-(double)m * m) * std::exp(cplx{0, m * t});
    return s;
  }
};

TrigCurve fit_curve(const std::vector<cplx>& pts, int K) {
  int M = (int)pts.size();
  K = std::min(K, M / 2 - 1);
  TrigCurve tc;
  tc.K = K;
  tc.c.assign((size_t)(2 * K + 1), cplx{0, 0});
  for (int m = -K; m <= K; ++m) {
    cplx acc{0, 0};
    for (int k = 0; k < M; ++k) acc += pts[(size_t)k] * std::exp(cplx{0, -m * kTwoPi * k / M});
    double w = std::cos(0.5 * kPi * std::abs(m) / (K + 1));  // gentle roll-off
    tc.c[(size_t)(m + K)] = acc / (double)M * (w * w);
  }
  return tc;
}

double polyline_distance(const std::vector<cplx>& poly, cplx p) {
  double best = std::numeric_limits<double>::infinity();
  int n = (int)poly.size();
  for (int k = 0; k < n; ++k) {
    cplx a = poly[(size_t)k], b = poly[(size_t)((k + 1) % n)];
    cplx ab = b - a;
    double L2 = std::norm(ab);
    double s = L2 > 0 ? std::clamp(((p - a) * std::conj(ab)).real() / L2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::abs(p - (a + s * ab)));
  }
  return best;
}

}  // namespace

int winding_number(const std::vector<cplx>& loop, cplx z) {
  double total = 0.0;
  int n = (int)loop.size();
  for (int k = 0; k < n; ++k) {
    cplx a = loop[(size_t)k] - z, b = loop[(size_t)((k + 1) % n)] - z;
    total += std::arg(b / a);
  }
  return (int)std::lround(total / kTwoPi);
}

bool point_in_loop(const std::vector<cplx>& loop, cplx z) {
  return winding_number(loop, z) != 0;
}

std::vector<cplx> resample_closed(const std::vector<cplx>& loop, int M) {
  int n = (int)loop.size();
  std::vector<double> cum((size_t)n + 1, 0.0);
  for (int k = 0; k < n; ++k)
    cum[(size_t)k + 1] = cum[(size_t)k] + std::abs(loop[(size_t)((k + 1) % n)] - loop[(size_t)k]);
  double L = cum[(size_t)n];
  std::vector<cplx> out((size_t)M);
  int seg = 0;
  for (int k = 0; k < M; ++k) {
    double target = L * k / M;
    while (seg + 1 < n && cum[(size_t)seg + 1] < target) ++seg;
    double denom = cum[(size_t)seg + 1] - cum[(size_t)seg];
    double s = denom > 0 ? (target - cum[(size_t)seg]) / denom : 0.0;
    out[(size_t)k] = loop[(size_t)seg] + s * (loop[(size_t)((seg + 1) % n)] - loop[(size_t)seg]);
  }
  return out;
}

cplx ConformalMap::eval(cplx tau) const {
  cplx acc{0, 0};
  for (int k = (int)coeffs.size() - 1; k >= 0; --k) acc = acc * tau + coeffs[(size_t)k];
  return acc;
}

cplx ConformalMap::deriv(cplx tau) const {
  cplx acc{0, 0};
  for (int k = (int)coeffs.size() - 1; k >= 1; --k)
    acc = acc * tau + coeffs[(size_t)k] * (double)k;
  return acc;
}

ConformalMap riemann_map_polyline(const std::vector<cplx>& polyline, cplx z0, int M, double tol,
                                  int fourier_modes) {
  if (polyline.size() < 8) throw MapError("boundary polyline too short", 0.0);
  std::vector<cplx> poly = polyline;
  // counterclockwise orientation
  double area2 = 0.0;
  int n = (int)poly.size();
  for (int k = 0; k < n; ++k) {
    cplx a = poly[(size_t)k], b = poly[(size_t)((k + 1) % n)];
    area2 += a.real() * b.imag() - a.imag() * b.real();
  }
  if (area2 < 0) std::reverse(poly.begin(), poly.end());
  if (winding_number(poly, z0) != 1)
    throw MapError("base point not enclosed with winding one", 0.0);

  std::vector<cplx> samples = resample_closed(poly, M);
  TrigCurve curve = fit_curve(samples, fourier_modes);

  const double dt = kTwoPi / M;
  std::vector<cplx> zeta((size_t)M), dzeta((size_t)M), d2zeta((size_t)M);
  for (int k = 0; k < M; ++k) {
    double t = dt * k;
    zeta[(size_t)k] = curve.eval(t);
    dzeta[(size_t)k] = curve.d1(t);
    d2zeta[(size_t)k] = curve.d2(t);
  }

  // second-kind system (A + I/2) mu = b for the double-layer density
  std::vector<double> A((size_t)M * M);
  std::vector<double> rhs((size_t)M);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      double kij;
      if (i == j)
        kij = (d2zeta[(size_t)i] / (2.0 * dzeta[(size_t)i])).imag();
      else
        kij = (dzeta[(size_t)j] / (zeta[(size_t)j] - zeta[(size_t)i])).imag();
      A[(size_t)i * M + j] = kij * dt / kTwoPi + (i == j ? 0.5 : 0.0);
    }
    rhs[(size_t)i] = -std::log(std::abs(zeta[(size_t)i] - z0)) / kTwoPi;
  }
  lu_solve(A, rhs, M);
  std::vector<double>& mu = rhs;

  // spectral derivative of the density for the diagonal of the conjugate
  std::vector<double> dmu((size_t)M, 0.0);
  {
    std::vector<cplx> cm((size_t)M);
    for (int m = 0; m < M; ++m) {
      cplx acc{0, 0};
      for (int k = 0; k < M; ++k) acc += mu[(size_t)k] * std::exp(cplx{0, -m * dt * k});
      cm[(size_t)m] = acc / (double)M;
    }
    for (int k = 0; k < M; ++k) {
      cplx acc{0, 0};
      for (int m = 1; m < M; ++m) {
        int mm = m <= M / 2 ? m : m - M;
        if (std::abs(mm) > M / 2 - 1) continue;
        acc += cm[(size_t)m] * cplx{0, (double)mm} * std::exp(cplx{0, (double)mm * dt * k});
      }
      dmu[(size_t)k] = acc.real();
    }
  }

  // boundary values of the conjugate: Im of the Cauchy integral of mu
  std::vector<double> conj_u((size_t)M);
  for (int i = 0; i < M; ++i) {
    cplx acc{0, 0};
    for (int j = 0; j < M; ++j) {
      if (j == i) continue;
      acc += (mu[(size_t)j] - mu[(size_t)i]) * dzeta[(size_t)j] /
             (zeta[(size_t)j] - zeta[(size_t)i]);
    }
    acc *= dt;
    acc += dmu[(size_t)i] * dt;            // diagonal limit
    acc += cplx{0, kPi} * mu[(size_t)i];   // principal value of the plain Cauchy kernel
    cplx cint = acc / cplx{0, kTwoPi} + 0.5 * mu[(size_t)i];
    conj_u[(size_t)i] = cint.imag();
  }
  // rotation gauge: conjugate at the base point fixes arg F'(z0) = 0
  cplx c0{0, 0};
  for (int j = 0; j < M; ++j)
    c0 += mu[(size_t)j] * dzeta[(size_t)j] / (zeta[(size_t)j] - z0);
  double conj_at_z0 = (c0 * dt / cplx{0, kTwoPi}).imag();

  // boundary angle of the map inverse: arg(zeta - z0) unwrapped + 2 pi conj
  std::vector<double> vart((size_t)M);
  double prev = std::arg(zeta[0] - z0);
  double acc_arg = prev;
  for (int i = 0; i < M; ++i) {
    double a = std::arg(zeta[(size_t)i] - z0);
    double d = a - prev;
    while (d > kPi) d -= kTwoPi;
    while (d < -kPi) d += kTwoPi;
    acc_arg += (i == 0 ? 0.0 : d);
    prev = a;
    vart[(size_t)i] = acc_arg + kTwoPi * (conj_u[(size_t)i] - conj_at_z0);
  }
  // strictly increasing check (univalence proxy)
  double worst_step = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < M; ++i) worst_step = std::min(worst_step, vart[(size_t)i + 1] - vart[(size_t)i]);
  if (worst_step <= -1e-6)
    throw MapError("boundary correspondence not monotone", worst_step);
  for (int i = 0; i + 1 < M; ++i)
    if (vart[(size_t)i + 1] <= vart[(size_t)i]) vart[(size_t)i + 1] = vart[(size_t)i] + 1e-12;

  // invert the correspondence onto equispaced angles, evaluating the curve
  // at the interpolated parameter
  ConformalMap map;
  map.z0 = z0;
  map.M = M;
  map.theta.resize((size_t)M);
  map.boundary.resize((size_t)M);
  map.fprime_abs.resize((size_t)M);
  double th0 = vart[0];
  std::vector<cplx> gvals((size_t)M);
  int lo = 0;
  for (int k = 0; k < M; ++k) {
    double target = th0 + kTwoPi * k / M;
    if (target > vart[(size_t)M - 1]) {
      // wrap segment from the last sample back to the first, one period later
      double span = th0 + kTwoPi - vart[(size_t)M - 1];
      double s = span > 0 ? (target - vart[(size_t)M - 1]) / span : 0.0;
      gvals[(size_t)k] = curve.eval(dt * (M - 1) + s * dt);
      continue;
    }
    while (lo + 1 < M && vart[(size_t)lo + 1] < target) ++lo;
    int hi = std::min(lo + 1, M - 1);
    double s = (vart[(size_t)hi] > vart[(size_t)lo])
                   ? (target - vart[(size_t)lo]) / (vart[(size_t)hi] - vart[(size_t)lo])
                   : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    gvals[(size_t)k] = curve.eval(dt * (lo + s));
  }
  // series coefficients from the correspondence at angles th0 + 2pi k / M
  int ncoef = M / 2;
  map.coeffs.assign((size_t)ncoef, cplx{0, 0});
  for (int m = 0; m < ncoef; ++m) {
    cplx acc2{0, 0};
    for (int k = 0; k < M; ++k)
      acc2 += gvals[(size_t)k] * std::exp(cplx{0, -m * (th0 + kTwoPi * k / M)});
    map.coeffs[(size_t)m] = acc2 / (double)M;
  }
  map.a0_shift = std::abs(map.coeffs[0] - z0);
  map.coeffs[0] = z0;
  // rotation so f'(0) > 0
  double rot = std::arg(map.coeffs[1]);
  for (int m = 1; m < ncoef; ++m)
    map.coeffs[(size_t)m] *= std::exp(cplx{0, -rot * m});
  if (map.coeffs[1].real() < 0)
    throw MapError("negative derivative normalization", map.coeffs[1].real());

  double misfit = 0.0;
  for (int k = 0; k < M; ++k) {
    map.theta[(size_t)k] = kTwoPi * k / M;
    cplx tau = std::exp(cplx{0, map.theta[(size_t)k]});
    map.boundary[(size_t)k] = map.eval(tau);
    map.fprime_abs[(size_t)k] = std::abs(map.deriv(tau));
    misfit = std::max(misfit, polyline_distance(poly, map.boundary[(size_t)k]));
  }
  map.boundary_misfit = misfit;
  if (winding_number(map.boundary, z0) != 1)
    throw MapError("series boundary lost the base point", misfit);
  if (tol > 0.0 && misfit > tol) throw MapError("boundary misfit above tolerance", misfit);
  return map;
}

ConformalMap riemann_map(const FlowDomain& domain, int M, double tol) {
  if (domain.holes > 0)
    throw TopologyError("domain is multiply connected: no disc map exists");
  if (domain.components != 1)
    throw TopologyError("domain is not connected");
  // pick the loop enclosing the injection point
  const std::vector<cplx>* best = nullptr;
  double best_len = 0.0;
  for (const auto& loop : domain.loops) {
    if (winding_number(loop, domain.z0) == 0) continue;
    double len = 0.0;
    for (size_t k = 0; k < loop.size(); ++k)
      len += std::abs(loop[(k + 1) % loop.size()] - loop[k]);
    if (len > best_len) {
      best_len = len;
      best = &loop;
    }
  }
  if (!best) throw TopologyError("no contour loop encloses the injection point");
  return riemann_map_polyline(*best, domain.z0, M, tol);
}

HarmonicDiscReport verify_harmonic_disc(const ConformalMap& map, double t,
                                        const EnvelopeField& psi, const SupportFan& fan,
                                        const std::vector<double>& radii, int angles) {
  HarmonicDiscReport rep;
  const double ds_h = 2e-3;
  for (double r : radii) {
    double s = -std::log(r * r);
    for (int a = 0; a < angles; ++a) {
      cplx tau = r * std::exp(cplx{0, kTwoPi * a / angles});
      cplx z = map.eval(tau);
      double psi_here = psi.psi.bilinear(z);
      double phi_here = fan.value_interp(z, s);
      rep.max_identity = std::max(
          rep.max_identity, std::abs(psi_here + (1.0 - t) * std::log(r * r) - phi_here));
      double hval = (fan.value_interp(z, s + ds_h) - phi_here) / ds_h;
      rep.max_hamilton = std::max(rep.max_hamilton, std::abs(hval - (t - 1.0)));
    }
  }
  return rep;
}

InnerDomainReport inner_domain_check(const ConformalMap& map, double t, double r,
                                     const SupportFan& fan, const DensityFn& rho,
                                     const EnvelopeOptions& opt) {
  InnerDomainReport rep;
  rep.t = t;
  rep.r = r;
  const Grid& g = fan.grid();
  double s = -std::log(r * r);

  // fiber measure rho_r = rho + lap(Phi(., r)) / 4 pi, clamped nonnegative
  Field slice = fan.slice(s);
  Field rho_r(g, 0.0);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      double v = std::max(0.0, rho(g.node(i, j))) + slice.lap5(i, j) / (g.h * g.h) / kFourPi;
      if (v < 0) {
        rep.clamped_negative = std::max(rep.clamped_negative, -v);
        v = 0.0;
      }
      rho_r.at(i, j) = v;
    }

  // image region of the inner disc through the map
  std::vector<cplx> curve((size_t)256);
  for (int k = 0; k < 256; ++k)
    curve[(size_t)k] = map.eval(r * std::exp(cplx{0, kTwoPi * k / 256}));
  std::vector<uint8_t> image_mask((size_t)g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      image_mask[(size_t)g.idx(i, j)] = point_in_loop(curve, g.node(i, j)) ? 1 : 0;

  EnvelopeField ef = solve_envelope_density(rho_r, g.injection_point(), t, opt);
  FlowDomain dom = extract_domain(ef, [&](cplx z) { return rho_r.bilinear(z); },
                                  mask_epsilon(opt));

  const double h2 = g.h * g.h;
  for (int k = 0; k < g.size(); ++k) {
    double w = rho_r[k] * h2;
    bool a = image_mask[(size_t)k] != 0, b = dom.mask[(size_t)k] != 0;
    if (a) rep.image_area += w;
    if (b) rep.resolved_area += w;
    if (a != b) rep.symdiff_area += w;
  }
  return rep;
}

}  // namespace hs

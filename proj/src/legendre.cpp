#include "hsflow/legendre.hpp"

#include <algorithm>
#include <cmath>

#include "hsflow/errors.hpp"

namespace hs {

SupportFan SupportFan::build(const EnvelopeStack& stack) {
  if (stack.ts.size() < 2) throw UnsupportedError("degenerate fan: need at least 2 time samples");
  SupportFan fan;
  fan.grid_ = stack.grid;
  const int n = stack.grid.size();
  const int nt = (int)stack.ts.size();
  fan.offs_.assign((size_t)n + 1, 0);
  fan.slope_.reserve((size_t)n * 4);

  std::vector<double> ms, cs, ts;
  std::vector<int> keep;
  for (int node = 0; node < n; ++node) {
    ms.clear();
    cs.clear();
    ts.clear();
    for (int k = 0; k < nt; ++k) {
      double psi = stack.psi[(size_t)k][node];
      if (!std::isfinite(psi)) continue;
      ms.push_back(stack.ts[(size_t)k] - 1.0);
      cs.push_back(psi);
      ts.push_back(stack.ts[(size_t)k]);
    }
    keep.clear();
    auto isect = [&](int a, int b) { return (cs[(size_t)a] - cs[(size_t)b]) / (ms[(size_t)b] - ms[(size_t)a]); };
    for (int l = 0; l < (int)ms.size(); ++l) {
      if (!keep.empty() && ms[(size_t)keep.back()] == ms[(size_t)l]) {
        if (cs[(size_t)keep.back()] >= cs[(size_t)l]) continue;
        keep.pop_back();
      }
      while (keep.size() >= 2) {
        int b = keep[keep.size() - 1], a = keep[keep.size() - 2];
        if (isect(a, l) <= isect(a, b))
          keep.pop_back();
        else
          break;
      }
      // the new steepest line must beat the previous one somewhere
      if (keep.size() == 1) {
        int b = keep.back();
        // lines with larger slope always join the upper hull on the right
        (void)b;
      }
      keep.push_back(l);
    }
    int base = (int)fan.slope_.size();
    for (size_t idx = 0; idx < keep.size(); ++idx) {
      int l = keep[idx];
      fan.slope_.push_back(ms[(size_t)l]);
      fan.icpt_.push_back(cs[(size_t)l]);
      fan.tval_.push_back(ts[(size_t)l]);
      if (idx == 0)
        fan.bkpt_.push_back(-std::numeric_limits<double>::infinity());
      else {
        int p = keep[idx - 1];
        fan.bkpt_.push_back((cs[(size_t)p] - cs[(size_t)l]) / (ms[(size_t)l] - ms[(size_t)p]));
      }
    }
    fan.offs_[(size_t)node + 1] = base + (int)keep.size();
  }
  return fan;
}

int SupportFan::active_line(int node, double s) const {
  int lo = offs_[(size_t)node], hi = offs_[(size_t)node + 1] - 1;
  // last line whose breakpoint is <= s: right-derivative convention at kinks
  int ans = lo;
  while (lo <= hi) {
    int mid = (lo + hi) / 2;
    if (bkpt_[(size_t)mid] <= s) {
      ans = mid;
      lo = mid + 1;
    } else
      hi = mid - 1;
  }
  return ans - offs_[(size_t)node];
}

double SupportFan::value(int node, double s) const {
  int l = offs_[(size_t)node] + active_line(node, s);
  return slope_[(size_t)l] * s + icpt_[(size_t)l];
}

double SupportFan::right_slope(int node, double s) const {
  int l = offs_[(size_t)node] + active_line(node, s);
  return slope_[(size_t)l];
}

double SupportFan::inverse_at(int node, double t) const {
  int b = offs_[(size_t)node], e = offs_[(size_t)node + 1];
  // slope of fan(s) + (1-t)s is m + (1-t); find the first hull line with m >= t-1
  int first = -1;
  for (int l = b; l < e; ++l)
    if (slope_[(size_t)l] >= t - 1.0 - 1e-15) {
      first = l;
      break;
    }
  if (first < 0) return kNegInf;  // decreasing for all s: infimum escapes to -infinity
  double s = (first == b) ? 0.0 : std::max(0.0, bkpt_[(size_t)first]);
  return slope_[(size_t)first] * s + icpt_[(size_t)first] + (1.0 - t) * s;
}

Field SupportFan::slice(double s) const {
  Field f(grid_);
  for (int node = 0; node < grid_.size(); ++node) f[node] = value(node, s);
  return f;
}

Field SupportFan::hamiltonian(double s) const {
  Field f(grid_);
  for (int node = 0; node < grid_.size(); ++node) f[node] = right_slope(node, s);
  return f;
}

Field SupportFan::arrival() const {
  Field f(grid_);
  for (int node = 0; node < grid_.size(); ++node) f[node] = right_slope(node, 0.0) + 1.0;
  return f;
}

Field SupportFan::inverse_field(double t) const {
  Field f(grid_);
  for (int node = 0; node < grid_.size(); ++node) f[node] = inverse_at(node, t);
  return f;
}

double SupportFan::value_interp(cplx z, double s) const {
  const Grid& g = grid_;
  double fx = std::clamp((z.real() - g.x0) / g.h, 0.0, (double)(g.nx - 1));
  double fy = std::clamp((z.imag() - g.y0) / g.h, 0.0, (double)(g.ny - 1));
  int i = std::min((int)fx, g.nx - 2);
  int j = std::min((int)fy, g.ny - 2);
  double sx = fx - i, sy = fy - j;
  double v00 = value(g.idx(i, j), s), v10 = value(g.idx(i + 1, j), s);
  double v01 = value(g.idx(i, j + 1), s), v11 = value(g.idx(i + 1, j + 1), s);
  return (1 - sx) * (1 - sy) * v00 + sx * (1 - sy) * v10 + (1 - sx) * sy * v01 + sx * sy * v11;
}

MaResidualReport ma_residual(const SupportFan& fan, const DensityFn& rho,
                             const std::vector<double>& s_values, double ds) {
  MaResidualReport rep;
  const Grid& g = fan.grid();
  double sum = 0.0;
  long count = 0;
  for (double s : s_values) {
    Field um = fan.slice(std::max(0.0, s - ds));
    Field u0 = fan.slice(s);
    Field up = fan.slice(s + ds);
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        if (g.in_injection_patch(i, j, 2)) continue;
        int k = g.idx(i, j);
        double uzz = u0.lap5(i, j) / (4.0 * g.h * g.h);
        double uss = (up[k] + um[k] - 2.0 * u0[k]) / (ds * ds);
        double uxs = (up.at(i + 1, j) - up.at(i - 1, j) - um.at(i + 1, j) + um.at(i - 1, j)) /
                     (4.0 * g.h * ds);
        double uys = (up.at(i, j + 1) - up.at(i, j - 1) - um.at(i, j + 1) + um.at(i, j - 1)) /
                     (4.0 * g.h * ds);
        double det = (kPi * std::max(0.0, rho(g.node(i, j))) + uzz) * uss -
                     0.25 * (uxs * uxs + uys * uys);
        double a = std::abs(det);
        rep.max_abs = std::max(rep.max_abs, a);
        sum += a;
        ++count;
        if (fan.line_count(k) == 1 && std::abs(fan.line_slope(k, 0)) < 1e-14)
          rep.max_flat = std::max(rep.max_flat, a);
      }
  }
  rep.mean_abs = count ? sum / count : 0.0;
  return rep;
}

HModulusReport h_modulus(const Field& arrival, double flag_threshold) {
  HModulusReport rep;
  const Grid& g = arrival.g;
  const int steps[3] = {1, 2, 4};
  for (int sidx = 0; sidx < 3; ++sidx) {
    int d = steps[sidx];
    double mx = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        int k = g.idx(i, j);
        if (i + d < g.nx) {
          double dd = std::abs(arrival[k] - arrival[g.idx(i + d, j)]);
          mx = std::max(mx, dd);
          if (d == 1 && dd > flag_threshold) rep.flags.push_back({k, g.idx(i + d, j)});
        }
        if (j + d < g.ny) {
          double dd = std::abs(arrival[k] - arrival[g.idx(i, j + d)]);
          mx = std::max(mx, dd);
          if (d == 1 && dd > flag_threshold) rep.flags.push_back({k, g.idx(i, j + d)});
        }
      }
    rep.max_step[sidx] = mx;
    rep.lipschitz = std::max(rep.lipschitz, mx / (d * g.h));
  }
  return rep;
}

double TwistedBoundaryData::c_of_r(double r) const {
  // zero-mean normalization against the background form, reduced to a 1-D
  // integral over x in [0,1]: integrand ln(1 - x(1 - r^2))
  double a = 1.0 - r * r;
  if (std::abs(a) < 1e-14) return 0.0;
  return simpson([a](double x) { return std::log(std::max(1e-300, 1.0 - a * x)); }, 0.0,
                 1.0 - 1e-9, quad_panels);
}

double TwistedBoundaryData::phi(cplx z, cplx tau) const {
  return std::log1p(std::norm(tau * z)) - std::log1p(std::norm(z)) - c_of_r(std::abs(tau));
}

Field twist_to_disc(const SupportFan& fan, const TwistedBoundaryData& data, cplx tau) {
  double r2 = std::norm(tau);
  if (r2 < 1e-300) throw DomainError("twist undefined at tau = 0");
  double s = -std::log(r2);
  const Grid& g = fan.grid();
  Field out(g);
  double cr = data.c_of_r(std::abs(tau));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      cplx z = g.node(i, j);
      cplx zt = tau * z;
      double base = g.contains(zt) ? fan.value_interp(zt, std::max(0.0, s)) : 0.0;
      double ph = std::log1p(std::norm(zt)) - std::log1p(std::norm(z)) - cr;
      out.at(i, j) = base + ph - std::log(r2);
    }
  return out;
}

}  // namespace hs

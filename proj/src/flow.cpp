#include "hsflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "hsflow/errors.hpp"

namespace hs {

namespace {

// edge ids: horizontal edge (i,j)-(i+1,j) -> 2*(j*nx+i), vertical (i,j)-(i,j+1) -> +1
int hedge(const Grid& g, int i, int j) { return 2 * (j * g.nx + i); }
int vedge(const Grid& g, int i, int j) { return 2 * (j * g.nx + i) + 1; }

cplx edge_point(const Grid& g, const Field& f, double level, int id) {
  int base = id / 2;
  int i = base % g.nx, j = base / g.nx;
  auto clip = [](double v) { return std::clamp(v, 1e-9, 1.0 - 1e-9); };
  auto val = [&](int a, int b) {
    double x = f.at(a, b);
    return std::isfinite(x) ? x : -1e30;
  };
  if (id % 2 == 0) {
    double fa = val(i, j), fb = val(i + 1, j);
    double s = clip((level - fa) / (fb - fa));
    return g.node(i, j) + cplx{s * g.h, 0.0};
  }
  double fa = val(i, j), fb = val(i, j + 1);
  double s = clip((level - fa) / (fb - fa));
  return g.node(i, j) + cplx{0.0, s * g.h};
}

}  // namespace

std::vector<std::vector<cplx>> contour_loops(const Field& f, double level) {
  const Grid& g = f.g;
  std::multimap<int, int> links;  // edge id -> connected edge id
  auto inside = [&](int i, int j) {
    double v = f.at(i, j);
    return (std::isfinite(v) ? v : -1e30) < level;
  };
  auto corner_avg = [&](int i, int j) {
    auto val = [&](int a, int b) {
      double x = f.at(a, b);
      return std::isfinite(x) ? x : -1e30;
    };
    return 0.25 * (val(i, j) + val(i + 1, j) + val(i, j + 1) + val(i + 1, j + 1));
  };
  for (int j = 0; j < g.ny - 1; ++j)
    for (int i = 0; i < g.nx - 1; ++i) {
      int c = (inside(i, j) ? 1 : 0) | (inside(i + 1, j) ? 2 : 0) | (inside(i + 1, j + 1) ? 4 : 0) |
              (inside(i, j + 1) ? 8 : 0);
      if (c == 0 || c == 15) continue;
      int B = hedge(g, i, j), R = vedge(g, i + 1, j), T = hedge(g, i, j + 1), L = vedge(g, i, j);
      auto add = [&](int a, int b) {
        links.insert({a, b});
        links.insert({b, a});
      };
      switch (c) {
        case 1: case 14: add(B, L); break;
        case 2: case 13: add(B, R); break;
        case 3: case 12: add(L, R); break;
        case 4: case 11: add(R, T); break;
        case 6: case 9:  add(B, T); break;
        case 7: case 8:  add(L, T); break;
        case 5:
          if (corner_avg(i, j) < level) { add(L, T); add(B, R); }
          else { add(B, L); add(R, T); }
          break;
        case 10:
          if (corner_avg(i, j) < level) { add(B, L); add(R, T); }
          else { add(L, T); add(B, R); }
          break;
        default: break;
      }
    }

  std::vector<std::vector<cplx>> loops;
  std::map<int, bool> used;
  for (auto& [e, _] : links) used.emplace(e, false);
  for (auto& [start, flag] : used) {
    if (flag) continue;
    std::vector<cplx> loop;
    int cur = start, prev = -1;
    while (true) {
      used[cur] = true;
      loop.push_back(edge_point(g, f, level, cur));
      auto range = links.equal_range(cur);
      int next = -1;
      for (auto it = range.first; it != range.second; ++it)
        if (it->second != prev && !used[it->second]) {
          next = it->second;
          break;
        }
      if (next < 0) {
        // close back to start if linked
        break;
      }
      prev = cur;
      cur = next;
    }
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

namespace {

int label_components(const Grid& g, const std::vector<uint8_t>& mask, bool value,
                     bool eight_conn, std::vector<int>& label, bool& touches_frame_any,
                     std::vector<bool>& comp_touches_frame) {
  label.assign(mask.size(), -1);
  comp_touches_frame.clear();
  int ncomp = 0;
  std::queue<int> q;
  const int dx4[] = {1, -1, 0, 0}, dy4[] = {0, 0, 1, -1};
  const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1}, dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int* dx = eight_conn ? dx8 : dx4;
  const int* dy = eight_conn ? dy8 : dy4;
  int nd = eight_conn ? 8 : 4;
  touches_frame_any = false;
  for (int k = 0; k < g.size(); ++k) {
    if ((mask[(size_t)k] != 0) != value || label[(size_t)k] >= 0) continue;
    bool touches = false;
    label[(size_t)k] = ncomp;
    q.push(k);
    while (!q.empty()) {
      int cur = q.front();
      q.pop();
      int i = cur % g.nx, j = cur / g.nx;
      if (g.on_frame(i, j)) touches = true;
      for (int d = 0; d < nd; ++d) {
        int ii = i + dx[d], jj = j + dy[d];
        if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
        int kk = g.idx(ii, jj);
        if ((mask[(size_t)kk] != 0) == value && label[(size_t)kk] < 0) {
          label[(size_t)kk] = ncomp;
          q.push(kk);
        }
      }
    }
    comp_touches_frame.push_back(touches);
    if (touches) touches_frame_any = true;
    ++ncomp;
  }
  return ncomp;
}

}  // namespace

FlowDomain extract_domain(const EnvelopeField& field, const DensityFn& rho, double eps_mask) {
  FlowDomain d;
  d.t = field.t;
  d.grid = field.grid;
  d.z0 = field.grid.injection_point();
  const Grid& g = d.grid;
  d.mask.assign((size_t)g.size(), 0);
  if (field.minus_infinity) {
    std::fill(d.mask.begin(), d.mask.end(), 1);
  } else {
    for (int k = 0; k < g.size(); ++k) {
      double v = field.psi[k];
      d.mask[(size_t)k] = ((std::isfinite(v) ? v : -1e30) < -eps_mask) ? 1 : 0;
    }
  }
  double area = 0.0;
  for (int k = 0; k < g.size(); ++k)
    if (d.mask[(size_t)k]) area += std::max(0.0, rho(g.node(k)));
  d.area_omega = area * g.h * g.h;

  bool empty = std::none_of(d.mask.begin(), d.mask.end(), [](uint8_t m) { return m != 0; });
  if (field.t > 10.0 * eps_mask && empty)
    throw DomainError("empty flow domain at positive time");

  d.loops = contour_loops(field.psi, -eps_mask);
  for (auto& loop : d.loops)
    for (size_t k = 0; k < loop.size(); ++k)
      d.perimeter += std::abs(loop[(k + 1) % loop.size()] - loop[k]);

  std::vector<int> label;
  std::vector<bool> touches;
  bool any;
  d.components = label_components(g, d.mask, true, false, label, any, touches);
  int ncomp_c = label_components(g, d.mask, false, true, label, any, touches);
  int sea = 0;
  for (bool b : touches) sea += b ? 1 : 0;
  d.holes = ncomp_c - sea;
  return d;
}

NestingReport nesting_check(const std::vector<FlowDomain>& domains) {
  NestingReport rep;
  rep.min_delta = std::numeric_limits<double>::infinity();
  if (domains.size() < 2) {
    rep.min_delta = 0.0;
    return rep;
  }
  for (size_t m = 0; m + 1 < domains.size(); ++m) {
    const FlowDomain& a = domains[m];
    const FlowDomain& b = domains[m + 1];
    double dt = b.t - a.t;
    const Grid& g = a.grid;
    // violations: nodes of a outside b
    for (int k = 0; k < g.size(); ++k)
      if (a.mask[(size_t)k] && !b.mask[(size_t)k]) ++rep.violations;
    // boundary nodes of a vs complement nodes of b adjacent to b's boundary
    std::vector<cplx> abnd, bext;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        int k = g.idx(i, j);
        if (a.mask[(size_t)k] &&
            (!a.mask[(size_t)k - 1] || !a.mask[(size_t)k + 1] || !a.mask[(size_t)k - g.nx] ||
             !a.mask[(size_t)k + g.nx]))
          abnd.push_back(g.node(i, j));
        if (!b.mask[(size_t)k]) {
          bool adj = b.mask[(size_t)k - 1] || b.mask[(size_t)k + 1] || b.mask[(size_t)k - g.nx] ||
                     b.mask[(size_t)k + g.nx];
          if (adj) bext.push_back(g.node(i, j));
        }
      }
    double mind = std::numeric_limits<double>::infinity();
    for (cplx za : abnd) {
      double best = std::numeric_limits<double>::infinity();
      for (cplx zb : bext) best = std::min(best, std::abs(za - zb));
      mind = std::min(mind, best);
    }
    if (dt > 0 && std::isfinite(mind)) rep.min_delta = std::min(rep.min_delta, mind / dt);
  }
  rep.nested = rep.violations == 0;
  if (!std::isfinite(rep.min_delta)) rep.min_delta = 0.0;
  return rep;
}

std::vector<cplx> moments(const FlowDomain& dom, const DensityFn& rho, int K) {
  std::vector<cplx> M((size_t)K + 1, cplx{0.0, 0.0});
  const Grid& g = dom.grid;
  const double h2 = g.h * g.h;
  for (int k = 0; k < g.size(); ++k) {
    if (!dom.mask[(size_t)k]) continue;
    cplx z = g.node(k);
    double w = std::max(0.0, rho(z)) * h2;
    cplx zp{1.0, 0.0};
    for (int m = 0; m <= K; ++m) {
      M[(size_t)m] += w * zp;
      zp *= z;
    }
  }
  return M;
}

double log_kernel_cell_integral(cplx z, cplx cell_center, double h) {
  // primitive F with d2F/dxdy = ln(x^2+y^2)
  auto F = [](double x, double y) {
    double r2 = x * x + y * y;
    if (r2 < 1e-300) return 0.0;
    double t1 = x * y * std::log(r2) - 3.0 * x * y;
    double t2 = (std::abs(x) > 1e-150) ? x * x * std::atan(y / x) : 0.0;
    double t3 = (std::abs(y) > 1e-150) ? y * y * std::atan(x / y) : 0.0;
    return t1 + t2 + t3;
  };
  double a1 = cell_center.real() - 0.5 * h - z.real();
  double a2 = cell_center.real() + 0.5 * h - z.real();
  double b1 = cell_center.imag() - 0.5 * h - z.imag();
  double b2 = cell_center.imag() + 0.5 * h - z.imag();
  return F(a2, b2) - F(a1, b2) - F(a2, b1) + F(a1, b1);
}

namespace {

double log_potential_over_mask(const FlowDomain& dom, const DensityFn& rho, cplx z) {
  const Grid& g = dom.grid;
  const double h2 = g.h * g.h;
  double acc = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    if (!dom.mask[(size_t)k]) continue;
    cplx c = g.node(k);
    double w = std::max(0.0, rho(c));
    if (std::abs(z.real() - c.real()) <= 0.5 * g.h && std::abs(z.imag() - c.imag()) <= 0.5 * g.h)
      acc += w * log_kernel_cell_integral(z, c, g.h);
    else
      acc += w * std::log(std::norm(z - c)) * h2;
  }
  return acc;
}

}  // namespace

double gustafsson_potential(const FlowDomain& dom, const DensityFn& rho, cplx z) {
  return -log_potential_over_mask(dom, rho, z) + dom.t * std::log(std::norm(z - dom.z0));
}

QuadratureIdentityReport quadrature_identity_check(const FlowDomain& dom, const DensityFn& rho,
                                                   const std::vector<cplx>& samples) {
  QuadratureIdentityReport rep;
  const Grid& g = dom.grid;
  for (cplx z : samples) {
    if (g.contains(z)) {
      int i = (int)std::lround((z.real() - g.x0) / g.h);
      int j = (int)std::lround((z.imag() - g.y0) / g.h);
      i = std::clamp(i, 0, g.nx - 1);
      j = std::clamp(j, 0, g.ny - 1);
      if (dom.mask[(size_t)g.idx(i, j)]) {
        ++rep.skipped;
        continue;
      }
    }
    double lhs = log_potential_over_mask(dom, rho, z);
    double rhs = dom.t * std::log(std::norm(z - dom.z0));
    rep.max_deviation = std::max(rep.max_deviation, std::abs(lhs - rhs));
    ++rep.used;
  }
  return rep;
}

Field arrival_direct(const EnvelopeStack& stack, double eps_mask, int bisect_depth) {
  const Grid& g = stack.grid;
  Field arr(g, stack.ts.back());
  const int nt = (int)stack.ts.size();
  auto val = [&](int k, int node) {
    double v = stack.psi[(size_t)k][node];
    return std::isfinite(v) ? v : -1e30;
  };
  for (int node = 0; node < g.size(); ++node) {
    int hit = -1;
    for (int k = 0; k < nt; ++k)
      if (val(k, node) < -eps_mask) {
        hit = k;
        break;
      }
    if (hit < 0) {
      arr[node] = stack.ts.back();
      continue;
    }
    if (hit == 0) {
      arr[node] = stack.ts.front();
      continue;
    }
    double lo = stack.ts[(size_t)hit - 1], hi = stack.ts[(size_t)hit];
    double flo = val(hit - 1, node), fhi = val(hit, node);
    for (int it = 0; it < bisect_depth; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = flo + (fhi - flo) * (mid - stack.ts[(size_t)hit - 1]) /
                            (stack.ts[(size_t)hit] - stack.ts[(size_t)hit - 1]);
      if (fm < -eps_mask)
        hi = mid;
      else
        lo = mid;
    }
    arr[node] = 0.5 * (lo + hi);
  }
  return arr;
}

MeasureIdentityReport measure_identity(const EnvelopeField& field, const DensityFn& rho,
                                       double eps_mask) {
  MeasureIdentityReport rep;
  const Grid& g = field.grid;
  const double h2 = g.h * g.h;
  const double t = field.t;
  const cplx z0 = g.injection_point();
  auto in_mask = [&](int i, int j) {
    double v = field.psi.at(i, j);
    return (std::isfinite(v) ? v : -1e30) < -eps_mask;
  };
  // the carried singular part t ln|z-z0|^2 is removed with the same stencil,
  // so only smooth-scale truncation remains
  auto sing_lap = [&](int i, int j) {
    auto lg = [&](int a, int b) { return std::log(std::norm(g.node(a, b) - z0)); };
    return lg(i - 1, j) + lg(i + 1, j) + lg(i, j - 1) + lg(i, j + 1) - 4.0 * lg(i, j);
  };
  for (int j = 2; j < g.ny - 2; ++j)
    for (int i = 2; i < g.nx - 2; ++i) {
      bool all_in = true, all_out = true;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          bool m = in_mask(i + di, j + dj);
          all_in &= m;
          all_out &= !m;
        }
      if (all_in && !g.in_injection_patch(i, j, 3)) {
        double lap = (field.psi.lap5(i, j) - t * sing_lap(i, j)) / h2 / kFourPi;
        if (std::isfinite(lap))
          rep.max_interior = std::max(rep.max_interior, std::abs(rho(g.node(i, j)) + lap));
      } else if (all_out) {
        double lap = field.psi.lap5(i, j) / h2 / kFourPi;
        rep.max_exterior = std::max(rep.max_exterior, std::abs(lap));
      }
    }
  return rep;
}

double band_area(const EnvelopeField& field, double eps_mask, double band) {
  // shallow sliver of the mask next to the free boundary
  const Grid& g = field.grid;
  int count = 0;
  for (int k = 0; k < g.size(); ++k) {
    double v = field.psi[k];
    if (std::isfinite(v) && v < -eps_mask && v > -band) ++count;
  }
  return count * g.h * g.h;
}

}  // namespace hs

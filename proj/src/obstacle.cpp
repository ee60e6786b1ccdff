#include "hsflow/obstacle.hpp"

#include <algorithm>
#include <cmath>

#include "hsflow/errors.hpp"

namespace hs {

namespace {

struct LcpSystem {
  Grid grid;
  std::vector<double> q;    // equation: sum(nbr) - 4 v + q = 0 on the inactive set
  std::vector<double> g;    // obstacle, v <= g
};

// Projected SOR, lexicographic sweeps; v carries Dirichlet frame values fixed.
SolveStats psor(const LcpSystem& sys, Field& v, const EnvelopeOptions& opt) {
  const Grid& gr = sys.grid;
  const int nx = gr.nx, ny = gr.ny;
  const double h2tol = opt.tol * gr.h * gr.h;
  const int limit = opt.sweep_factor * std::max(nx, ny);
  double gscale = 0.0;
  for (int k = 0; k < gr.size(); ++k)
    if (std::isfinite(sys.g[(size_t)k])) gscale = std::max(gscale, std::abs(sys.g[(size_t)k]));
  const double floor_update = 5e-16 * std::max(1.0, gscale);

  SolveStats st;
  double upd = 0.0;
  for (int sweep = 0; sweep < limit; ++sweep) {
    upd = 0.0;
    for (int j = 1; j < ny - 1; ++j) {
      const int row = j * nx;
      for (int i = 1; i < nx - 1; ++i) {
        const int k = row + i;
        double vs = 0.25 * (v.a[(size_t)k - 1] + v.a[(size_t)k + 1] + v.a[(size_t)k - nx] +
                            v.a[(size_t)k + nx] + sys.q[(size_t)k]);
        double vn = v.a[(size_t)k] + opt.omega * (vs - v.a[(size_t)k]);
        if (vn > sys.g[(size_t)k]) vn = sys.g[(size_t)k];
        double d = std::abs(vn - v.a[(size_t)k]);
        if (d > upd) upd = d;
        v.a[(size_t)k] = vn;
      }
    }
    st.sweeps = sweep + 1;
    if (upd < h2tol || upd < floor_update) {
      st.converged = true;
      break;
    }
  }
  st.last_update = upd;
  return st;
}

void finish_stats(const LcpSystem& sys, const Field& v, const Field& psi, Field& residual,
                  SolveStats& st) {
  const Grid& gr = sys.grid;
  const int nx = gr.nx, ny = gr.ny;
  double sum = 0.0, mx = 0.0;
  int count = 0, active = 0, viol = 0;
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      int k = gr.idx(i, j);
      double eq = v.a[(size_t)k - 1] + v.a[(size_t)k + 1] + v.a[(size_t)k - nx] +
                  v.a[(size_t)k + nx] - 4.0 * v.a[(size_t)k] + sys.q[(size_t)k];
      double slack = sys.g[(size_t)k] - v.a[(size_t)k];
      double r = std::min(slack, eq);
      residual.a[(size_t)k] = r;
      if (!gr.in_injection_patch(i, j)) {
        mx = std::max(mx, std::abs(r));
        sum += std::abs(r);
        ++count;
      }
      if (slack > 1e-12 * std::max(1.0, std::abs(sys.g[(size_t)k]))) {
        ++active;
        if (i == 1 || j == 1 || i == nx - 2 || j == ny - 2) st.mask_touches_frame = true;
      }
      if (std::isfinite(psi.a[(size_t)k]) && psi.a[(size_t)k] > 1e-10) ++viol;
    }
  st.max_residual = mx;
  st.mean_residual = count ? sum / count : 0.0;
  st.active_nodes = active;
  st.sign_violations = viol;
}

// Obstacle with the singular part capped on a small disc around the源
// singularity; the cap level is one above the obstacle's maximum on the
// surrounding ring, which leaves the solution untouched.
void apply_cap(const Grid& gr, cplx sing, std::vector<double>& g, double cap_radius) {
  double rcap = cap_radius * gr.h;
  double ring_max = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i) {
      double d = std::abs(gr.node(i, j) - sing);
      if (d >= rcap && d < rcap + 2.5 * gr.h) {
        ring_max = std::max(ring_max, g[(size_t)gr.idx(i, j)]);
        any = true;
      }
    }
  if (!any) return;
  double cap = ring_max + 1.0;
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i) {
      double d = std::abs(gr.node(i, j) - sing);
      int k = gr.idx(i, j);
      if (d < rcap && (g[(size_t)k] > cap || !std::isfinite(g[(size_t)k]))) g[(size_t)k] = cap;
    }
}

EnvelopeField zero_field(double t, const Grid& grid) {
  EnvelopeField f;
  f.t = t;
  f.grid = grid;
  f.psi = Field(grid, 0.0);
  f.vreg = Field(grid, 0.0);
  f.obstacle = Field(grid, 0.0);
  f.residual = Field(grid, 0.0);
  f.stats.converged = true;
  return f;
}

struct ChartSetup {
  LcpSystem sys;
  std::vector<double> alpha;   // singular comparison function on this chart
  cplx sing;                   // its singular point (may be off-grid)
  bool has_sing = false;
};

// alpha = ln|.-sing|^2 - Psi + c on the chart; g = -t*alpha, q = (1-t)*4*pi*rho*h^2.
ChartSetup make_chart(const AreaForm& form, Chart chart, double t, const Grid& grid,
                      double calpha, const EnvelopeOptions& opt) {
  ChartSetup cs;
  cs.sys.grid = grid;
  int n = grid.size();
  cs.sys.q.resize((size_t)n);
  cs.sys.g.resize((size_t)n);
  cs.alpha.resize((size_t)n);
  cplx p = form.injection();
  if (chart == Chart::Z) {
    cs.sing = p;
    cs.has_sing = true;
  } else {
    // z = p maps to w = 1/p; for p = 0 the w-chart sees no singularity
    if (std::abs(p) > 1e-14) {
      cs.sing = 1.0 / p;
      cs.has_sing = grid.contains(cs.sing);
    }
  }
  const double h2 = grid.h * grid.h;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      int k = grid.idx(i, j);
      cplx zz = grid.node(i, j);
      double rho = std::max(0.0, form.chart_density(chart, zz));
      cs.sys.q[(size_t)k] = (1.0 - t) * kFourPi * rho * h2;
      double lg;
      if (chart == Chart::Z) {
        lg = std::log(std::norm(zz - p));
      } else {
        lg = std::log(std::norm(1.0 - p * zz));  // ln|z-p|^2 pulled to the w-chart
      }
      cs.alpha[(size_t)k] = lg - form.chart_potential(chart, zz) + calpha;
      cs.sys.g[(size_t)k] = -t * cs.alpha[(size_t)k];
    }
  if (cs.has_sing) apply_cap(grid, cs.sing, cs.sys.g, opt.cap_radius);
  return cs;
}

double alpha_sup_plane(const AreaForm& form, const Grid& grid) {
  double m = -std::numeric_limits<double>::infinity();
  cplx p = form.injection();
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      cplx zz = grid.node(i, j);
      if (std::abs(zz - p) < 0.5 * grid.h) continue;
      m = std::max(m, std::log(std::norm(zz - p)) - form.potential(zz));
    }
  return m;
}

EnvelopeField run_chart(const AreaForm* form, Chart chart, ChartSetup& cs, double t,
                        const EnvelopeOptions& opt, const EnvelopeField* warm,
                        bool frame_from_g) {
  const Grid& grid = cs.sys.grid;
  EnvelopeField out;
  out.t = t;
  out.grid = grid;
  out.vreg = Field(grid);
  if (warm && warm->vreg.g.nx == grid.nx && warm->vreg.g.ny == grid.ny)
    out.vreg = warm->vreg;
  else
    for (int k = 0; k < grid.size(); ++k) out.vreg[k] = cs.sys.g[(size_t)k];
  // clamp to the obstacle and refresh the frame
  for (int k = 0; k < grid.size(); ++k)
    out.vreg[k] = std::min(out.vreg[k], cs.sys.g[(size_t)k]);
  if (frame_from_g) {
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i)
        if (grid.on_frame(i, j)) out.vreg.at(i, j) = cs.sys.g[(size_t)grid.idx(i, j)];
  }

  out.stats = psor(cs.sys, out.vreg, opt);

  out.psi = Field(grid);
  for (int k = 0; k < grid.size(); ++k) {
    double a = cs.alpha[(size_t)k];
    out.psi[k] = std::isfinite(a) ? out.vreg[k] + t * a : kNegInf;
  }
  if (chart == Chart::Z && grid.i0 >= 0 && t > 0.0) out.psi.at(grid.i0, grid.j0) = kNegInf;
  out.obstacle = Field(grid);
  for (int k = 0; k < grid.size(); ++k) out.obstacle[k] = cs.sys.g[(size_t)k];
  out.residual = Field(grid);
  finish_stats(cs.sys, out.vreg, out.psi, out.residual, out.stats);
  if (!out.stats.converged && opt.throw_on_limit)
    throw IterationLimitError("psor sweep limit reached", out.stats.max_residual);
  (void)form;
  return out;
}

}  // namespace

double mask_epsilon(const EnvelopeOptions& opt) { return 10.0 * opt.tol; }

EnvelopeField solve_envelope(const AreaForm& form, double t, const Grid& grid,
                             const EnvelopeOptions& opt, const EnvelopeField* warm) {
  if (t <= 0.0) return zero_field(t, grid);
  if (opt.density_path || !form.has_potential()) {
    Field rho(grid);
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) rho.at(i, j) = std::max(0.0, form.density(grid.node(i, j)));
    rho.g.i0 = grid.i0;
    rho.g.j0 = grid.j0;
    return solve_envelope_density(rho, form.injection(), t, opt, warm);
  }
  double calpha = -alpha_sup_plane(form, grid);
  ChartSetup cs = make_chart(form, Chart::Z, t, grid, calpha, opt);
  return run_chart(&form, Chart::Z, cs, t, opt, warm, /*frame_from_g=*/true);
}

EnvelopeField solve_envelope_density(const Field& rho, cplx z0, double t,
                                     const EnvelopeOptions& opt, const EnvelopeField* warm) {
  const Grid& grid = rho.g;
  if (t <= 0.0) return zero_field(t, grid);
  ChartSetup cs;
  cs.sys.grid = grid;
  cs.sing = z0;
  cs.has_sing = true;
  int n = grid.size();
  cs.sys.q.resize((size_t)n);
  cs.sys.g.resize((size_t)n);
  cs.alpha.resize((size_t)n);
  const double h2 = grid.h * grid.h;
  for (int k = 0; k < n; ++k) {
    cplx zz = grid.node(k);
    cs.sys.q[(size_t)k] = kFourPi * std::max(0.0, rho[k]) * h2;
    cs.alpha[(size_t)k] = std::log(std::norm(zz - z0));
    cs.sys.g[(size_t)k] = -t * cs.alpha[(size_t)k];
  }
  apply_cap(grid, z0, cs.sys.g, opt.cap_radius);
  return run_chart(nullptr, Chart::Z, cs, t, opt, warm, /*frame_from_g=*/true);
}

SphereEnvelope solve_envelope_sphere(const AreaForm& form, double t,
                                     const SphereChartAtlas& atlas, const EnvelopeOptions& opt,
                                     const SphereEnvelope* warm) {
  SphereEnvelope out;
  if (t > 1.0 + 1e-12) {
    out.minus_infinity = true;
    out.z = zero_field(t, atlas.zgrid);
    out.w = zero_field(t, atlas.wgrid);
    for (auto& x : out.z.psi.a) x = kNegInf;
    for (auto& x : out.w.psi.a) x = kNegInf;
    out.z.minus_infinity = out.w.minus_infinity = true;
    return out;
  }
  if (t <= 0.0) {
    out.z = zero_field(t, atlas.zgrid);
    out.w = zero_field(t, atlas.wgrid);
    return out;
  }

  // shared normalization constant: sup of alpha over both charts
  double sup = -std::numeric_limits<double>::infinity();
  cplx p = form.injection();
  auto scan = [&](const Grid& g, Chart c) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        cplx zz = g.node(i, j);
        double lg = (c == Chart::Z) ? std::log(std::norm(zz - p))
                                    : std::log(std::norm(1.0 - p * zz));
        if (!std::isfinite(lg)) continue;
        sup = std::max(sup, lg - form.chart_potential(c, zz));
      }
  };
  scan(atlas.zgrid, Chart::Z);
  scan(atlas.wgrid, Chart::W);
  double calpha = -sup;

  ChartSetup zc = make_chart(form, Chart::Z, t, atlas.zgrid, calpha, opt);
  ChartSetup wc = make_chart(form, Chart::W, t, atlas.wgrid, calpha, opt);

  EnvelopeOptions inner = opt;
  inner.throw_on_limit = false;

  EnvelopeField zf, wf;
  bool have_warm = warm && warm->z.vreg.g.nx == atlas.zgrid.nx;
  if (have_warm) {
    zf = warm->z;
    wf = warm->w;
  }

  auto set_frame_from = [](Field& vdst, const Grid& gdst, bool dst_is_z, const Field& vsrc) {
    double moved = 0.0;
    for (int j = 0; j < gdst.ny; ++j)
      for (int i = 0; i < gdst.nx; ++i) {
        if (!gdst.on_frame(i, j)) continue;
        cplx q = gdst.node(i, j);
        cplx other = 1.0 / q;  // same point in the opposite chart
        double val = vsrc.bilinear(other);
        moved = std::max(moved, std::abs(val - vdst.at(i, j)));
        vdst.at(i, j) = val;
      }
    (void)dst_is_z;
    return moved;
  };

  if (!have_warm) {
    // first pass starts both charts at the contact state (frames at the obstacle)
    zf = run_chart(&form, Chart::Z, zc, t, inner, nullptr, true);
    wf = run_chart(&form, Chart::W, wc, t, inner, nullptr, true);
  }

  // v is the same global function on both charts, so frames exchange plainly
  double glue_tol = 5.0 * opt.tol * atlas.zgrid.h * atlas.zgrid.h;
  for (int outer = 0; outer < opt.schwarz_max; ++outer) {
    out.outer_iters = outer + 1;
    double m1 = set_frame_from(zf.vreg, atlas.zgrid, true, wf.vreg);
    zf = run_chart(&form, Chart::Z, zc, t, inner, &zf, false);
    double m2 = set_frame_from(wf.vreg, atlas.wgrid, false, zf.vreg);
    wf = run_chart(&form, Chart::W, wc, t, inner, &wf, false);
    if (std::max(m1, m2) < glue_tol && outer >= 1) break;
  }

  if ((!zf.stats.converged || !wf.stats.converged) && opt.throw_on_limit)
    throw IterationLimitError("sphere chart sweep limit reached",
                              std::max(zf.stats.max_residual, wf.stats.max_residual));

  // glue consistency of the envelope itself over the overlap annulus
  double mism = 0.0;
  for (int k = 0; k < 256; ++k) {
    double th = kTwoPi * k / 256.0;
    double r = atlas.overlap_lo + (atlas.overlap_hi - atlas.overlap_lo) * ((k * 13) % 256) / 256.0;
    cplx z = r * std::exp(cplx{0.0, th});
    double a = zf.psi.bilinear(z), b = wf.psi.bilinear(1.0 / z);
    if (std::isfinite(a) && std::isfinite(b)) mism = std::max(mism, std::abs(a - b));
  }
  out.glue_mismatch = mism;
  out.z = std::move(zf);
  out.w = std::move(wf);
  return out;
}

ResidualReport residual_report(const EnvelopeField& field) {
  ResidualReport r;
  r.max_residual = field.stats.max_residual;
  r.mean_residual = field.stats.mean_residual;
  r.active_nodes = field.stats.active_nodes;
  r.sign_violations = field.stats.sign_violations;
  r.converged = field.stats.converged;
  r.sweeps = field.stats.sweeps;
  return r;
}

double c11_proxy(const EnvelopeField& field, double exclude_radius) {
  const Grid& g = field.grid;
  double rex = std::max(exclude_radius, 2.5 * g.h);
  cplx p = g.injection_point();
  double worst = 0.0;
  const double h2 = g.h * g.h;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      if (std::abs(g.node(i, j) - p) < rex) continue;
      double sx = std::abs(field.psi.d2x(i, j)) / h2;
      double sy = std::abs(field.psi.d2y(i, j)) / h2;
      if (std::isfinite(sx)) worst = std::max(worst, sx);
      if (std::isfinite(sy)) worst = std::max(worst, sy);
    }
  return worst;
}

EnvelopeStack build_stack(const AreaForm& form, const Grid& grid, const std::vector<double>& ts,
                          const EnvelopeOptions& opt) {
  EnvelopeStack st;
  st.grid = grid;
  st.ts = ts;
  st.psi.reserve(ts.size());
  EnvelopeField prev;
  bool have_prev = false;
  for (double t : ts) {
    EnvelopeField f = solve_envelope(form, t, grid, opt, have_prev ? &prev : nullptr);
    st.psi.push_back(f.psi);
    prev = std::move(f);
    have_prev = prev.t > 0.0;
  }
  return st;
}

SphereStack build_stack_sphere(const AreaForm& form, const SphereChartAtlas& atlas,
                               const std::vector<double>& ts, const EnvelopeOptions& opt) {
  SphereStack st;
  st.z.grid = atlas.zgrid;
  st.w.grid = atlas.wgrid;
  st.z.ts = st.w.ts = ts;
  SphereEnvelope prev;
  bool have_prev = false;
  for (double t : ts) {
    SphereEnvelope e = solve_envelope_sphere(form, t, atlas, opt, have_prev ? &prev : nullptr);
    st.z.psi.push_back(e.z.psi);
    st.w.psi.push_back(e.w.psi);
    prev = std::move(e);
    have_prev = t > 0.0 && !prev.minus_infinity;
  }
  return st;
}

Field reconstruct_potential(const Field& rho, cplx far_center, double tol, int max_sweeps) {
  const Grid& g = rho.g;
  double m = 0.0;
  for (double v : rho.a) m += std::max(0.0, v);
  m *= g.h * g.h;
  Field phi(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      phi.at(i, j) = m * std::log(std::max(std::norm(g.node(i, j) - far_center), 1e-30));
  const double h2 = g.h * g.h;
  const double om = 1.92;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double upd = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        int k = g.idx(i, j);
        double vs = 0.25 * (phi.a[(size_t)k - 1] + phi.a[(size_t)k + 1] + phi.a[(size_t)k - g.nx] +
                            phi.a[(size_t)k + g.nx] - kFourPi * std::max(0.0, rho.a[(size_t)k]) * h2);
        double vn = phi.a[(size_t)k] + om * (vs - phi.a[(size_t)k]);
        upd = std::max(upd, std::abs(vn - phi.a[(size_t)k]));
        phi.a[(size_t)k] = vn;
      }
    if (upd < tol) break;
  }
  return phi;
}

}  // namespace hs

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsflow/flow.hpp"
#include "hsflow/obstacle.hpp"
#include "hsflow/radial_oracle.hpp"

using namespace hs;

namespace {

double oracle_error(const EnvelopeField& f, const RadialProfile& u, double t) {
  double worst = 0.0;
  const Grid& g = f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.in_injection_patch(i, j, 2)) continue;
      double exact = envelope_value(u, t, g.node(i, j));
      worst = std::max(worst, std::abs(f.psi.at(i, j) - exact));
    }
  return worst;
}

}  // namespace

TEST_CASE("envelope matches the radial construction") {
  QuadraticForm quad;
  const RadialProfile& u = *quad.radial_profile();
  Grid g = Grid::square(2.0, 129);
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  EnvelopeField f = solve_envelope(quad, 0.5, g, opt);
  CHECK(f.stats.converged);
  CHECK(oracle_error(f, u, 0.5) < 4e-3);
  CHECK(f.stats.sign_violations == 0);
  CHECK(!f.stats.mask_touches_frame);
}

TEST_CASE("error order of at least one in h") {
  QuadraticForm quad;
  const RadialProfile& u = *quad.radial_profile();
  EnvelopeOptions opt;
  opt.tol = 1e-9;
  std::vector<double> errs;
  for (int n : {65, 129, 257}) {
    EnvelopeField f = solve_envelope(quad, 0.5, Grid::square(2.0, n), opt);
    errs.push_back(oracle_error(f, u, 0.5));
  }
  double slope = std::log(errs[0] / errs[2]) / std::log(4.0);
  CHECK(slope >= 1.0);
}

TEST_CASE("nonpositive injection time gives the zero envelope") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 65);
  EnvelopeField f = solve_envelope(quad, -0.1, g);
  CHECK(f.psi.max_abs() == 0.0);
  CHECK(residual_report(f).active_nodes == 0);
}

TEST_CASE("time above total sphere mass gives the minus-infinity marker") {
  FubiniStudyForm fs;
  SphereChartAtlas atlas;
  atlas.zgrid = Grid::square(1.6, 33, fs.injection());
  atlas.wgrid = Grid::square(1.6, 33);
  SphereEnvelope e = solve_envelope_sphere(fs, 1.1, atlas);
  CHECK(e.minus_infinity);
  CHECK(e.z.psi[12] == -std::numeric_limits<double>::infinity());
}

TEST_CASE("residual report of a converged run") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 97);
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  EnvelopeField f = solve_envelope(quad, 0.3, g, opt);
  ResidualReport r = residual_report(f);
  CHECK(r.converged);
  CHECK(r.max_residual < 1e-6);
  CHECK(r.active_nodes > 0);
  CHECK(r.sign_violations == 0);
}

TEST_CASE("degenerate density still solves with finite residuals") {
  CornerForm corner;
  Grid g = Grid::square(2.0, 129, corner.drop_center());
  EnvelopeOptions opt;
  opt.tol = 1e-7;
  EnvelopeField f = solve_envelope(corner, 0.05, g, opt);
  CHECK(std::isfinite(f.stats.max_residual));
  CHECK(f.stats.converged);
}

TEST_CASE("second-difference proxy stays bounded for the smooth preset") {
  QuadraticForm quad;
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  for (int n : {129, 257}) {
    EnvelopeField f = solve_envelope(quad, 0.5, Grid::square(2.0, n), opt);
    CHECK(c11_proxy(f, 0.4) < 10.0);
  }
  EnvelopeField z = solve_envelope(quad, -1.0, Grid::square(2.0, 65));
  CHECK(c11_proxy(z) == 0.0);
}

TEST_CASE("monotonicity under enlarging the form") {
  // bigger form means smaller envelope magnitudes and smaller domains
  auto base = std::make_shared<QuadraticForm>();
  ScaledForm bigger(base, 1.5);
  Grid g = Grid::square(2.0, 97);
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  EnvelopeField f1 = solve_envelope(*base, 0.4, g, opt);
  EnvelopeField f2 = solve_envelope(bigger, 0.4, g, opt);
  int bad = 0;
  for (int k = 0; k < g.size(); ++k) {
    if (!std::isfinite(f1.psi[k]) || !std::isfinite(f2.psi[k])) continue;
    if (f1.psi[k] > f2.psi[k] + 1e-6) ++bad;
  }
  CHECK(bad == 0);
  double eps = mask_epsilon(opt);
  auto rho1 = [&](cplx z) { return base->density(z); };
  auto rho2 = [&](cplx z) { return bigger.density(z); };
  FlowDomain d1 = extract_domain(f1, rho1, eps);
  FlowDomain d2 = extract_domain(f2, rho2, eps);
  int leaks = 0;
  for (int k = 0; k < g.size(); ++k)
    if (d2.mask[(size_t)k] && !d1.mask[(size_t)k]) ++leaks;
  CHECK(leaks == 0);
}

TEST_CASE("locality: forms equal near the domain give equal envelopes") {
  QuadraticForm quad;
  // positive perturbation well away from the flow domain
  GaussianBumpForm far_bump(0.05, cplx{1.5, 1.5}, 0.3);
  Grid g = Grid::square(2.0, 97);
  EnvelopeOptions opt;
  opt.tol = 1e-9;
  EnvelopeField f1 = solve_envelope(quad, 0.3, g, opt);
  EnvelopeField f2 = solve_envelope(far_bump, 0.3, g, opt);
  double eps = mask_epsilon(opt);
  FlowDomain d1 = extract_domain(f1, [&](cplx z) { return quad.density(z); }, eps);
  FlowDomain d2 = extract_domain(f2, [&](cplx z) { return far_bump.density(z); }, eps);
  int mask_diff = 0;
  double val_diff = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    mask_diff += d1.mask[(size_t)k] != d2.mask[(size_t)k];
    if (std::isfinite(f1.psi[k]) && d1.mask[(size_t)k])
      val_diff = std::max(val_diff, std::abs(f1.psi[k] - f2.psi[k]));
  }
  CHECK(mask_diff <= 8);
  CHECK(val_diff < 5e-4);
}

TEST_CASE("envelopes nest and are concave in t") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 65);
  EnvelopeOptions opt;
  opt.tol = 1e-9;
  EnvelopeStack st = build_stack(quad, g, linspace(0.0, 0.8, 9), opt);
  int mono_bad = 0, conc_bad = 0;
  for (size_t m = 0; m + 1 < st.ts.size(); ++m)
    for (int k = 0; k < g.size(); ++k) {
      double a = st.psi[m][k], b = st.psi[m + 1][k];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      if (b > a + 1e-8) ++mono_bad;
    }
  for (size_t m = 1; m + 1 < st.ts.size(); ++m)
    for (int k = 0; k < g.size(); ++k) {
      double a = st.psi[m - 1][k], b = st.psi[m][k], c = st.psi[m + 1][k];
      if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) continue;
      if (b < 0.5 * (a + c) - 1e-7) ++conc_bad;
    }
  CHECK(mono_bad == 0);
  CHECK(conc_bad == 0);
}

TEST_CASE("scaling the form rescales the flow") {
  auto base = std::make_shared<QuadraticForm>();
  ScaledForm scaled(base, 2.0);
  Grid g = Grid::square(2.0, 97);
  EnvelopeOptions opt;
  opt.tol = 1e-9;
  double t = 0.4;
  EnvelopeField f1 = solve_envelope(*base, t, g, opt);
  EnvelopeField f2 = solve_envelope(scaled, 2.0 * t, g, opt);
  // psi for 2*omega at time 2t equals 2*psi for omega at time t
  double worst = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    if (!std::isfinite(f1.psi[k])) continue;
    worst = std::max(worst, std::abs(f2.psi[k] - 2.0 * f1.psi[k]));
  }
  CHECK(worst < 2e-3);
  double eps = mask_epsilon(opt);
  FlowDomain d1 = extract_domain(f1, [&](cplx z) { return base->density(z); }, eps);
  FlowDomain d2 = extract_domain(f2, [&](cplx z) { return scaled.density(z); }, eps);
  int mask_diff = 0;
  for (int k = 0; k < g.size(); ++k) mask_diff += d1.mask[(size_t)k] != d2.mask[(size_t)k];
  CHECK(mask_diff <= 8);
}

TEST_CASE("sphere stack matches the radial construction on both charts") {
  FubiniStudyForm fs;
  const RadialProfile& u = *fs.radial_profile();
  SphereChartAtlas atlas;
  atlas.zgrid = Grid::square(2.0, 129, fs.injection());
  atlas.wgrid = Grid::square(1.6, 105);
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  SphereEnvelope e = solve_envelope_sphere(fs, 0.5, atlas, opt);
  CHECK(e.glue_mismatch < 2e-3);
  double worst = 0.0;
  const Grid& gz = atlas.zgrid;
  for (int j = 0; j < gz.ny; ++j)
    for (int i = 0; i < gz.nx; ++i) {
      if (gz.in_injection_patch(i, j, 2)) continue;
      worst =
          std::max(worst, std::abs(e.z.psi.at(i, j) - envelope_value(u, 0.5, gz.node(i, j))));
    }
  CHECK(worst < 5e-3);
  // w-chart: psi at w corresponds to z = 1/w
  double worst_w = 0.0;
  const Grid& gw = atlas.wgrid;
  for (int j = 0; j < gw.ny; ++j)
    for (int i = 0; i < gw.nx; ++i) {
      cplx w = gw.node(i, j);
      if (std::abs(w) < 0.3) continue;  // around the far pole the envelope vanishes anyway
      double exact = envelope_value(u, 0.5, 1.0 / w);
      worst_w = std::max(worst_w, std::abs(e.w.psi.at(i, j) - exact));
    }
  CHECK(worst_w < 5e-3);
}

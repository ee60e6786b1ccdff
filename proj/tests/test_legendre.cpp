#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsflow/legendre.hpp"
#include "hsflow/radial_oracle.hpp"

using namespace hs;

namespace {

// oracle-backed stack: exact radial envelopes sampled on a grid
EnvelopeStack oracle_stack(const AreaForm& form, const Grid& g, const std::vector<double>& ts) {
  EnvelopeStack st;
  st.grid = g;
  st.ts = ts;
  const RadialProfile& u = *form.radial_profile();
  for (double t : ts) {
    Field f(g);
    for (int k = 0; k < g.size(); ++k) f[k] = envelope_value(u, t, g.node(k));
    st.psi.push_back(std::move(f));
  }
  return st;
}

}  // namespace

TEST_CASE("fan of a far-outside node is flat zero") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 33);
  EnvelopeStack st = oracle_stack(quad, g, linspace(0.0, 0.8, 17));
  SupportFan fan = SupportFan::build(st);
  int node = g.idx(1, 1);  // |z| ~ 2.7, far outside every sampled domain
  CHECK(fan.value(node, 0.0) == 0.0);
  CHECK(fan.value(node, 3.0) == doctest::Approx(3.0 * (0.8 - 1.0)));  // deepest line wins late
  CHECK(fan.right_slope(node, 0.0) == doctest::Approx(-0.2));         // capped at the last time
  // with the full mass sampled the slope at the boundary circle is zero
  EnvelopeStack st2 = oracle_stack(quad, g, {0.0, 0.5, 1.0});
  // fake the sphere cap: at t = "mass" the far node still has psi = 0
  SupportFan fan2 = SupportFan::build(st2);
  CHECK(fan2.right_slope(node, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("fan at the injection node is the slope -1 ray") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 33);
  EnvelopeStack st = oracle_stack(quad, g, linspace(0.0, 0.8, 17));
  SupportFan fan = SupportFan::build(st);
  int node = g.idx(g.i0, g.j0);
  CHECK(fan.line_count(node) == 1);
  for (double s : {0.0, 1.0, 5.0}) CHECK(fan.value(node, s) == doctest::Approx(-s));
  CHECK(fan.right_slope(node, 2.0) == doctest::Approx(-1.0));
  Field arr = fan.arrival();
  CHECK(arr.at(g.i0, g.j0) == doctest::Approx(0.0));
}

TEST_CASE("fan value is the max over sampled support lines") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 65);
  std::vector<double> ts = linspace(0.0, 0.9, 46);
  EnvelopeStack st = oracle_stack(quad, g, ts);
  SupportFan fan = SupportFan::build(st);
  const RadialProfile& u = *quad.radial_profile();
  cplx z{0.5, 0.0};
  int i = (int)std::lround((z.real() - g.x0) / g.h);
  int j = (int)std::lround((z.imag() - g.y0) / g.h);
  int node = g.idx(i, j);
  cplx zn = g.node(i, j);
  for (double s : {0.3, 1.0, 2.5}) {
    double expect = -1e300;
    for (double t : ts)
      expect = std::max(expect, envelope_value(u, t, zn) - (1.0 - t) * s);
    CHECK(fan.value(node, s) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("duality round trip is exact at sampled times") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 65);
  std::vector<double> ts = linspace(0.0, 0.9, 46);
  EnvelopeStack st = oracle_stack(quad, g, ts);
  SupportFan fan = SupportFan::build(st);
  double worst = 0.0;
  for (size_t k = 0; k < ts.size(); ++k) {
    Field rec = fan.inverse_field(ts[k]);
    for (int node = 0; node < g.size(); ++node) {
      double orig = st.psi[k][node];
      if (!std::isfinite(orig)) continue;
      worst = std::max(worst, std::abs(rec[node] - orig));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("inverse at unsampled times matches the construction") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 65);
  std::vector<double> ts = linspace(0.0, 0.9, 46);
  double spacing = ts[1] - ts[0];
  EnvelopeStack st = oracle_stack(quad, g, ts);
  SupportFan fan = SupportFan::build(st);
  const RadialProfile& u = *quad.radial_profile();
  double t = 0.5 * (ts[20] + ts[21]);
  Field rec = fan.inverse_field(t);
  double worst = 0.0;
  for (int node = 0; node < g.size(); ++node) {
    double exact = envelope_value(u, t, g.node(node));
    if (!std::isfinite(exact)) continue;
    worst = std::max(worst, std::abs(rec[node] - exact));
  }
  // bounded by spacing times the time-derivative scale of the envelope
  CHECK(worst < spacing * 1.5);
  CHECK(worst > 0.0);
  // t = 0 recovers zero where psi_0 = 0
  Field rec0 = fan.inverse_field(0.0);
  CHECK(std::abs(rec0.at(5, 5)) < 1e-14);
}

TEST_CASE("hamiltonian values at plain points") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 129);
  std::vector<double> ts = linspace(0.0, 0.95, 96);
  EnvelopeStack st = oracle_stack(quad, g, ts);
  SupportFan fan = SupportFan::build(st);
  // node with |z|^2 = 0.49 arrives at t = 0.49: H(.,1) = -0.51
  cplx z{0.7, 0.0};
  int node = g.idx((int)std::lround((z.real() - g.x0) / g.h),
                   (int)std::lround((z.imag() - g.y0) / g.h));
  double a = std::norm(g.node(node));
  CHECK(fan.right_slope(node, 0.0) == doctest::Approx(a - 1.0).epsilon(0.03));
  // large s: slope settles at arrival - 1
  CHECK(fan.right_slope(node, 25.0) == doctest::Approx(a - 1.0).epsilon(0.03));
  Field arr = fan.arrival();
  double worst = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    cplx p = g.node(k);
    if (std::norm(p) > 0.9 || g.in_injection_patch(k % g.nx, k / g.nx, 2)) continue;
    worst = std::max(worst, std::abs(arr[k] - std::norm(p)));
  }
  CHECK(worst < (ts[1] - ts[0]) + 1e-3);
}

TEST_CASE("fan slopes are nondecreasing within [-1, 0] and values bounded") {
  FubiniStudyForm fs;
  Grid g = Grid::square(1.5, 49);
  EnvelopeStack st = oracle_stack(fs, g, linspace(0.0, 1.0, 26));
  SupportFan fan = SupportFan::build(st);
  for (int node = 0; node < g.size(); node += 3) {
    double prev = -1.0 - 1e-12;
    for (int l = 0; l < fan.line_count(node); ++l) {
      double m = fan.line_slope(node, l);
      CHECK(m >= prev);
      CHECK(m <= 1e-12);
      CHECK(m >= -1.0 - 1e-12);
      prev = m;
    }
    for (double s : {0.0, 0.7, 2.0, 6.0}) {
      double v = fan.value(node, s);
      CHECK(v <= 1e-12);
      CHECK(v >= -s - 1e-9);
    }
  }
}

TEST_CASE("active support line is consistent with its time sample") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 49);
  std::vector<double> ts = linspace(0.0, 0.9, 31);
  EnvelopeStack st = oracle_stack(quad, g, ts);
  SupportFan fan = SupportFan::build(st);
  const RadialProfile& u = *quad.radial_profile();
  for (int node = 100; node < g.size(); node += 517) {
    for (double s : {0.2, 1.1, 3.7}) {
      int l = fan.active_line(node, s);
      double tk = fan.line_time(node, l);
      double expect = envelope_value(u, tk, g.node(node)) - (1.0 - tk) * s;
      if (!std::isfinite(expect)) continue;
      CHECK(fan.value(node, s) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("mixed-determinant residual vanishes on the flat region and shrinks") {
  QuadraticForm quad;
  auto rho = [&](cplx z) { return quad.density(z); };
  MaResidualReport coarse, fine;
  {
    Grid g = Grid::square(2.0, 65);
    EnvelopeStack st = oracle_stack(quad, g, linspace(0.0, 0.9, 31));
    coarse = ma_residual(SupportFan::build(st), rho, {0.5, 1.5}, 0.1);
  }
  {
    Grid g = Grid::square(2.0, 129);
    EnvelopeStack st = oracle_stack(quad, g, linspace(0.0, 0.9, 121));
    fine = ma_residual(SupportFan::build(st), rho, {0.5, 1.5}, 0.05);
  }
  CHECK(coarse.max_flat == 0.0);
  CHECK(fine.max_flat == 0.0);
  CHECK(fine.mean_abs < coarse.mean_abs);
}

TEST_CASE("modulus report is quiet for a smooth arrival field") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 65);
  EnvelopeStack st = oracle_stack(quad, g, linspace(0.0, 0.95, 96));
  Field arr = SupportFan::build(st).arrival();
  HModulusReport rep = h_modulus(arr, 0.1);
  CHECK(rep.flags.empty());
  CHECK(rep.lipschitz < 10.0);
  CHECK(rep.max_step[0] <= rep.max_step[2] + 1e-12);
}

TEST_CASE("twist normalization constant") {
  TwistedBoundaryData data;
  CHECK(data.c_of_r(1.0) == doctest::Approx(0.0));
  // closed form: c(r) = -1 - r^2 ln(r^2) / (1 - r^2)
  double r = 0.5;
  double closed = -1.0 - r * r * std::log(r * r) / (1.0 - r * r);
  CHECK(data.c_of_r(r) == doctest::Approx(closed).epsilon(1e-6));
  CHECK(data.phi(cplx{0.3, 0.1}, cplx{1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("twisted values recover the boundary data at |tau| = 1") {
  FubiniStudyForm fs;
  Grid g = Grid::square(1.5, 49);
  EnvelopeStack st = oracle_stack(fs, g, linspace(0.0, 1.0, 26));
  SupportFan fan = SupportFan::build(st);
  TwistedBoundaryData data;
  cplx tau = std::exp(cplx{0.0, 0.7});
  Field phi_field = twist_to_disc(fan, data, tau);
  double worst = 0.0;
  for (int k = 0; k < g.size(); ++k)
    worst = std::max(worst, std::abs(phi_field[k] - data.phi(g.node(k), tau)));
  CHECK(worst < 1e-9);
  CHECK_THROWS_AS(twist_to_disc(fan, data, cplx{0.0, 0.0}), DomainError);
}

TEST_CASE("degenerate fan input is rejected") {
  QuadraticForm quad;
  Grid g = Grid::square(2.0, 9);
  EnvelopeStack st = oracle_stack(quad, g, {0.5});
  CHECK_THROWS_AS(SupportFan::build(st), UnsupportedError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsflow/flow.hpp"
#include "hsflow/radial_oracle.hpp"

using namespace hs;

namespace {

struct RadialRun {
  QuadraticForm form;
  Grid g;
  EnvelopeOptions opt;
  double eps;
  RadialRun(int n = 193, double tol = 1e-8) : g(Grid::square(2.0, n)) {
    opt.tol = tol;
    eps = mask_epsilon(opt);
  }
  DensityFn rho() const {
    return [this](cplx z) { return form.density(z); };
  }
  FlowDomain domain(double t) {
    EnvelopeField f = solve_envelope(form, t, g, opt);
    return extract_domain(f, rho(), eps);
  }
};

}  // namespace

TEST_CASE("extracted disc radius and weighted area") {
  RadialRun run;
  FlowDomain d = run.domain(0.25);
  CHECK(d.components == 1);
  CHECK(d.holes == 0);
  CHECK(d.area_omega == doctest::Approx(0.25).epsilon(0.01));
  REQUIRE(d.loops.size() == 1);
  for (cplx p : d.loops[0]) CHECK(std::abs(p) == doctest::Approx(0.5).epsilon(2.5 * run.g.h / 0.5));
}

TEST_CASE("nonpositive time gives the empty domain") {
  RadialRun run(97);
  FlowDomain d = run.domain(-0.5);
  CHECK(d.area_omega == 0.0);
  CHECK(d.components == 0);
  CHECK(d.loops.empty());
}

TEST_CASE("nesting over a time grid") {
  RadialRun run(129);
  std::vector<FlowDomain> doms;
  for (double t : linspace(0.1, 0.9, 9)) doms.push_back(run.domain(t));
  NestingReport rep = nesting_check(doms);
  CHECK(rep.nested);
  // radii sqrt(t): the slowest boundary speed over the grid is about
  // d(sqrt t)/dt at t = 0.9
  CHECK(rep.min_delta > 0.25);
  CHECK(rep.min_delta < 2.0);
  std::vector<FlowDomain> single{doms[0]};
  CHECK(nesting_check(single).nested);
}

TEST_CASE("moments of the radial domain") {
  RadialRun run;
  FlowDomain d = run.domain(0.5);
  auto M = moments(d, run.rho(), 2);
  CHECK(M[0].real() == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(M[1]) < 1e-3);
  CHECK(M[0].real() == doctest::Approx(d.area_omega).epsilon(1e-12));
}

TEST_CASE("moments with a shifted injection point") {
  QuadraticForm form;
  form.set_injection(cplx{0.3, 0.0});
  Grid g = Grid::square(2.0, 193, form.injection());
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  EnvelopeField f = solve_envelope(form, 0.4, g, opt);
  FlowDomain d = extract_domain(f, [&](cplx z) { return form.density(z); }, mask_epsilon(opt));
  auto M = moments(d, [&](cplx z) { return form.density(z); }, 1);
  CHECK(M[0].real() == doctest::Approx(0.4).epsilon(0.01));
  CHECK(M[1].real() == doctest::Approx(0.3 * 0.4).epsilon(0.02));
  CHECK(std::abs(M[1].imag()) < 2e-3);
}

TEST_CASE("log-kernel potential reproduces the envelope") {
  RadialRun run;
  FlowDomain d = run.domain(0.5);
  const RadialProfile& u = *run.form.radial_profile();
  // interior point |z|^2 = 0.25
  double got = gustafsson_potential(d, run.rho(), cplx{0.5, 0.0});
  CHECK(got == doctest::Approx(envelope_value(u, 0.5, cplx{0.5, 0.0})).epsilon(0.05));
  CHECK(std::abs(got - -0.0965735903) < 1.2e-2);  // 5e-3 at the acceptance grid
  // far outside: potential vanishes
  CHECK(std::abs(gustafsson_potential(d, run.rho(), cplx{1.8, 0.4})) < 2.5e-2);
  // strictly negative inside
  CHECK(gustafsson_potential(d, run.rho(), cplx{0.3, 0.2}) < -1e-3);
}

TEST_CASE("exterior quadrature identity") {
  RadialRun run;
  FlowDomain d = run.domain(0.5);
  std::vector<cplx> samples;
  for (int k = 0; k < 12; ++k) samples.push_back(1.5 * std::exp(cplx{0.0, kTwoPi * k / 12}));
  samples.push_back(cplx{0.1, 0.0});  // interior: must be skipped
  QuadratureIdentityReport rep = quadrature_identity_check(d, run.rho(), samples);
  CHECK(rep.used == 12);
  CHECK(rep.skipped == 1);
  CHECK(rep.max_deviation < 1.5e-2);  // 5e-3 at the acceptance grid
}

TEST_CASE("quadrature identity on the empty domain") {
  RadialRun run(97);
  FlowDomain d = run.domain(0.0);
  QuadratureIdentityReport rep =
      quadrature_identity_check(d, run.rho(), {cplx{1.0, 1.0}, cplx{-1.2, 0.3}});
  CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("direct arrival times") {
  QuadraticForm form;
  Grid g = Grid::square(2.0, 129);
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  EnvelopeStack st = build_stack(form, g, linspace(0.0, 0.95, 96), opt);
  Field arr = arrival_direct(st, mask_epsilon(opt));
  // arrival at z equals |z|^2 up to the grid-limited free-boundary resolution
  double t_spacing = 0.95 / 95.0;
  for (cplx z : {cplx{0.7, 0.0}, cplx{0.0, 0.5}, cplx{0.4, 0.4}}) {
    double got = arr.bilinear(z);
    CHECK(std::abs(got - std::norm(z)) < t_spacing + 1.2 * g.h);
  }
  // the injection node arrives immediately
  CHECK(arr.at(g.i0, g.j0) < t_spacing);
  // far nodes are capped at the last sampled time
  CHECK(arr.at(1, 1) == doctest::Approx(0.95));
}

TEST_CASE("discrete measure identity") {
  RadialRun run;
  EnvelopeField f = solve_envelope(run.form, 0.5, run.g, run.opt);
  MeasureIdentityReport rep = measure_identity(f, run.rho(), run.eps);
  CHECK(rep.max_interior < 2e-3);
  CHECK(rep.max_exterior < 2e-3);
}

TEST_CASE("boundary band thins under refinement") {
  QuadraticForm form;
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  std::vector<double> areas;
  for (int n : {65, 129, 257}) {
    Grid g = Grid::square(2.0, n);
    EnvelopeField f = solve_envelope(form, 0.5, g, opt);
    areas.push_back(band_area(f, mask_epsilon(opt), 2.0 * g.h * g.h));
  }
  CHECK(areas[2] < areas[0]);
  CHECK(areas[2] < 0.2);
}

TEST_CASE("connected single component for smooth presets") {
  GaussianBumpForm bump;
  Grid g = Grid::square(2.0, 129);
  EnvelopeOptions opt;
  opt.tol = 1e-8;
  for (double t : {0.2, 0.5, 0.8}) {
    EnvelopeField f = solve_envelope(bump, t, g, opt);
    FlowDomain d = extract_domain(f, [&](cplx z) { return bump.density(z); }, mask_epsilon(opt));
    CHECK(d.components == 1);
    CHECK(d.holes == 0);
  }
}

TEST_CASE("contour loops are closed and consistent") {
  RadialRun run(129);
  FlowDomain d = run.domain(0.36);
  REQUIRE(d.loops.size() == 1);
  const auto& loop = d.loops[0];
  CHECK(loop.size() > 40);
  // consecutive points stay within a couple of cells
  for (size_t k = 0; k < loop.size(); ++k)
    CHECK(std::abs(loop[(k + 1) % loop.size()] - loop[k]) < 3.0 * run.g.h);
  CHECK(d.perimeter == doctest::Approx(kTwoPi * 0.6).epsilon(0.05));
}

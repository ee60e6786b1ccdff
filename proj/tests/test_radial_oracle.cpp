#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsflow/area_form.hpp"
#include "hsflow/radial_oracle.hpp"

using namespace hs;

TEST_CASE("breakpoints for the standard profiles") {
  QuadraticForm quad;
  const RadialProfile& u = *quad.radial_profile();
  CHECK(breakpoint(u, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(breakpoint(u, 1.0) == doctest::Approx(0.0).epsilon(1e-10));

  FubiniStudyForm fs;
  // e^{-s}/(1+e^{-s}) = 1/2 at s = 0
  CHECK(breakpoint(*fs.radial_profile(), 0.5) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("breakpoint rejects t outside range") {
  QuadraticForm quad;
  CHECK_THROWS_AS(breakpoint(*quad.radial_profile(), -0.1), NoBreakpointError);
  FubiniStudyForm fs;
  CHECK_THROWS_AS(breakpoint(*fs.radial_profile(), 1.5), NoBreakpointError);
}

TEST_CASE("envelope values against the closed form") {
  QuadraticForm quad;
  const RadialProfile& u = *quad.radial_profile();
  // t ln(|z|^2/t) + t - |z|^2 inside the domain
  double t = 0.5;
  double expect = t * std::log(0.25 / t) + t - 0.25;
  cplx z{0.5, 0.0};  // |z|^2 = 0.25
  CHECK(envelope_value(u, t, z) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(-0.0965735903).epsilon(1e-8));

  CHECK(envelope_value(u, t, cplx{std::sqrt(0.75), 0.0}) == doctest::Approx(0.0));
  CHECK(envelope_value(u, t, cplx{std::sqrt(0.5), 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(envelope_value(u, t, cplx{0.0, 0.0}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("domain radii") {
  QuadraticForm quad;
  const RadialProfile& u = *quad.radial_profile();
  CHECK(domain_radius(u, 0.25) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(domain_radius(u, 1e-6) == doctest::Approx(1e-3).epsilon(1e-6));
  FubiniStudyForm fs;
  CHECK(domain_radius(*fs.radial_profile(), 0.5) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("weighted area of the domain equals t") {
  // integrate rho over |z| < radius: for radial forms the enclosed mass has
  // the closed form -u'(s0)
  for (auto* form : {(const AreaForm*)new QuadraticForm(), (const AreaForm*)new FubiniStudyForm(),
                     (const AreaForm*)new QuarticForm()}) {
    const RadialProfile& u = *form->radial_profile();
    for (double t : {0.2, 0.5, 0.8}) {
      double R = domain_radius(u, t);
      double area = simpson([&](double r) { return form->density(cplx{r, 0.0}) * kTwoPi * r; },
                            0.0, R, 4000);
      CHECK(area == doctest::Approx(t).epsilon(1e-6));
    }
    delete form;
  }
}

TEST_CASE("envelope minus t ln|z|^2 stays bounded near the origin") {
  QuadraticForm quad;
  const RadialProfile& u = *quad.radial_profile();
  double t = 0.4;
  double lo = 1e300, hi = -1e300;
  for (double r = 1e-6; r <= 1e-2; r *= 1.7) {
    double v = envelope_value(u, t, cplx{r, 0.0}) - t * std::log(r * r);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(std::isfinite(lo));
  CHECK(std::isfinite(hi));
  CHECK(hi - lo < 1.0);
  CHECK(hi < 1.0);
}

TEST_CASE("envelope is concave and nonincreasing in t") {
  FubiniStudyForm fs;
  const RadialProfile& u = *fs.radial_profile();
  cplx z{0.6, 0.3};
  std::vector<double> ts = linspace(0.05, 0.95, 31);
  std::vector<double> vals;
  for (double t : ts) vals.push_back(envelope_value(u, t, z));
  for (size_t k = 0; k + 1 < vals.size(); ++k) CHECK(vals[k + 1] <= vals[k] + 1e-12);
  for (size_t k = 1; k + 1 < vals.size(); ++k)
    CHECK(vals[k] >= 0.5 * (vals[k - 1] + vals[k + 1]) - 1e-10);
}

#include "hsflow/area_form.hpp"

#include <cmath>

namespace hs {

namespace {

double smoothstep5(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

// Smooth max blend: (a + b + sqrt((a-b)^2 + delta^2)) / 2.
double smooth_max(double a, double b, double delta) {
  if (a < b - 50.0) return b;
  if (b < a - 50.0) return a;
  double d = a - b;
  return 0.5 * (a + b + std::sqrt(d * d + delta * delta));
}

}  // namespace

QuadraticForm::QuadraticForm() {
  profile_.u = [](double s) { return std::exp(-s); };
  profile_.du = [](double s) { return -std::exp(-s); };
}

QuarticForm::QuarticForm() {
  profile_.u = [](double s) { return 0.5 * std::exp(-2.0 * s); };
  profile_.du = [](double s) { return -std::exp(-2.0 * s); };
}

FubiniStudyForm::FubiniStudyForm() {
  profile_.u = [](double s) { return std::log1p(std::exp(-s)); };
  profile_.du = [](double s) { return -std::exp(-s) / (1.0 + std::exp(-s)); };
}

GaussianBumpForm::GaussianBumpForm(double amp, cplx b, double sigma)
    : amp_(amp), sigma_(sigma), b_(b) {}

double GaussianBumpForm::potential(cplx z) const {
  return std::norm(z) + amp_ * std::exp(-std::norm(z - b_) / (sigma_ * sigma_));
}

double GaussianBumpForm::density(cplx z) const {
  double d2 = std::norm(z - b_);
  double s2 = sigma_ * sigma_;
  double g = std::exp(-d2 / s2);
  double lap = 4.0 + amp_ * g * (4.0 * d2 / (s2 * s2) - 4.0 / s2);
  return lap / kFourPi;
}

// ---- radial potential tables ----------------------------------------------

double RadialPotentialTable::value(double rad) const {
  if (r.empty()) throw UnsupportedError("empty radial table");
  if (rad <= r.front()) return phi.front();
  if (rad >= r.back()) return phi.back();
  size_t k = (size_t)((rad - r.front()) / (r[1] - r[0]));
  k = std::min(k, r.size() - 2);
  double s = (rad - r[k]) / (r[k + 1] - r[k]);
  return phi[k] * (1 - s) + phi[k + 1] * s;
}

double RadialPotentialTable::enclosed_mass(double rad) const {
  if (rad <= r.front()) return mass.front();
  if (rad >= r.back()) return mass.back();
  size_t k = (size_t)((rad - r.front()) / (r[1] - r[0]));
  k = std::min(k, r.size() - 2);
  double s = (rad - r[k]) / (r[k + 1] - r[k]);
  return mass[k] * (1 - s) + mass[k + 1] * s;
}

RadialPotentialTable build_radial_potential(const std::function<double(double)>& rho_r,
                                            double rmax, int n, double phi0) {
  RadialPotentialTable t;
  t.r.resize((size_t)n);
  t.phi.resize((size_t)n);
  t.mass.resize((size_t)n);
  double dr = rmax / (n - 1);
  t.r[0] = 0.0;
  t.phi[0] = phi0;
  t.mass[0] = 0.0;
  double prev_rho = rho_r(1e-12);
  for (int k = 1; k < n; ++k) {
    double rk = k * dr;
    double rhok = rho_r(rk);
    // dM = 2 pi rho r dr, trapezoid
    t.mass[(size_t)k] = t.mass[(size_t)k - 1] +
                        kPi * dr * (prev_rho * (rk - dr) + rhok * rk);
    // dphi = 2 M / r dr; M(r) ~ c r^2 near 0 so the integrand vanishes there
    double f_prev = (rk - dr) > 0 ? 2.0 * t.mass[(size_t)k - 1] / (rk - dr) : 0.0;
    double f_cur = 2.0 * t.mass[(size_t)k] / rk;
    t.phi[(size_t)k] = t.phi[(size_t)k - 1] + 0.5 * dr * (f_prev + f_cur);
    t.r[(size_t)k] = rk;
    prev_rho = rhok;
  }
  return t;
}

// ---- annulus form ---------------------------------------------------------

AnnulusSphereForm::AnnulusSphereForm(double r1, double r2, double channel_mass,
                                     double blend_width)
    : r1_(r1), r2_(r2), bw_(blend_width) {
  auto fs = [](double r) {
    double q = 1.0 + r * r;
    return 1.0 / (kPi * q * q);
  };
  // mass of the window against the FS form, and FS normalization constants
  auto wfun = [this](double r) { return window(r); };
  double m_window = simpson([&](double r) { return wfun(r) * fs(r) * kTwoPi * r; },
                            0.0, r2_ + 4.0 * bw_ + 1.0, 4000);
  beta_in_ = channel_mass / m_window;
  beta_out_ = (1.0 - beta_in_ * m_window) / (1.0 - m_window);

  auto rho_r = [this](double r) { return density_radial(r); };
  double rmax_z = 12.0;
  ztable_ = build_radial_potential(rho_r, rmax_z, 12000, 0.0);

  // w-chart table: enclosed mass at |w|<s is 1 - M_z(1/s); beyond the z-table
  // the density is exactly beta_out * FS so the tail mass is closed-form.
  auto mass_z = [this, rmax_z](double r) {
    if (r <= rmax_z) return ztable_.enclosed_mass(r);
    double fs_tail = r * r / (1.0 + r * r) - rmax_z * rmax_z / (1.0 + rmax_z * rmax_z);
    return ztable_.enclosed_mass(rmax_z) + beta_out_ * fs_tail;
  };
  int nw = 12000;
  double wmax = 12.0, dw = wmax / (nw - 1);
  wtable_.r.resize((size_t)nw);
  wtable_.phi.resize((size_t)nw);
  wtable_.mass.resize((size_t)nw);
  wtable_.r[0] = 0.0;
  wtable_.phi[0] = 0.0;
  wtable_.mass[0] = 0.0;
  for (int k = 1; k < nw; ++k) {
    double s = k * dw;
    wtable_.r[(size_t)k] = s;
    wtable_.mass[(size_t)k] = 1.0 - mass_z(1.0 / s);
    double f_prev = (k == 1) ? 0.0 : 2.0 * wtable_.mass[(size_t)k - 1] / (s - dw);
    double f_cur = 2.0 * wtable_.mass[(size_t)k] / s;
    wtable_.phi[(size_t)k] = wtable_.phi[(size_t)k - 1] + 0.5 * dw * (f_prev + f_cur);
  }
  // gauge: Psi_w(1) = Psi_z(1) since ln|w|^2 = 0 there
  wgauge_ = ztable_.value(1.0) - wtable_.value(1.0);
}

double AnnulusSphereForm::window(double r) const {
  double up = smoothstep5((r - r1_ + bw_) / (2.0 * bw_));
  double dn = smoothstep5((r2_ + bw_ - r) / (2.0 * bw_));
  return up * dn;
}

double AnnulusSphereForm::density_radial(double r) const {
  double q = 1.0 + r * r;
  double fs = 1.0 / (kPi * q * q);
  return fs * (beta_out_ + (beta_in_ - beta_out_) * window(r));
}

double AnnulusSphereForm::density_w(cplx w) const {
  double s = std::abs(w);
  double q = 1.0 + s * s;
  double fs_w = 1.0 / (kPi * q * q);
  double r = s > 1e-14 ? 1.0 / s : 1e14;
  return fs_w * (beta_out_ + (beta_in_ - beta_out_) * window(r));
}

double AnnulusSphereForm::potential_w(cplx w) const {
  return wtable_.value(std::abs(w)) + wgauge_;
}

// ---- slit form ------------------------------------------------------------

SlitSphereForm::SlitSphereForm(double eps, double blend_delta, double fs_drop)
    : eps_(eps), delta_(blend_delta), C_(fs_drop) {}

double SlitSphereForm::slit_term(cplx w) const {
  double x = std::norm(w);
  double ab = x > 1.0 ? std::exp(-1.0 / (x - 1.0)) : 0.0;
  double u = ab + w.imag() * w.imag();
  // cutoff: 1 for |w|^2 <= 4, decays to 0 by |w|^2 = 6.25
  double bump = 1.0 - smoothstep5((x - 4.0) / 2.25);
  return eps_ * u * bump;
}

double SlitSphereForm::potential_w(cplx w) const {
  return smooth_max(slit_term(w), std::log1p(std::norm(w)) - C_, delta_);
}

double SlitSphereForm::potential(cplx z) const {
  double n2 = std::norm(z);
  double fs_branch = std::log1p(n2) - C_;
  if (n2 < 1e-14) return fs_branch;
  cplx w = 1.0 / z;
  return smooth_max(slit_term(w) + std::log(n2), fs_branch, delta_);
}

namespace {
double numeric_density(const std::function<double(cplx)>& pot, cplx p, double step) {
  double lap = pot(p + cplx{step, 0}) + pot(p - cplx{step, 0}) + pot(p + cplx{0, step}) +
               pot(p - cplx{0, step}) - 4.0 * pot(p);
  return lap / (step * step) / kFourPi;
}
}  // namespace

double SlitSphereForm::density(cplx z) const {
  return numeric_density([this](cplx p) { return potential(p); }, z, 2e-4);
}

double SlitSphereForm::density_w(cplx w) const {
  return numeric_density([this](cplx p) { return potential_w(p); }, w, 2e-4);
}

// ---- corner form ----------------------------------------------------------

CornerForm::CornerForm(cplx center, double radius, double corner_angle)
    : center_(center), radius_(radius), half_angle_(0.5 * corner_angle) {
  // apex distance so the tangent wedge opens at the requested angle
  double d = radius_ / std::sin(half_angle_);
  apex_ = center_ + cplx{d, 0.0};
  double beta = 0.5 * kPi - half_angle_;  // tangency direction seen from the center
  t1_ = center_ + radius_ * std::exp(cplx{0.0, beta});
  t2_ = center_ + radius_ * std::exp(cplx{0.0, -beta});
}

bool CornerForm::inside_drop(cplx z) const {
  if (std::abs(z - center_) <= radius_) return true;
  // triangle (apex, t1, t2) via half-plane tests (t1 above axis, t2 below)
  auto side = [](cplx a, cplx b, cplx p) {
    cplx u = b - a, v = p - a;
    return u.real() * v.imag() - u.imag() * v.real();
  };
  double s1 = side(apex_, t1_, z);
  double s2 = side(t1_, t2_, z);
  double s3 = side(t2_, apex_, z);
  return (s1 <= 0 && s2 <= 0 && s3 <= 0) || (s1 >= 0 && s2 >= 0 && s3 >= 0);
}

double CornerForm::perimeter() const {
  double beta = 0.5 * kPi - half_angle_;
  double arc = radius_ * (2.0 * kPi - 2.0 * beta);
  double leg = std::abs(apex_ - t1_);
  return arc + 2.0 * leg;
}

// ---- grid density form ----------------------------------------------------

GridDensityForm::GridDensityForm(Field rho, std::string label)
    : rho_(std::move(rho)), label_(std::move(label)) {}

double GridDensityForm::potential(cplx z) const {
  if (phi_.g.nx == 0) throw UnsupportedError(label_ + ": potential not reconstructed");
  return phi_.bilinear(z);
}

// ---- scaling wrapper -------------------------------------------------------

ScaledForm::ScaledForm(FormPtr base, double lambda) : base_(std::move(base)), lambda_(lambda) {
  injection_ = base_->injection();
  support_half_ = base_->support_half();
  if (const RadialProfile* p = base_->radial_profile()) {
    double lam = lambda_;
    auto u = p->u, du = p->du;
    scaled_profile_.u = [u, lam](double s) { return lam * u(s); };
    scaled_profile_.du = [du, lam](double s) { return lam * du(s); };
    scaled_profile_.smin = p->smin;
    scaled_profile_.smax = p->smax;
  }
}

// ---- operations ------------------------------------------------------------

double density_at(const AreaForm& form, cplx z) {
  if (form.geometry() == Geometry::Plane) {
    double half = form.support_half();
    if (std::abs(z.real()) > half || std::abs(z.imag()) > half)
      throw DomainError(form.name() + ": point outside configured support region");
  }
  double rho = form.density(z);
  return std::max(rho, 0.0);
}

double total_mass_plane(const AreaForm& form, double half, int n) {
  double h = 2.0 * half / n;
  double sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cplx c{-half + (i + 0.5) * h, -half + (j + 0.5) * h};
      sum += form.density(c);
    }
  return sum * h * h;
}

double total_mass_sphere(const AreaForm& form, int n, double half) {
  double h = 2.0 * half / n;
  double sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cplx c{-half + (i + 0.5) * h, -half + (j + 0.5) * h};
      if (std::abs(c) < 1.0) sum += form.density(c);   // z-chart half
      if (std::abs(c) <= 1.0) sum += form.density_w(c);  // w-chart half
    }
  return sum * h * h;
}

double total_mass(const AreaForm& form, int n) {
  if (form.geometry() == Geometry::Sphere) return total_mass_sphere(form, n);
  return total_mass_plane(form, form.support_half(), n);
}

const RadialProfile& radial_profile_of(const AreaForm& form) {
  const RadialProfile* p = form.radial_profile();
  if (!p) throw UnsupportedError(form.name() + ": not declared radially symmetric");
  return *p;
}

double growth_margin(const AreaForm& form, double t, double R, int nsamples) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < nsamples; ++k) {
    double th = kTwoPi * k / nsamples;
    cplx z = R * std::exp(cplx{0.0, th});
    best = std::min(best, form.potential(z) - t * std::log(R * R));
  }
  return best;
}

double chart_density_mismatch(const AreaForm& form, const SphereChartAtlas& atlas, int nsamples) {
  double worst = 0.0;
  for (int k = 0; k < nsamples; ++k) {
    double th = kTwoPi * k / nsamples;
    double r = atlas.overlap_lo +
               (atlas.overlap_hi - atlas.overlap_lo) * ((k * 7) % nsamples) / (double)nsamples;
    cplx z = r * std::exp(cplx{0.0, th});
    double expect = form.density(z) * std::pow(std::abs(z), 4.0);  // rho_w via transition
    double got = form.density_w(1.0 / z);
    worst = std::max(worst, std::abs(got - expect) / std::max(1.0, std::abs(expect)));
  }
  return worst;
}

FormPtr make_preset(const std::string& preset) {
  if (preset == "quadratic") return std::make_shared<QuadraticForm>();
  if (preset == "quartic") return std::make_shared<QuarticForm>();
  if (preset == "fubini-study") return std::make_shared<FubiniStudyForm>();
  if (preset == "gaussian-bump") return std::make_shared<GaussianBumpForm>();
  if (preset == "annulus") return std::make_shared<AnnulusSphereForm>();
  if (preset == "slit") return std::make_shared<SlitSphereForm>();
  if (preset == "corner") return std::make_shared<CornerForm>();
  throw ConfigError("unknown form preset: " + preset);
}

}  // namespace hs

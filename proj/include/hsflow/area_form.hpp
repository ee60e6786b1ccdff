#ifndef HSFLOW_AREA_FORM_HPP
#define HSFLOW_AREA_FORM_HPP

#include <functional>
#include <memory>
#include <string>

#include "hsflow/errors.hpp"
#include "hsflow/grid.hpp"

namespace hs {

enum class Geometry { Plane, Sphere };
enum class Chart { Z, W };

/// Radial forms written in the variable s = -ln|z|^2: u(s) = potential(e^{-s/2}).
/// u is strictly convex with u' -> 0 as s -> +inf and u' -> -inf as s -> -inf.
struct RadialProfile {
  std::function<double(double)> u;
  std::function<double(double)> du;
  double smin = -14.0;
  double smax = 40.0;
};

/// An area form omega = rho * dA on the plane or the sphere.  Densities are
/// per Lebesgue area in the local chart; rho = Laplacian(potential) / (4*pi),
/// normalized so the operator applied to ln|z-p|^2 carries unit point mass.
/// Sphere forms live on a two-chart atlas (z and w = 1/z) and expose
/// chart-local densities and potentials; the transitions are
///   rho_w(w) = rho_z(1/w) / |w|^4,   Psi_w(w) = Psi_z(1/w) + ln|w|^2.
/// Immutable after construction; safe for concurrent reads.
class AreaForm {
 public:
  virtual ~AreaForm() = default;

  virtual std::string name() const = 0;
  virtual Geometry geometry() const = 0;

  cplx injection() const { return injection_; }
  void set_injection(cplx p) { injection_ = p; }
  double support_half() const { return support_half_; }
  void set_support_half(double s) { support_half_ = s; }

  /// Density in the z-chart.
  virtual double density(cplx z) const = 0;
  virtual bool has_potential() const = 0;
  virtual double potential(cplx z) const {
    (void)z;
    throw UnsupportedError(name() + ": no potential available");
  }

  /// w-chart density; default goes through the chart transition.
  virtual double density_w(cplx w) const {
    double n2 = std::norm(w);
    if (n2 < 1e-300) throw DomainError(name() + ": density_w at w=0 needs an override");
    return density(1.0 / w) / (n2 * n2);
  }
  /// w-chart potential; meaningful for sphere forms only.
  virtual double potential_w(cplx w) const {
    if (geometry() != Geometry::Sphere)
      throw UnsupportedError(name() + ": no w-chart potential on the plane");
    return potential(1.0 / w) + std::log(std::norm(w));
  }

  double chart_density(Chart c, cplx p) const {
    return c == Chart::Z ? density(p) : density_w(p);
  }
  double chart_potential(Chart c, cplx p) const {
    return c == Chart::Z ? potential(p) : potential_w(p);
  }

  virtual const RadialProfile* radial_profile() const { return nullptr; }

  /// Darcy permeability kappa = 1/rho.
  double kappa(cplx z) const {
    double r = density(z);
    if (r <= 0.0) throw DomainError(name() + ": kappa undefined where density vanishes");
    return 1.0 / r;
  }

 protected:
  cplx injection_{0.0, 0.0};
  double support_half_ = 2.0;
};

using FormPtr = std::shared_ptr<const AreaForm>;

/// Two square chart grids glued over an overlap annulus.
struct SphereChartAtlas {
  Grid zgrid;
  Grid wgrid;
  double overlap_lo = 0.8;
  double overlap_hi = 1.25;
};

// ---- presets -------------------------------------------------------------

/// phi = |z|^2, rho = 1/pi.
class QuadraticForm : public AreaForm {
 public:
  QuadraticForm();
  std::string name() const override { return "quadratic"; }
  Geometry geometry() const override { return Geometry::Plane; }
  double density(cplx) const override { return 1.0 / kPi; }
  bool has_potential() const override { return true; }
  double potential(cplx z) const override { return std::norm(z); }
  const RadialProfile* radial_profile() const override { return &profile_; }

 private:
  RadialProfile profile_;
};

/// phi = |z|^4/2, rho = 2|z|^2/pi.
class QuarticForm : public AreaForm {
 public:
  QuarticForm();
  std::string name() const override { return "quartic"; }
  Geometry geometry() const override { return Geometry::Plane; }
  double density(cplx z) const override { return 2.0 * std::norm(z) / kPi; }
  bool has_potential() const override { return true; }
  double potential(cplx z) const override { double n = std::norm(z); return 0.5 * n * n; }
  const RadialProfile* radial_profile() const override { return &profile_; }

 private:
  RadialProfile profile_;
};

/// Fubini-Study form, total mass 1; usable on the plane chart as well.
class FubiniStudyForm : public AreaForm {
 public:
  FubiniStudyForm();
  std::string name() const override { return "fubini-study"; }
  Geometry geometry() const override { return Geometry::Sphere; }
  double density(cplx z) const override {
    double q = 1.0 + std::norm(z);
    return 1.0 / (kPi * q * q);
  }
  double density_w(cplx w) const override {
    double q = 1.0 + std::norm(w);
    return 1.0 / (kPi * q * q);
  }
  bool has_potential() const override { return true; }
  double potential(cplx z) const override { return std::log1p(std::norm(z)); }
  double potential_w(cplx w) const override { return std::log1p(std::norm(w)); }
  const RadialProfile* radial_profile() const override { return &profile_; }

 private:
  RadialProfile profile_;
};

/// phi = |z|^2 + amp * exp(-|z-b|^2/sigma^2): a smooth non-radial plane form.
class GaussianBumpForm : public AreaForm {
 public:
  GaussianBumpForm(double amp = 0.25, cplx b = {0.4, 0.2}, double sigma = 0.8);
  std::string name() const override { return "gaussian-bump"; }
  Geometry geometry() const override { return Geometry::Plane; }
  double density(cplx z) const override;
  bool has_potential() const override { return true; }
  double potential(cplx z) const override;

 private:
  double amp_, sigma_;
  cplx b_;
};

/// Cumulative radial potential table: phi'(r) = 2 M(r)/r with M the enclosed mass.
struct RadialPotentialTable {
  std::vector<double> r, phi, mass;
  double value(double rad) const;
  double enclosed_mass(double rad) const;
};
RadialPotentialTable build_radial_potential(const std::function<double(double)>& rho_r,
                                            double rmax, int n, double phi0 = 0.0);

/// Sphere form with a low-density channel on an annulus r1 < |z| < r2 and the
/// remaining mass spread FS-like elsewhere; total mass normalized to 1.
class AnnulusSphereForm : public AreaForm {
 public:
  AnnulusSphereForm(double r1 = 0.55, double r2 = 1.35, double channel_mass = 0.05,
                    double blend_width = 0.08);
  std::string name() const override { return "annulus"; }
  Geometry geometry() const override { return Geometry::Sphere; }
  double density(cplx z) const override { return density_radial(std::abs(z)); }
  double density_w(cplx w) const override;
  bool has_potential() const override { return true; }
  double potential(cplx z) const override { return ztable_.value(std::abs(z)); }
  double potential_w(cplx w) const override;
  double density_radial(double r) const;
  double r1() const { return r1_; }
  double r2() const { return r2_; }

 private:
  double window(double r) const;
  double r1_, r2_, bw_, beta_in_, beta_out_;
  RadialPotentialTable ztable_, wtable_;
  double wgauge_ = 0.0;
};

/// Sphere form whose final flow domain is the complement of the segment
/// [-1,1] in the w-chart: a smooth-max blend of a slit-vanishing potential
/// with the Fubini-Study potential.
class SlitSphereForm : public AreaForm {
 public:
  SlitSphereForm(double eps = 0.02, double blend_delta = 0.1, double fs_drop = 1.2);
  std::string name() const override { return "slit"; }
  Geometry geometry() const override { return Geometry::Sphere; }
  double density(cplx z) const override;
  double density_w(cplx w) const override;
  bool has_potential() const override { return true; }
  double potential(cplx z) const override;
  double potential_w(cplx w) const override;

 private:
  double slit_term(cplx w) const;  // eps * u_cut(w)
  double eps_, delta_, C_;
};

/// Plane form vanishing on a drop-shaped region with an acute corner:
/// rho = (1/pi) (1 - indicator(drop)).  The drop is the convex hull of a
/// disc and an external apex; the corner angle is set by apex distance.
class CornerForm : public AreaForm {
 public:
  CornerForm(cplx center = {-0.15, 0.0}, double radius = 0.4, double corner_angle = kPi / 3.0);
  std::string name() const override { return "corner"; }
  Geometry geometry() const override { return Geometry::Plane; }
  double density(cplx z) const override { return inside_drop(z) ? 0.0 : 1.0 / kPi; }
  bool has_potential() const override { return false; }
  bool inside_drop(cplx z) const;
  cplx corner() const { return apex_; }
  cplx drop_center() const { return center_; }
  double drop_radius() const { return radius_; }
  /// Outward unit bisector direction of the corner wedge.
  cplx corner_bisector() const { return {1.0, 0.0}; }
  double perimeter() const;

 private:
  cplx center_, apex_, t1_, t2_;
  double radius_, half_angle_;
};

/// Density sampled on a grid (bilinear between nodes, clamped nonnegative),
/// with an optional on-grid potential attached after a Poisson reconstruction.
class GridDensityForm : public AreaForm {
 public:
  GridDensityForm(Field rho, std::string label = "custom-grid");
  std::string name() const override { return label_; }
  Geometry geometry() const override { return Geometry::Plane; }
  double density(cplx z) const override { return std::max(0.0, rho_.bilinear(z)); }
  bool has_potential() const override { return phi_.g.nx > 0; }
  double potential(cplx z) const override;
  void attach_potential(Field phi) { phi_ = std::move(phi); }
  const Field& density_field() const { return rho_; }

 private:
  Field rho_;
  Field phi_;
  std::string label_;
};

/// lambda * omega for the scaling law tests.
class ScaledForm : public AreaForm {
 public:
  ScaledForm(FormPtr base, double lambda);
  std::string name() const override { return base_->name() + "-scaled"; }
  Geometry geometry() const override { return base_->geometry(); }
  double density(cplx z) const override { return lambda_ * base_->density(z); }
  double density_w(cplx w) const override { return lambda_ * base_->density_w(w); }
  bool has_potential() const override { return base_->has_potential(); }
  double potential(cplx z) const override { return lambda_ * base_->potential(z); }
  double potential_w(cplx w) const override { return lambda_ * base_->potential_w(w); }
  const RadialProfile* radial_profile() const override {
    return scaled_profile_.u ? &scaled_profile_ : nullptr;
  }

 private:
  FormPtr base_;
  double lambda_;
  RadialProfile scaled_profile_;
};

// ---- operations ----------------------------------------------------------

/// Density with the configured-region guard.
double density_at(const AreaForm& form, cplx z);

/// Midpoint quadrature of rho over [-half,half]^2 with n x n cells.
double total_mass_plane(const AreaForm& form, double half, int n);

/// Atlas quadrature: z-chart cells with |z|<1 plus w-chart cells with |w|<=1.
double total_mass_sphere(const AreaForm& form, int n, double half = 1.6);

double total_mass(const AreaForm& form, int n = 800);

/// Radial profile of a form declared radially symmetric about 0.
const RadialProfile& radial_profile_of(const AreaForm& form);

/// min over |z| = R of potential(z) - t ln|z|^2.
double growth_margin(const AreaForm& form, double t, double R, int nsamples = 720);

/// Max mismatch of chart densities across the overlap annulus (transition check).
double chart_density_mismatch(const AreaForm& form, const SphereChartAtlas& atlas, int nsamples = 256);

FormPtr make_preset(const std::string& preset);

}  // namespace hs

#endif

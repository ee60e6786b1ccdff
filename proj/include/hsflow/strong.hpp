#ifndef HSFLOW_STRONG_HPP
#define HSFLOW_STRONG_HPP

#include <string>
#include <vector>

#include "hsflow/conformal.hpp"

namespace hs {

/// Closed marker polyline tracking a strong-flow boundary.
struct MarkerFront {
  double t = 0.0;
  std::vector<cplx> markers;  // counterclockwise

  double length() const;
  /// Minimum distance between non-adjacent segments (tangency detector).
  double min_self_distance() const;
};

struct StrongOptions {
  double dt = 2e-3;
  double cfl_spacings = 2.0;    // displacement cap per step, in marker spacings
  bool heun = false;
  int map_M = 192;
  int map_modes = 48;
  int min_markers = 96;
  int max_markers = 512;
  double ds_target = 0.02;      // marker spacing target (count scales with length)
  double proximity = 0.0;       // breakdown when self distance < proximity (0 = off)
  int record_every = 10;
  int moment_K = 4;
};

/// Boundary |grad p| per marker of the given map: 1 / (2 pi |f'|).
std::vector<double> pressure_gradient(const ConformalMap& map);

/// One Darcy step: markers advected by kappa |grad p| along outward normals,
/// then resampled to equal arclength.  dt is capped so no marker moves more
/// than cfl_spacings marker spacings; the step actually taken is reported.
MarkerFront step_front(const MarkerFront& front, const DensityFn& rho, cplx z0, double dt,
                       const StrongOptions& opt, double* dt_taken = nullptr);

struct StrongRun {
  std::vector<MarkerFront> fronts;
  std::vector<std::vector<cplx>> moments;  // per recorded front, M_0..M_K
  bool breakdown = false;
  double breakdown_time = 0.0;
  std::string note;
};

/// Strong flow from a small disc of weighted area t0 around the injection
/// point up to time t1 (or breakdown).
StrongRun run_strong_flow(const DensityFn& rho, cplx z0, double t0, double t1,
                          const StrongOptions& opt);

/// Moments of the region enclosed by a front: int z^k rho dA, exact signed
/// triangle quadrature against the marker polygon.
std::vector<cplx> front_moments(const MarkerFront& front, const DensityFn& rho, int K, cplx pivot);

/// Weighted integral of an arbitrary function over the enclosed region.
double front_integral(const MarkerFront& front, const std::function<double(cplx)>& f, cplx pivot);

struct KappaSample {
  cplx z;
  double kappa;
};

/// Per-boundary-point permeability |V| / |grad p| recovered from a prescribed
/// nested front family.
std::vector<KappaSample> reverse_engineer_kappa(const std::vector<MarkerFront>& fronts,
                                                cplx z0, const StrongOptions& opt);

/// Scattered kappa samples assembled into a positive grid field (inverse
/// distance blend, nearest-fill sweep outward, light smoothing).
Field rasterize_kappa(const std::vector<KappaSample>& samples, const Grid& grid,
                      double inner_value, int smooth_passes = 2);

/// Symmetric-difference weighted area between the region enclosed by a front
/// and a weak-flow mask, as a fraction of t.
double strong_weak_symdiff(const MarkerFront& front, const FlowDomain& weak,
                           const DensityFn& rho);

}  // namespace hs

#endif

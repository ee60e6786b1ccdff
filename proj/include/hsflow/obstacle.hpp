#ifndef HSFLOW_OBSTACLE_HPP
#define HSFLOW_OBSTACLE_HPP

#include <optional>
#include <vector>

#include "hsflow/area_form.hpp"
#include "hsflow/grid.hpp"

namespace hs {

struct SolveStats {
  int sweeps = 0;
  double last_update = 0.0;
  double max_residual = 0.0;   // complementarity, h^2-scaled equation
  double mean_residual = 0.0;
  int active_nodes = 0;        // strictly below the obstacle
  int sign_violations = 0;     // psi > 0 nodes (must be none)
  bool mask_touches_frame = false;
  bool converged = false;
};

/// Grid samples of the envelope at one time, solved through the regularized
/// unknown v = psi - t*alpha; the logarithmic singularity is carried
/// analytically so only the bounded part touches the grid.
struct EnvelopeField {
  double t = 0.0;
  Grid grid;
  Field psi;        // envelope values; -inf at the injection node for t > 0
  Field vreg;       // bounded unknown
  Field obstacle;   // g (capped)
  Field residual;   // per-node complementarity residual
  SolveStats stats;
  bool minus_infinity = false;  // everywhere--infinity marker (t above total mass)
};

struct EnvelopeOptions {
  double tol = 1e-6;         // sweep converged when max update < tol * h^2
  double omega = 1.8;        // PSOR relaxation
  int sweep_factor = 50;     // sweep limit = sweep_factor * max(nx, ny)
  double cap_radius = 4.0;   // obstacle cap radius around z0, in units of h
  bool density_path = false; // solve against raw grid density (no potential)
  int schwarz_max = 80;      // outer iterations for two-chart solves
  bool throw_on_limit = true;
};

/// Mask threshold separating true zeros from solver noise.
double mask_epsilon(const EnvelopeOptions& opt);

/// Plane-chart solve with far-field psi = 0 imposed on the box frame.
/// For t <= 0 returns the identically-zero field.
EnvelopeField solve_envelope(const AreaForm& form, double t, const Grid& grid,
                             const EnvelopeOptions& opt = {},
                             const EnvelopeField* warm = nullptr);

/// Same entry point for a raw density field (no form object).
EnvelopeField solve_envelope_density(const Field& rho, cplx z0, double t,
                                     const EnvelopeOptions& opt = {},
                                     const EnvelopeField* warm = nullptr);

/// Two-chart sphere solve glued by alternating subdomain sweeps.
struct SphereEnvelope {
  EnvelopeField z, w;
  double glue_mismatch = 0.0;
  int outer_iters = 0;
  bool minus_infinity = false;
};
SphereEnvelope solve_envelope_sphere(const AreaForm& form, double t,
                                     const SphereChartAtlas& atlas,
                                     const EnvelopeOptions& opt = {},
                                     const SphereEnvelope* warm = nullptr);

struct ResidualReport {
  double max_residual = 0.0;
  double mean_residual = 0.0;
  int active_nodes = 0;
  int sign_violations = 0;
  bool converged = false;
  int sweeps = 0;
};
ResidualReport residual_report(const EnvelopeField& field);

/// Max |second difference| / h^2 outside a disc around the injection point:
/// a discrete upper bound proxy for the envelope's second derivatives.
double c11_proxy(const EnvelopeField& field, double exclude_radius = 0.4);

/// Envelopes over a time grid (shared grid, warm-started in sequence).
struct EnvelopeStack {
  Grid grid;
  std::vector<double> ts;
  std::vector<Field> psi;
  double value(int k, int node) const { return psi[(size_t)k][node]; }
};
EnvelopeStack build_stack(const AreaForm& form, const Grid& grid,
                          const std::vector<double>& ts, const EnvelopeOptions& opt = {});

struct SphereStack {
  EnvelopeStack z, w;
};
SphereStack build_stack_sphere(const AreaForm& form, const SphereChartAtlas& atlas,
                               const std::vector<double>& ts, const EnvelopeOptions& opt = {});

/// Poisson reconstruction of an on-grid potential for grid-density forms:
/// Lap(phi) = 4 pi rho with far field phi = m ln|z - c|^2 on the frame.
Field reconstruct_potential(const Field& rho, cplx far_center, double tol = 1e-9,
                            int max_sweeps = 40000);

}  // namespace hs

#endif

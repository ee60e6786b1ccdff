#include "hsflow/strong.hpp"

#include <algorithm>
#include <cmath>

#include "hsflow/errors.hpp"

namespace hs {

namespace {

// degree-5 symmetric triangle rule (7 points), barycentric
const double kTriW[3] = {0.225, 0.13239415278850619, 0.12593918054482713};
const double kTriA[3] = {1.0 / 3.0, 0.059715871789769797, 0.79742698535308731};
const double kTriB[3] = {1.0 / 3.0, 0.47014206410511505, 0.10128650732345633};

double seg_dist(cplx a1, cplx a2, cplx b1, cplx b2) {
  auto pt_seg = [](cplx p, cplx a, cplx b) {
    cplx ab = b - a;
    double L2 = std::norm(ab);
    double s = L2 > 0 ? std::clamp(((p - a) * std::conj(ab)).real() / L2, 0.0, 1.0) : 0.0;
    return std::abs(p - (a + s * ab));
  };
  return std::min(std::min(pt_seg(a1, b1, b2), pt_seg(a2, b1, b2)),
                  std::min(pt_seg(b1, a1, a2), pt_seg(b2, a1, a2)));
}

}  // namespace

double MarkerFront::length() const {
  double L = 0.0;
  int n = (int)markers.size();
  for (int k = 0; k < n; ++k) L += std::abs(markers[(size_t)((k + 1) % n)] - markers[(size_t)k]);
  return L;
}

double MarkerFront::min_self_distance() const {
  int n = (int)markers.size();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    cplx a1 = markers[(size_t)i], a2 = markers[(size_t)((i + 1) % n)];
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent around the seam
      cplx b1 = markers[(size_t)j], b2 = markers[(size_t)((j + 1) % n)];
      best = std::min(best, seg_dist(a1, a2, b1, b2));
    }
  }
  return best;
}

std::vector<double> pressure_gradient(const ConformalMap& map) {
  std::vector<double> g((size_t)map.M);
  for (int k = 0; k < map.M; ++k) g[(size_t)k] = 1.0 / (kTwoPi * map.fprime_abs[(size_t)k]);
  return g;
}

namespace {

MarkerFront advance(const MarkerFront& front, cplx z0, const DensityFn& rho, double dt_request,
                    const StrongOptions& opt, double& dt_taken) {
  ConformalMap map = riemann_map_polyline(front.markers, z0, opt.map_M, 0.0, opt.map_modes);
  double ds = front.length() / (double)map.M;

  auto velocities = [&](const ConformalMap& m) {
    std::vector<cplx> v((size_t)m.M);
    for (int k = 0; k < m.M; ++k) {
      cplx tau = std::exp(cplx{0, m.theta[(size_t)k]});
      cplx fp = m.deriv(tau);
      cplx normal = tau * fp / std::abs(fp);
      double dens = std::max(1e-12, rho(m.boundary[(size_t)k]));
      double speed = (1.0 / dens) / (kTwoPi * std::abs(fp));
      v[(size_t)k] = speed * normal;
    }
    return v;
  };
  std::vector<cplx> vel = velocities(map);
  double vmax = 0.0;
  for (cplx v : vel) vmax = std::max(vmax, std::abs(v));
  double dt = std::min(dt_request, opt.cfl_spacings * ds / std::max(vmax, 1e-12));
  dt_taken = dt;

  MarkerFront next;
  next.t = front.t + dt;
  next.markers.resize((size_t)map.M);
  for (int k = 0; k < map.M; ++k)
    next.markers[(size_t)k] = map.boundary[(size_t)k] + dt * vel[(size_t)k];

  if (opt.heun) {
    ConformalMap map2 =
        riemann_map_polyline(next.markers, z0, opt.map_M, 0.0, opt.map_modes);
    std::vector<cplx> vel2 = velocities(map2);
    for (int k = 0; k < map.M; ++k)
      next.markers[(size_t)k] = map.boundary[(size_t)k] + 0.5 * dt * (vel[(size_t)k] + vel2[(size_t)k]);
  }

  int count = std::clamp((int)std::lround(next.length() / opt.ds_target), opt.min_markers,
                         opt.max_markers);
  next.markers = resample_closed(next.markers, count);
  return next;
}

}  // namespace

MarkerFront step_front(const MarkerFront& front, const DensityFn& rho, cplx z0, double dt,
                       const StrongOptions& opt, double* dt_taken) {
  double taken = 0.0;
  MarkerFront next = advance(front, z0, rho, dt, opt, taken);
  if (dt_taken) *dt_taken = taken;
  if (opt.proximity > 0.0 && next.min_self_distance() < opt.proximity)
    throw BreakdownError("front self-contact", next.t);
  return next;
}

StrongRun run_strong_flow(const DensityFn& rho, cplx z0, double t0, double t1,
                          const StrongOptions& opt) {
  StrongRun run;
  double r0 = std::sqrt(t0 / (kPi * std::max(1e-12, rho(z0))));
  MarkerFront cur;
  cur.t = t0;
  int m0 = std::max(opt.min_markers, 96);
  cur.markers.resize((size_t)m0);
  for (int k = 0; k < m0; ++k)
    cur.markers[(size_t)k] = z0 + r0 * std::exp(cplx{0, kTwoPi * k / m0});

  auto record = [&](const MarkerFront& f) {
    run.fronts.push_back(f);
    run.moments.push_back(front_moments(f, rho, opt.moment_K, z0));
  };
  record(cur);

  int step = 0;
  while (cur.t < t1 - 1e-12) {
    double dt_taken = 0.0;
    MarkerFront next;
    try {
      next = advance(cur, z0, rho, std::min(opt.dt, t1 - cur.t), opt, dt_taken);
    } catch (const MapError& e) {
      run.breakdown = true;
      run.breakdown_time = cur.t;
      run.note = std::string("map failure: ") + e.what();
      break;
    }
    if (opt.proximity > 0.0 && next.min_self_distance() < opt.proximity) {
      run.breakdown = true;
      run.breakdown_time = next.t;
      run.note = "front self-contact";
      record(next);
      break;
    }
    cur = std::move(next);
    ++step;
    if (step % opt.record_every == 0 || cur.t >= t1 - 1e-12) record(cur);
  }
  return run;
}

namespace {

// signed triangle quadrature over the polygon fan (pivot, e, e+1); valid for
// any simple closed polygon regardless of star-shapedness
template <typename Accum>
void fan_quadrature(const MarkerFront& front, cplx pivot, Accum&& accum) {
  int n = (int)front.markers.size();
  for (int e = 0; e < n; ++e) {
    cplx a = pivot, b = front.markers[(size_t)e], c = front.markers[(size_t)((e + 1) % n)];
    double jac2 = (b - a).real() * (c - a).imag() - (b - a).imag() * (c - a).real();
    for (int q = 0; q < 3; ++q) {
      double bary[3] = {kTriA[q], kTriB[q], 1.0 - kTriA[q] - kTriB[q]};
      int orbit = (q == 0) ? 1 : 3;
      for (int o = 0; o < orbit; ++o) {
        cplx p = bary[o % 3] * a + bary[(o + 1) % 3] * b + bary[(o + 2) % 3] * c;
        accum(p, kTriW[q] * 0.5 * jac2);
      }
    }
  }
}

}  // namespace

std::vector<cplx> front_moments(const MarkerFront& front, const DensityFn& rho, int K, cplx pivot) {
  std::vector<cplx> M((size_t)K + 1, cplx{0, 0});
  fan_quadrature(front, pivot, [&](cplx p, double w) {
    double weight = w * std::max(0.0, rho(p));
    cplx zk{1.0, 0.0};
    for (int k = 0; k <= K; ++k) {
      M[(size_t)k] += weight * zk;
      zk *= p;
    }
  });
  return M;
}

double front_integral(const MarkerFront& front, const std::function<double(cplx)>& f, cplx pivot) {
  double acc = 0.0;
  fan_quadrature(front, pivot, [&](cplx p, double w) { acc += w * f(p); });
  return acc;
}

std::vector<KappaSample> reverse_engineer_kappa(const std::vector<MarkerFront>& fronts, cplx z0,
                                                const StrongOptions& opt) {
  std::vector<KappaSample> out;
  for (size_t j = 0; j + 1 < fronts.size(); ++j) {
    const MarkerFront& cur = fronts[j];
    const MarkerFront& nxt = fronts[j + 1];
    double dt = nxt.t - cur.t;
    if (!(dt > 0)) throw DomainError("front family times must strictly increase");
    ConformalMap map = riemann_map_polyline(cur.markers, z0, opt.map_M, 0.0, opt.map_modes);
    for (int k = 0; k < map.M; ++k) {
      cplx tau = std::exp(cplx{0, map.theta[(size_t)k]});
      cplx fp = map.deriv(tau);
      cplx normal = tau * fp / std::abs(fp);
      cplx z = map.boundary[(size_t)k];
      // normal distance to the next front: march the ray against its polyline
      double dist = std::numeric_limits<double>::infinity();
      int n = (int)nxt.markers.size();
      for (int e = 0; e < n; ++e) {
        cplx a = nxt.markers[(size_t)e], b = nxt.markers[(size_t)((e + 1) % n)];
        // solve z + s*normal = a + u*(b-a)
        cplx d = b - a;
        double det = normal.real() * (-d.imag()) - normal.imag() * (-d.real());
        if (std::abs(det) < 1e-14) continue;
        double rx = a.real() - z.real(), ry = a.imag() - z.imag();
        double s = (rx * (-d.imag()) - ry * (-d.real())) / det;
        double u = (normal.real() * ry - normal.imag() * rx) / det;
        if (s > 0 && u >= 0 && u <= 1) dist = std::min(dist, s);
      }
      if (!std::isfinite(dist)) continue;  // non-nested or open gap: skip sample
      double speed = dist / dt;
      double gradp = 1.0 / (kTwoPi * std::abs(fp));
      out.push_back({z + 0.5 * dist * normal, speed / gradp});
    }
  }
  if (out.empty()) throw DomainError("no usable velocity samples between fronts");
  return out;
}

Field rasterize_kappa(const std::vector<KappaSample>& samples, const Grid& grid,
                      double inner_value, int smooth_passes) {
  Field kappa(grid, 0.0);
  Field weight(grid, 0.0);
  double R = 2.5 * grid.h;
  for (const KappaSample& s : samples) {
    int ic = (int)std::lround((s.z.real() - grid.x0) / grid.h);
    int jc = (int)std::lround((s.z.imag() - grid.y0) / grid.h);
    int rad = (int)std::ceil(R / grid.h);
    for (int dj = -rad; dj <= rad; ++dj)
      for (int di = -rad; di <= rad; ++di) {
        int i = ic + di, j = jc + dj;
        if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) continue;
        double d = std::abs(grid.node(i, j) - s.z);
        if (d > R) continue;
        double w = 1.0 / (d + 0.25 * grid.h);
        kappa.at(i, j) += w * s.kappa;
        weight.at(i, j) += w;
      }
  }
  for (int k = 0; k < grid.size(); ++k)
    if (weight[k] > 0) kappa[k] /= weight[k];

  // fill uncovered nodes by sweeping nearest values outward
  std::vector<int> order;
  order.reserve((size_t)grid.size());
  for (int pass = 0; pass < grid.nx + grid.ny; ++pass) {
    bool changed = false;
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        int k = grid.idx(i, j);
        if (weight[k] > 0) continue;
        double acc = 0;
        int cnt = 0;
        auto probe = [&](int ii, int jj) {
          if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) return;
          int kk = grid.idx(ii, jj);
          if (weight[kk] > 0) {
            acc += kappa[kk];
            ++cnt;
          }
        };
        probe(i - 1, j);
        probe(i + 1, j);
        probe(i, j - 1);
        probe(i, j + 1);
        if (cnt) {
          kappa[k] = acc / cnt;
          weight[k] = -1;  // filled this pass; flip to >0 after the sweep
          changed = true;
        }
      }
    for (int k = 0; k < grid.size(); ++k)
      if (weight[k] < 0) weight[k] = 1;
    if (!changed) break;
  }
  for (int k = 0; k < grid.size(); ++k)
    if (weight[k] == 0) kappa[k] = inner_value;

  // inner region (never swept by fronts) keeps the nominal early value
  (void)inner_value;

  for (int pass = 0; pass < smooth_passes; ++pass) {
    Field next = kappa;
    for (int j = 1; j < grid.ny - 1; ++j)
      for (int i = 1; i < grid.nx - 1; ++i)
        next.at(i, j) = 0.2 * (kappa.at(i, j) + kappa.at(i - 1, j) + kappa.at(i + 1, j) +
                               kappa.at(i, j - 1) + kappa.at(i, j + 1));
    kappa = next;
  }
  for (int k = 0; k < grid.size(); ++k) kappa[k] = std::max(kappa[k], 1e-6);
  return kappa;
}

double strong_weak_symdiff(const MarkerFront& front, const FlowDomain& weak,
                           const DensityFn& rho) {
  const Grid& g = weak.grid;
  double sym = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    cplx z = g.node(k);
    bool a = point_in_loop(front.markers, z);
    bool b = weak.mask[(size_t)k] != 0;
    if (a != b) sym += std::max(0.0, rho(z));
  }
  return sym * g.h * g.h / std::max(1e-12, weak.t);
}

}  // namespace hs

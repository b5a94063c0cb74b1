#pragma once
// Renormalized vortex-interaction energy and its position gradient.
//
// For an admissible configuration (vortex faces, degrees d, harmonic
// coefficients xi) the canonical unit field u* carries covariant Dirichlet
// energy pi sum_j d_j^2 |log rho| + W_intr + O(rho^2) outside geodesic balls
// of radius rho around the vortices.  w_intrinsic samples the bracketed
// quantity at rho in {rho0, rho0/2, rho0/4} and removes the rho^2 boundary
// term by Richardson extrapolation.  The extrinsic part
//   G(theta) = 1/2 int |d theta|^2 + |S(e^{i theta} u*)|^2
// is driven to a critical phase theta by damped Newton with an Armijo line
// search; the full energy is W = W_intr + G.  Its gradient in the vortex
// positions splits into a stress-tensor integral of the canonical current
// over small geodesic circles (the intrinsic part) plus 2 pi d_j
// (i grad theta)(a_j) from the shape term.  All evaluations live at the
// centroid of the face a vortex is snapped to, matching where the discrete
// delta mass actually sits.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "glvortex/canonical.hpp"
#include "glvortex/geodesic.hpp"

namespace glv {

struct VortexConfiguration {
  std::vector<SurfacePoint> a;  // positions; only the carrying face is used
  std::vector<int> d;           // degrees, sum = Euler characteristic
  VectorXd xi;                  // 2*genus harmonic coefficients
  VectorXd theta;               // per-vertex phase (empty = zero)
};

inline SurfacePoint face_center(int f) {
  SurfacePoint p;
  p.face = f;
  p.bary = Vector3d::Constant(1.0 / 3.0);
  return p;
}

inline std::vector<int> vortex_faces(const VortexConfiguration& cfg) {
  std::vector<int> faces(cfg.a.size());
  for (std::size_t k = 0; k < cfg.a.size(); ++k) faces[k] = cfg.a[k].face;
  return faces;
}

// Admissible configuration from positions and degrees: xi is the harmonic
// coefficient vector nearest the target whose cycle periods are quantized.
inline VortexConfiguration make_configuration(const VortexSystem& sys,
                                              const std::vector<SurfacePoint>& a,
                                              const std::vector<int>& d,
                                              const VectorXd& xi_target = VectorXd()) {
  check_degrees(*sys.g, d);
  VortexConfiguration cfg;
  cfg.a = a;
  cfg.d = d;
  std::vector<int> faces(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) faces[k] = a[k].face;
  VectorXd target = xi_target.size() == sys.H.cols()
                        ? xi_target
                        : VectorXd::Zero(sys.H.cols());
  cfg.xi = xi_admissible(sys, faces, d, target);
  cfg.theta = VectorXd::Zero(sys.g->nv());
  return cfg;
}

// ---------------------------------------------------------------------------
// Intrinsic part: annulus Dirichlet energy with the log core removed.

struct IntrinsicEnergy {
  double value = 0.0;  // extrapolated limit
  double error = 0.0;  // spread between the two Richardson pairs
  std::vector<std::array<double, 2>> table;  // (rho, annulus estimate)
};

namespace detail {

// Average over an edge of a smoothstep window in the vortex distance,
// centered at rho with band `w`. The centered window keeps the effective
// cutoff radius unbiased to second order in w/rho while averaging out the
// cell-scale rattle a hard cutoff picks up as the vortex moves.
inline double edge_window_outside(double di, double dj, double rho, double w) {
  auto ramp = [](double x) {  // antiderivative of the smoothstep
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return x - 0.5;
    return x * x * x - 0.5 * x * x * x * x;
  };
  const double xi = (di - rho) / w + 0.5;
  const double xj = (dj - rho) / w + 0.5;
  if (std::abs(xj - xi) < 1e-12) {
    const double x = std::clamp(0.5 * (xi + xj), 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
  }
  return (ramp(xj) - ramp(xi)) / (xj - xi);
}

}  // namespace detail

inline IntrinsicEnergy w_intrinsic_of(const VortexSystem& sys,
                                      const CanonicalField& cf,
                                      const std::vector<int>& faces,
                                      const std::vector<int>& degrees,
                                      double rho0 = 0.0) {
  const SurfaceGeometry& g = *sys.g;
  if (rho0 <= 0.0) rho0 = 10.0 * g.mean_edge;
  if (rho0 < 2.0 * g.mean_edge)
    throw std::runtime_error("w_intrinsic: rho below mesh resolution");

  VectorXd dist = VectorXd::Constant(g.nv(), std::numeric_limits<double>::max());
  for (int f : faces) dist = dist.cwiseMin(distance_field(g, face_center(f)));

  double dsq = 0.0;
  for (int dk : degrees) dsq += double(dk) * dk;

  IntrinsicEnergy out;
  std::array<double, 3> west{};
  for (int s = 0; s < 3; ++s) {
    const double rho = rho0 / double(1 << s);
    double energy = 0.0;
    for (int e = 0; e < g.ne(); ++e) {
      const double lam = detail::edge_window_outside(dist[g.E(e, 0)],
                                                     dist[g.E(e, 1)], rho,
                                                     0.35 * rho);
      if (lam == 0.0) continue;
      const complexd diff =
          cf.u[g.E(e, 0)] - std::polar(1.0, -g.transport[e]) * cf.u[g.E(e, 1)];
      energy += 0.5 * lam * g.cotan_weight[e] * std::norm(diff);
    }
    west[s] = energy + pi * dsq * std::log(rho);
    out.table.push_back({rho, west[s]});
  }
  // annulus estimate = W + c rho^2 + ...: eliminate the rho^2 term pairwise
  const double w01 = (4.0 * west[1] - west[0]) / 3.0;
  const double w12 = (4.0 * west[2] - west[1]) / 3.0;
  out.value = w01;
  out.error = std::abs(w01 - w12);
  return out;
}

inline IntrinsicEnergy w_intrinsic(const VortexSystem& sys,
                                   const std::vector<SurfacePoint>& a,
                                   const std::vector<int>& degrees,
                                   const VectorXd& xi, double rho0 = 0.0) {
  std::vector<int> faces(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) faces[k] = a[k].face;
  const CanonicalField cf = canonical_field(sys, faces, degrees, xi);
  return w_intrinsic_of(sys, cf, faces, degrees, rho0);
}

// ---------------------------------------------------------------------------
// Extrinsic part: the phase functional and its critical points.

inline double g_functional(const VortexSystem& sys, const Field& u,
                           const VectorXd& theta) {
  const SurfaceGeometry& g = *sys.g;
  double value = 0.5 * theta.dot(sys.dec.L0 * theta);
  Field w(g.nv());
  for (int v = 0; v < g.nv(); ++v) w[v] = u[v] * std::polar(1.0, theta[v]);
  const Field sw = apply_shape(g, w);
  for (int v = 0; v < g.nv(); ++v)
    value += 0.5 * g.vertex_area[v] * std::norm(sw[v]);
  return value;
}

struct ThetaSolve {
  VectorXd theta;
  double residual = std::numeric_limits<double>::max();
  double energy = 0.0;
  int iterations = 0;
  std::vector<double> energy_trace;  // one entry per accepted step
};

// Critical phase of the extrinsic functional: damped Newton on
//   grad_v = (L0 theta)_v + A_v (S w, S iw),  w = e^{i theta} u,
// with Armijo backtracking.  The reported residual is the discrete L2 norm
// of the Euler-Lagrange equation, sqrt(sum grad_v^2 / A_v).
inline ThetaSolve theta_critical(const VortexSystem& sys, const Field& u,
                                 const VectorXd& theta_init = VectorXd(),
                                 int max_iter = 100, double tol = 1e-10) {
  const SurfaceGeometry& g = *sys.g;
  const int nv = g.nv();
  ThetaSolve out;
  out.theta = theta_init.size() == nv ? theta_init : VectorXd::Zero(nv);
  out.energy = g_functional(sys, u, out.theta);
  out.energy_trace.push_back(out.energy);

  const double mass_scale = g.total_area / nv;
  double damping = 0.0;
  Field w(nv), iw(nv);
  for (int iter = 0; iter < max_iter; ++iter) {
    for (int v = 0; v < nv; ++v) {
      w[v] = u[v] * std::polar(1.0, out.theta[v]);
      iw[v] = complexd(0.0, 1.0) * w[v];
    }
    const Field sw = apply_shape(g, w), siw = apply_shape(g, iw);
    VectorXd grad = sys.dec.L0 * out.theta;
    VectorXd curvature(nv);
    double res = 0.0;
    for (int v = 0; v < nv; ++v) {
      grad[v] += g.vertex_area[v] *
                 (sw[v].real() * siw[v].real() + sw[v].imag() * siw[v].imag());
      curvature[v] = g.vertex_area[v] * (std::norm(siw[v]) - std::norm(sw[v]));
      res += grad[v] * grad[v] / g.vertex_area[v];
    }
    out.residual = std::sqrt(res);
    out.iterations = iter;
    if (out.residual < tol) return out;

    bool stepped = false;
    while (!stepped) {
      Eigen::SparseMatrix<double> H = sys.dec.L0;
      for (int v = 0; v < nv; ++v)
        H.coeffRef(v, v) += curvature[v] +
                            damping * std::max(g.vertex_area[v], mass_scale);
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact(H);
      VectorXd p;
      double slope = 0.0;
      if (fact.info() == Eigen::Success) {
        p = fact.solve(-grad);
        slope = grad.dot(p);
      }
      if (fact.info() == Eigen::Success && slope < 0.0) {
        double t = 1.0;
        for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
          const VectorXd cand = out.theta + t * p;
          const double ec = g_functional(sys, u, cand);
          if (ec <= out.energy + 1e-4 * t * slope) {
            out.theta = cand;
            out.energy = ec;
            out.energy_trace.push_back(ec);
            stepped = true;
            damping = 0.0;
            break;
          }
        }
      }
      if (!stepped) {
        damping = damping == 0.0 ? 1e-8 : damping * 30.0;
        if (damping > 1e8)
          throw std::runtime_error("theta_critical: damping exhausted");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembled energy record.

struct RenormalizedValue {
  double w_intr = 0.0;
  double g_extr = 0.0;
  double total = 0.0;
  double w_intr_err = 0.0;
  double theta_residual = 0.0;
  std::vector<std::array<double, 2>> rho_table;
  VectorXd theta;  // phase the record was evaluated at
};

inline RenormalizedValue renormalized_W(const VortexSystem& sys,
                                        const VortexConfiguration& cfg,
                                        bool resolve_theta = true,
                                        double rho0 = 0.0) {
  check_degrees(*sys.g, cfg.d);
  const std::vector<int> faces = vortex_faces(cfg);
  const CanonicalField cf = canonical_field(sys, faces, cfg.d, cfg.xi);
  const IntrinsicEnergy wi = w_intrinsic_of(sys, cf, faces, cfg.d, rho0);

  RenormalizedValue out;
  out.theta = cfg.theta.size() == sys.g->nv() ? cfg.theta
                                              : VectorXd::Zero(sys.g->nv());
  if (resolve_theta) {
    const ThetaSolve ts = theta_critical(sys, cf.u, out.theta);
    out.theta = ts.theta;
    out.theta_residual = ts.residual;
    out.g_extr = ts.energy;
  } else {
    out.g_extr = g_functional(sys, cf.u, out.theta);
  }
  out.w_intr = wi.value;
  out.w_intr_err = wi.error;
  out.rho_table = wi.table;
  out.total = out.w_intr + out.g_extr;
  return out;
}

// ---------------------------------------------------------------------------
// Position gradient.

namespace detail {

// Barycentric gradients of a face (world vectors in the face plane).
inline std::array<Vector3d, 3> face_bary_gradients(const SurfaceGeometry& g,
                                                   int f) {
  const Vector3d n = g.face_normal.row(f).transpose();
  std::array<Vector3d, 3> grad;
  for (int c = 0; c < 3; ++c) {
    const Vector3d opposite =
        g.vpos(g.F(f, (c + 2) % 3)) - g.vpos(g.F(f, (c + 1) % 3));
    grad[c] = n.cross(opposite) / (2.0 * g.face_area[f]);
  }
  return grad;
}

// Pointwise current from the edge cochain by lowest-order edge-element
// interpolation: affine within each face and consistent with all three edge
// integrals, which matters close to a vortex where the current varies by
// O(h/r) across a single face.
inline Vector3d whitney_current(const SurfaceGeometry& g, const VectorXd& j,
                                const SurfacePoint& p) {
  const auto grad = face_bary_gradients(g, p.face);
  Vector3d out = Vector3d::Zero();
  for (int c = 0; c < 3; ++c) {
    const double val = g.FS(p.face, c) * j[g.FE(p.face, c)];
    out += val * (p.bary[c] * grad[(c + 1) % 3] - p.bary[(c + 1) % 3] * grad[c]);
  }
  return out;
}

// P1 gradient of a vertex function, rotated a quarter turn in the oriented
// tangent plane (the "i grad" of a scalar), averaged over the faces whose
// centroid lies within the given radius of the anchor face centroid and
// projected back to the anchor plane.  The averaging trades the O(h) noise
// of a single-face gradient for a small symmetric bias.
inline Vector3d rotated_phase_gradient(const SurfaceGeometry& g, int anchor,
                                       const VectorXd& theta, double radius) {
  const Vector3d n0 = g.face_normal.row(anchor).transpose();
  auto centroid = [&](int f) {
    return Vector3d((g.vpos(g.F(f, 0)) + g.vpos(g.F(f, 1)) + g.vpos(g.F(f, 2))) /
                    3.0);
  };
  const Vector3d x0 = centroid(anchor);
  Vector3d acc = Vector3d::Zero();
  double wsum = 0.0;
  for (int f = 0; f < g.nf(); ++f) {
    if ((centroid(f) - x0).norm() > radius) continue;
    const auto grad = face_bary_gradients(g, f);
    Vector3d gth = Vector3d::Zero();
    for (int c = 0; c < 3; ++c) gth += theta[g.F(f, c)] * grad[c];
    const Vector3d nf = g.face_normal.row(f).transpose();
    acc += g.face_area[f] * nf.cross(gth);
    wsum += g.face_area[f];
  }
  acc /= wsum;
  return acc - acc.dot(n0) * n0;
}

// Stress-tensor flux of the current through a radially smeared annulus
// around a vortex.  The boundary integral at radius eta is realized as
// F = -int T(v)·grad w dA over the annulus [0.75 eta, 1.25 eta], with w a
// smoothstep ramp from 1 inside to 0 outside -- an exact identity for any
// ramp wherever the stress tensor is divergence-free, reducing to the plain
// circle integral as the ramp narrows.  Polar geodesic rays carry the center
// frame outward; every face segment a ray crosses is integrated with 2-point
// Gauss in r, so the full annulus area samples the piecewise-affine Whitney
// field (point sampling on a single circle aliases its facet structure into
// the force at the few-percent level).  The vortex's own d/r current is
// split off analytically and only cross, regular and ramp-self terms kept.
inline Vector2d stress_annulus(const SurfaceGeometry& g, const VectorXd& j,
                               int degree, const SurfacePoint& center,
                               const Vector3d& e1, const Vector3d& e2,
                               double eta, int rays) {
  const double ra = 0.75 * eta, rb = 1.25 * eta;
  auto ramp_slope = [&](double r) {
    if (r <= ra || r >= rb) return 0.0;
    const double t = (r - ra) / (rb - ra);
    return -6.0 * t * (1.0 - t) / (rb - ra);
  };
  Vector2d acc = Vector2d::Zero();
  for (int sray = 0; sray < rays; ++sray) {
    const double phi = 2.0 * pi * (sray + 0.5) / rays;
    int f = center.face;
    Vector3d x = g.point_world(center);
    {
      const Vector3d cen =
          (g.vpos(g.F(f, 0)) + g.vpos(g.F(f, 1)) + g.vpos(g.F(f, 2))) / 3.0;
      x += 1e-9 * (cen - x);
    }
    Vector3d n = g.face_normal.row(f).transpose();
    Vector3d dir = std::cos(phi) * e1 + std::sin(phi) * e2;
    dir -= dir.dot(n) * n;
    dir.normalize();
    Vector3d frame[2] = {e1 - e1.dot(n) * n, e2 - e2.dot(n) * n};
    double r = 0.0;
    const int max_steps = 64 + static_cast<int>(12.0 * rb / g.mean_edge);
    for (int step = 0; step < max_steps && r < rb; ++step) {
      const Vector3d pts[3] = {g.vpos(g.F(f, 0)), g.vpos(g.F(f, 1)),
                               g.vpos(g.F(f, 2))};
      double exit_t = std::numeric_limits<double>::max();
      int exit_c = -1;
      for (int c = 0; c < 3; ++c) {
        const Vector3d en = (pts[(c + 1) % 3] - pts[c]).cross(n);
        const double denom = dir.dot(en);
        if (denom <= 1e-15) continue;
        double t = (pts[c] - x).dot(en) / denom;
        if (t < -1e-12) continue;
        t = std::max(t, 0.0);
        if (t < exit_t) {
          exit_t = t;
          exit_c = c;
        }
      }
      if (exit_c == -1) break;
      const double seg = std::min(exit_t, rb - r);
      const double r0 = std::max(r, ra), r1 = std::min(r + seg, rb);
      if (r1 > r0) {
        const auto grd = face_bary_gradients(g, f);
        const Vector3d tau = n.cross(dir);
        const double mid = 0.5 * (r0 + r1), half = 0.5 * (r1 - r0);
        for (const double gp : {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}) {
          const double rq = mid + half * gp;
          const Vector3d bc = face_bary(g, f, x + (rq - r) * dir);
          Vector3d jw = Vector3d::Zero();
          for (int c = 0; c < 3; ++c)
            jw += g.FS(f, c) * j[g.FE(f, c)] *
                  (bc[c] * grd[(c + 1) % 3] - bc[(c + 1) % 3] * grd[c]);
          const Vector3d rest = jw - (degree / rq) * tau;
          const double rnu = rest.dot(dir);
          const double rtau = rest.dot(tau);
          const double rsq = rest.squaredNorm();
          const double wq = half * ramp_slope(rq) * rq;
          for (int m = 0; m < 2; ++m) {
            Vector3d em = frame[m];
            const double len = em.norm();
            if (len > 1e-14) em /= len;
            const double flux =
                (degree / rq) * (tau.dot(em) * rnu - rtau * dir.dot(em)) +
                rest.dot(em) * rnu -
                0.5 * (rsq + (degree / rq) * (degree / rq)) * dir.dot(em);
            acc[m] -= wq * flux;
          }
        }
      }
      if (exit_t >= rb - r) break;
      x += exit_t * dir;
      r += exit_t;
      const int e = g.FE(f, exit_c);
      const int fn = g.EF(e, 0) == f ? g.EF(e, 1) : g.EF(e, 0);
      const Vector3d n2 = g.face_normal.row(fn).transpose();
      const Vector3d axis = n.cross(n2);
      const double sn = axis.norm(), cs = std::clamp(n.dot(n2), -1.0, 1.0);
      if (sn > 1e-15) {
        const Eigen::AngleAxisd rot(std::atan2(sn, cs), axis / sn);
        dir = rot * dir;
        frame[0] = rot * frame[0];
        frame[1] = rot * frame[1];
      }
      dir -= dir.dot(n2) * n2;
      dir.normalize();
      frame[0] -= frame[0].dot(n2) * n2;
      frame[1] -= frame[1].dot(n2) * n2;
      f = fn;
      n = n2;
      x += 1e-12 * g.mean_edge * dir;
    }
  }
  return acc * (2.0 * pi / rays);
}

}  // namespace detail

struct GradW {
  std::vector<Vector3d> total;      // world tangent vector per vortex
  std::vector<Vector3d> intrinsic;  // stress-integral part
  std::vector<Vector3d> extrinsic;  // phase part 2 pi d (i grad theta)
  std::vector<double> boundary_error;  // |I(eta) - I(eta/2)| per vortex
  double theta_residual = 0.0;
};

// Vortex-position gradient of the renormalized energy.  The intrinsic part
// is the stress flux at radius eta; the half-radius flux is also evaluated
// and their difference reported as the per-vortex error estimate.  With
// extrapolate set, the two are Richardson-combined under an eta^2 error
// model; by default the eta value alone is returned, which measures closer
// to the finite-difference gradient on practical meshes (the half radius
// sits near the delta-mass smearing zone, and the self-field curvature
// error carries an eta^2 log eta term that a pure eta^2 model overshoots).
// eta shrinks below eta0 when vortices approach, down to a floor of three
// cells, below which the flux is meaningless and the call throws.
inline GradW grad_W(const VortexSystem& sys, const VortexConfiguration& cfg,
                    bool resolve_theta = true, double eta0 = 0.0,
                    int rays = 256, bool extrapolate = false) {
  const SurfaceGeometry& g = *sys.g;
  check_degrees(g, cfg.d);
  const double h = g.mean_edge;
  if (eta0 <= 0.0) eta0 = 8.0 * h;
  const std::size_t n = cfg.a.size();

  // the annuli must stay clear of the other cores
  std::vector<double> sep_min(n, std::numeric_limits<double>::max());
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const VectorXd dist = distance_field(g, face_center(cfg.a[k].face));
    for (std::size_t l = k + 1; l < n; ++l) {
      const double sep = distance_at(g, dist, face_center(cfg.a[l].face));
      sep_min[k] = std::min(sep_min[k], sep);
      sep_min[l] = std::min(sep_min[l], sep);
    }
  }

  const std::vector<int> faces = vortex_faces(cfg);
  const CanonicalField cf = canonical_field(sys, faces, cfg.d, cfg.xi);

  GradW out;
  VectorXd theta = cfg.theta.size() == g.nv() ? cfg.theta
                                              : VectorXd::Zero(g.nv());
  if (resolve_theta) {
    const ThetaSolve ts = theta_critical(sys, cf.u, theta);
    theta = ts.theta;
    out.theta_residual = ts.residual;
  }

  out.total.resize(n);
  out.intrinsic.resize(n);
  out.extrinsic.resize(n);
  out.boundary_error.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double eta = std::min(eta0, sep_min[k] / 3.0);
    if (eta < 3.0 * h) {
      std::ostringstream msg;
      msg << "grad_W: vortex " << k << " has a neighbour " << sep_min[k]
          << " away; the boundary integral needs at least " << 9.0 * h;
      throw std::runtime_error(msg.str());
    }
    const SurfacePoint center = face_center(cfg.a[k].face);
    Vector3d e1, e2;
    g.face_basis(cfg.a[k].face, e1, e2);
    const Vector2d big = detail::stress_annulus(g, cf.current, cfg.d[k],
                                                center, e1, e2, eta, rays);
    const Vector2d small = detail::stress_annulus(
        g, cf.current, cfg.d[k], center, e1, e2, 0.5 * eta, rays);
    const Vector2d lim = extrapolate ? ((4.0 * small - big) / 3.0) : big;
    out.boundary_error[k] = (big - small).norm();
    out.intrinsic[k] = lim[0] * e1 + lim[1] * e2;
    const auto grd = detail::face_bary_gradients(g, cfg.a[k].face);
    Vector3d gth = Vector3d::Zero();
    for (int c = 0; c < 3; ++c) gth += theta[g.F(cfg.a[k].face, c)] * grd[c];
    const Vector3d nf = g.face_normal.row(cfg.a[k].face).transpose();
    out.extrinsic[k] = 2.0 * pi * cfg.d[k] * nf.cross(gth);
    out.total[k] = out.intrinsic[k] + out.extrinsic[k];
  }
  return out;
}

}  // namespace glv

#pragma once

// Canonical harmonic unit fields with prescribed vortices. The construction
// works on the current 1-cochain directly:
//
//   j* = eta + xi,   d1 eta = 2 pi d_k at the vortex faces - holonomy,
//
// where eta is coexact (eta = star1^{-1} d1^T of a face potential) and xi is
// harmonic. Because the face defect (d1 j*)_f + holonomy_f then equals
// 2 pi d_k exactly at the vortex faces and 0 elsewhere, the phase integrates
// to a single-valued unit field around every face; single-valuedness around
// the homology generators is enforced by choosing the harmonic coefficients
// so that every generator period of (j* + transport) lies in 2 pi Z. The
// integer choices form the admissible lattice; continuity of the integers
// under vortex motion gives the update rule, and transporting a vortex
// around a generator shifts xi by a lattice vector (monodromy).

#include "dec.hpp"
#include "field.hpp"
#include "homology.hpp"
#include "surface.hpp"

#include <vector>

namespace glv {

struct VortexSystem {
  const SurfaceGeometry* g = nullptr;
  DecOperators dec;
  HomologyLoops generators;  // loops without exclusions, fixed per mesh
  MatrixXd H;                // star1-orthonormal harmonic basis, ne x 2g
  int basepoint = 0;         // phase normalization vertex
  double base_angle = 0.0;   // prescribed phase of u* at the basepoint

  explicit VortexSystem(const SurfaceGeometry& gg)
      : g(&gg),
        dec(gg),
        generators(homology_loops(gg)),
        H(harmonic_basis(dec, generators.cochain)) {}
};

inline void check_degrees(const SurfaceGeometry& g, const std::vector<int>& d) {
  int sum = 0;
  for (int k : d) sum += k;
  if (sum != g.chi)
    throw std::runtime_error(
        "vortex degrees must sum to the Euler characteristic");
}

// Face potential of the vortex flux: the zero-mean solution of the dual
// Poisson problem with right-hand side 2 pi d at the vortex faces minus the
// holonomy 2-form (total exactly zero when the degrees sum to chi).
inline VectorXd solve_psi(const VortexSystem& sys, const std::vector<int>& faces,
                          const std::vector<int>& degrees) {
  const SurfaceGeometry& g = *sys.g;
  check_degrees(g, degrees);
  VectorXd rho = -g.holonomy;
  for (std::size_t k = 0; k < faces.size(); ++k)
    rho[faces[k]] += 2.0 * pi * degrees[k];
  return sys.dec.flux.solve(rho);
}

// Coexact current with prescribed face windings: d1 eta = rho.
inline VectorXd solve_psi_eta(const VortexSystem& sys,
                              const std::vector<int>& faces,
                              const std::vector<int>& degrees) {
  const VectorXd y = solve_psi(sys, faces, degrees);
  return sys.dec.star1.cwiseInverse().asDiagonal() *
         (sys.dec.d1.transpose() * y);
}

// Sum of transport angles around a cycle (the connection period A_h).
inline double loop_connection(const SurfaceGeometry& g, const VectorXd& loop) {
  return loop.dot(g.transport);
}

// Greedy selection of 2g cycles whose period vectors against the harmonic
// basis have full rank; returns selected indices.
inline std::vector<int> select_spanning_cycles(const VortexSystem& sys,
                                               const HomologyLoops& loops) {
  const int dim = static_cast<int>(sys.H.cols());
  std::vector<int> picked;
  if (dim == 0) return picked;
  MatrixXd rows(static_cast<int>(loops.cochain.size()), dim);
  for (int l = 0; l < rows.rows(); ++l)
    rows.row(l) = (loops.cochain[l].transpose() * sys.H).row(0);
  MatrixXd basis(dim, dim);
  for (int want = 0; want < dim; ++want) {
    int best = -1;
    double best_norm = 0.0;
    for (int l = 0; l < rows.rows(); ++l) {
      VectorXd r = rows.row(l).transpose();
      for (int j = 0; j < want; ++j) r -= basis.col(j).dot(r) * basis.col(j);
      if (r.norm() > best_norm + 1e-14) {
        best_norm = r.norm();
        best = l;
      }
    }
    if (best < 0 || best_norm < 1e-8)
      throw std::runtime_error(
          "period selection: cycles do not span the harmonic space");
    VectorXd r = rows.row(best).transpose();
    for (int j = 0; j < want; ++j) r -= basis.col(j).dot(r) * basis.col(j);
    basis.col(want) = r / r.norm();
    picked.push_back(best);
  }
  return picked;
}

namespace detail {

struct PeriodSystem {
  MatrixXd P;   // 2g x 2g: periods of the harmonic basis over the cycles
  VectorXd b;   // offsets: cycle integrals of eta + transport
};

inline PeriodSystem period_system(const VortexSystem& sys,
                                  const HomologyLoops& loops,
                                  const std::vector<int>& picked,
                                  const VectorXd& eta) {
  const SurfaceGeometry& g = *sys.g;
  const int dim = static_cast<int>(sys.H.cols());
  PeriodSystem ps;
  ps.P.resize(dim, dim);
  ps.b.resize(dim);
  for (int i = 0; i < dim; ++i) {
    const VectorXd& l = loops.cochain[picked[i]];
    for (int k = 0; k < dim; ++k) ps.P(i, k) = l.dot(sys.H.col(k));
    ps.b[i] = l.dot(eta) + loop_connection(g, l);
  }
  return ps;
}

inline std::vector<int> vortex_avoid_vertices(const SurfaceGeometry& g,
                                              const std::vector<int>& faces) {
  std::vector<int> avoid;
  for (int f : faces)
    for (int c = 0; c < 3; ++c) avoid.push_back(g.F(f, c));
  std::sort(avoid.begin(), avoid.end());
  avoid.erase(std::unique(avoid.begin(), avoid.end()), avoid.end());
  return avoid;
}

}  // namespace detail

// Admissible harmonic coefficients nearest to a target: the quantization
// integers are chosen from the target, then the coefficients are solved from
// the generator periods. Empty on genus-0 surfaces.
inline VectorXd xi_admissible(const VortexSystem& sys,
                              const std::vector<int>& faces,
                              const std::vector<int>& degrees,
                              const VectorXd& target) {
  const SurfaceGeometry& g = *sys.g;
  const int dim = static_cast<int>(sys.H.cols());
  if (dim == 0) return VectorXd();
  const auto loops = homology_loops(g, detail::vortex_avoid_vertices(g, faces));
  const auto picked = select_spanning_cycles(sys, loops);
  const VectorXd eta = solve_psi_eta(sys, faces, degrees);
  const auto ps = detail::period_system(sys, loops, picked, eta);
  VectorXd m(dim);
  const VectorXd raw = ps.P * target + ps.b;
  for (int i = 0; i < dim; ++i) m[i] = std::round(raw[i] / (2.0 * pi));
  return ps.P.fullPivLu().solve(2.0 * pi * m - ps.b);
}

// Continuation of the harmonic coefficients as vortices move: the cycles
// avoid both the old and the new cores, the quantization integers are read
// off (exactly) from the old admissible state, held fixed, and the
// coefficients re-solved at the new positions.
inline VectorXd xi_update(const VortexSystem& sys,
                          const std::vector<int>& faces_prev,
                          const std::vector<int>& degrees_prev,
                          const VectorXd& xi_prev,
                          const std::vector<int>& faces_new,
                          const std::vector<int>& degrees_new) {
  const SurfaceGeometry& g = *sys.g;
  const int dim = static_cast<int>(sys.H.cols());
  if (dim == 0) return VectorXd();
  std::vector<int> both = faces_prev;
  both.insert(both.end(), faces_new.begin(), faces_new.end());
  const auto loops = homology_loops(g, detail::vortex_avoid_vertices(g, both));
  const auto picked = select_spanning_cycles(sys, loops);
  const VectorXd eta_prev = solve_psi_eta(sys, faces_prev, degrees_prev);
  const auto ps_prev = detail::period_system(sys, loops, picked, eta_prev);
  VectorXd m(dim);
  const VectorXd raw = ps_prev.P * xi_prev + ps_prev.b;
  for (int i = 0; i < dim; ++i) m[i] = std::round(raw[i] / (2.0 * pi));
  const VectorXd eta_new = solve_psi_eta(sys, faces_new, degrees_new);
  const auto ps_new = detail::period_system(sys, loops, picked, eta_new);
  return ps_new.P.fullPivLu().solve(2.0 * pi * m - ps_new.b);
}

struct CanonicalField {
  Field u;            // unit field
  VectorXd current;   // the 1-cochain eta + xi it integrates
  double max_defect;  // worst non-tree-edge phase mismatch (admissibility)
};

// Integrate the phase of the canonical field over a spanning tree and close
// it up; the defect on non-tree edges measures (in)admissibility of xi.
inline CanonicalField canonical_field(const VortexSystem& sys,
                                      const std::vector<int>& faces,
                                      const std::vector<int>& degrees,
                                      const VectorXd& xi) {
  const SurfaceGeometry& g = *sys.g;
  CanonicalField out;
  out.current = solve_psi_eta(sys, faces, degrees);
  if (sys.H.cols() > 0) {
    if (xi.size() != sys.H.cols())
      throw std::runtime_error("canonical_field: xi coefficient size mismatch");
    out.current += sys.H * xi;
  }

  // phase increment along the canonical edge i -> j is current + transport
  std::vector<std::vector<std::pair<int, int>>> adj(g.nv());
  for (int e = 0; e < g.ne(); ++e) {
    adj[g.E(e, 0)].push_back({g.E(e, 1), e});
    adj[g.E(e, 1)].push_back({g.E(e, 0), e});
  }
  VectorXd phi = VectorXd::Zero(g.nv());
  std::vector<char> seen(g.nv(), 0);
  std::vector<char> tree_edge(g.ne(), 0);
  std::vector<int> stack{sys.basepoint};
  seen[sys.basepoint] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto& [nb, e] : adj[u]) {
      if (seen[nb]) continue;
      seen[nb] = 1;
      tree_edge[e] = 1;
      const double step = out.current[e] + g.transport[e];
      phi[nb] = phi[u] + (g.E(e, 0) == u ? step : -step);
      stack.push_back(nb);
    }
  }

  out.max_defect = 0.0;
  for (int e = 0; e < g.ne(); ++e) {
    if (tree_edge[e]) continue;
    const double step = out.current[e] + g.transport[e];
    out.max_defect = std::max(
        out.max_defect,
        std::abs(fold_angle(phi[g.E(e, 1)] - phi[g.E(e, 0)] - step)));
  }

  out.u.resize(g.nv());
  const double rot = sys.base_angle - phi[sys.basepoint];
  for (int v = 0; v < g.nv(); ++v) out.u[v] = std::polar(1.0, phi[v] + rot);
  return out;
}

}  // namespace glv

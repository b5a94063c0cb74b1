#pragma once

// Per-vertex tangent vector fields stored as complex numbers in the vertex
// frames: currents, quantized vorticity, vortex location, energy terms, and
// the real-valued operator blocks used by the gradient flow. The complex
// value z at a vertex means the world vector Re(z) e1 + Im(z) e2; moving a
// value along the canonical edge i -> j multiplies it by e^{i t_e}, so every
// comparison of neighboring values below pairs z_i with e^{-i t_e} z_j to
// stay connection-aware.

#include "surface.hpp"

#include <Eigen/Sparse>

#include <complex>
#include <unordered_map>
#include <vector>

namespace glv {

using Field = Eigen::VectorXcd;
using complexd = std::complex<double>;

inline MatrixXd field_to_world(const SurfaceGeometry& g, const Field& z) {
  MatrixXd w(g.nv(), 3);
  for (int v = 0; v < g.nv(); ++v)
    w.row(v) = z[v].real() * g.frame_e1.row(v) + z[v].imag() * g.frame_e2.row(v);
  return w;
}

inline Field world_to_field(const SurfaceGeometry& g, const MatrixXd& w) {
  Field z(g.nv());
  for (int v = 0; v < g.nv(); ++v)
    z[v] = complexd(w.row(v).dot(g.frame_e1.row(v)),
                    w.row(v).dot(g.frame_e2.row(v)));
  return z;
}

// Shape operator applied pointwise in the vertex frames.
inline Field apply_shape(const SurfaceGeometry& g, const Field& z) {
  Field s(g.nv());
  for (int v = 0; v < g.nv(); ++v)
    s[v] = complexd(g.shape_s11[v] * z[v].real() + g.shape_s12[v] * z[v].imag(),
                    g.shape_s12[v] * z[v].real() + g.shape_s22[v] * z[v].imag());
  return s;
}

// Current 1-cochain from phase differences in the transported frame:
// j_e = arg(conj(z_i) e^{-i t_e} z_j) on the canonical edge i -> j. For any
// field that is nonzero at the vertices, (d1 j)_f + holonomy_f is an exact
// integer multiple of 2 pi (the winding of the field around the face).
inline VectorXd current_phase(const SurfaceGeometry& g, const Field& z) {
  VectorXd j(g.ne());
  for (int e = 0; e < g.ne(); ++e) {
    const complexd t(std::cos(g.transport[e]), -std::sin(g.transport[e]));
    j[e] = std::arg(std::conj(z[g.E(e, 0)]) * t * z[g.E(e, 1)]);
  }
  return j;
}

// Smooth (non-branching) current for fields of varying modulus:
// Im(conj(z_i) e^{-i t_e} z_j) normalized by the endpoint moduli.
inline VectorXd current_linear(const SurfaceGeometry& g, const Field& z) {
  VectorXd j(g.ne());
  for (int e = 0; e < g.ne(); ++e) {
    const complexd t(std::cos(g.transport[e]), -std::sin(g.transport[e]));
    const complexd p = std::conj(z[g.E(e, 0)]) * t * z[g.E(e, 1)];
    j[e] = p.imag() / std::max(std::abs(p), 1e-8);
  }
  return j;
}

// Face vorticity of a current 1-cochain: d1 j + holonomy. Sums to 2 pi chi.
inline VectorXd vorticity(const SurfaceGeometry& g, const VectorXd& j) {
  VectorXd w = g.holonomy;
  for (int f = 0; f < g.nf(); ++f)
    for (int c = 0; c < 3; ++c) w[f] += g.FS(f, c) * j[g.FE(f, c)];
  return w;
}

struct Vortex {
  SurfacePoint pos;
  Vector3d world = Vector3d::Zero();
  int degree = 0;
};

// Vortices as clusters of faces carrying nonzero winding. Faces sharing a
// vertex merge into one cluster; the position is the |winding|-weighted
// centroid snapped back to the surface, and the degree is the total winding.
// Clusters of zero net degree (annihilated pairs, noise) are dropped.
inline std::vector<Vortex> locate_vortices(const SurfaceGeometry& g,
                                           const Field& z) {
  const VectorXd om = vorticity(g, current_phase(g, z));
  std::vector<int> charged;
  std::vector<int> label(g.nf(), -1);
  for (int f = 0; f < g.nf(); ++f) {
    const long q = std::lround(om[f] / (2.0 * pi));
    if (q != 0) charged.push_back(f);
  }
  // vertex -> charged faces incidence for vertex-sharing adjacency
  std::unordered_map<int, std::vector<int>> at_vertex;
  for (int f : charged)
    for (int c = 0; c < 3; ++c) at_vertex[g.F(f, c)].push_back(f);
  std::vector<Vortex> out;
  for (int seed : charged) {
    if (label[seed] >= 0) continue;
    std::vector<int> stack{seed}, members;
    label[seed] = 1;
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      members.push_back(f);
      for (int c = 0; c < 3; ++c)
        for (int fn : at_vertex[g.F(f, c)])
          if (label[fn] < 0) {
            label[fn] = 1;
            stack.push_back(fn);
          }
    }
    double total = 0.0;
    Vector3d pos = Vector3d::Zero();
    double wsum = 0.0;
    for (int f : members) {
      total += om[f];
      const double w = std::abs(om[f]);
      const Vector3d cen =
          (g.vpos(g.F(f, 0)) + g.vpos(g.F(f, 1)) + g.vpos(g.F(f, 2))) / 3.0;
      pos += w * cen;
      wsum += w;
    }
    const int degree = static_cast<int>(std::lround(total / (2.0 * pi)));
    if (degree == 0) continue;  // annihilated pair or noise
    Vortex v;
    v.degree = degree;
    v.pos = snap_to_surface(g, pos / wsum);
    v.world = g.point_world(v.pos);
    out.push_back(v);
  }
  return out;
}

struct EnergyBreakdown {
  double dirichlet = 0.0;  // 1/2 sum_e w_e |z_i - e^{-i t_e} z_j|^2
  double extrinsic = 0.0;  // 1/2 sum_v A_v |S z|^2
  double potential = 0.0;  // 1/(4 eps^2) sum_v A_v (|z|^2 - 1)^2
  double total() const { return dirichlet + extrinsic + potential; }
};

inline EnergyBreakdown energy(const SurfaceGeometry& g, const Field& z,
                              double eps) {
  EnergyBreakdown e;
  for (int k = 0; k < g.ne(); ++k) {
    const complexd t(std::cos(g.transport[k]), -std::sin(g.transport[k]));
    e.dirichlet +=
        0.5 * g.cotan_weight[k] * std::norm(z[g.E(k, 0)] - t * z[g.E(k, 1)]);
  }
  const Field sz = apply_shape(g, z);
  for (int v = 0; v < g.nv(); ++v) {
    e.extrinsic += 0.5 * g.vertex_area[v] * std::norm(sz[v]);
    const double m = std::norm(z[v]) - 1.0;
    e.potential += g.vertex_area[v] * m * m / (4.0 * eps * eps);
  }
  return e;
}

// --- real 2n x 2n blocks (interleaved layout: re at 2v, im at 2v+1) ---

inline VectorXd field_to_real(const Field& z) {
  VectorXd v(2 * z.size());
  for (int i = 0; i < z.size(); ++i) {
    v[2 * i] = z[i].real();
    v[2 * i + 1] = z[i].imag();
  }
  return v;
}

inline Field real_to_field(const VectorXd& v) {
  Field z(v.size() / 2);
  for (int i = 0; i < z.size(); ++i) z[i] = complexd(v[2 * i], v[2 * i + 1]);
  return z;
}

// Covariant stiffness: <K v, v> = 2 * dirichlet energy.
inline Eigen::SparseMatrix<double> covariant_stiffness_real(
    const SurfaceGeometry& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(12 * g.ne());
  for (int e = 0; e < g.ne(); ++e) {
    const int i = g.E(e, 0), j = g.E(e, 1);
    const double w = g.cotan_weight[e];
    const double c = std::cos(g.transport[e]), s = std::sin(g.transport[e]);
    for (int k = 0; k < 2; ++k) {
      t.emplace_back(2 * i + k, 2 * i + k, w);
      t.emplace_back(2 * j + k, 2 * j + k, w);
    }
    // -w * R(-t) acting on (re, im) of z_j, and its transpose
    const double r[2][2] = {{c, s}, {-s, c}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        t.emplace_back(2 * i + a, 2 * j + b, -w * r[a][b]);
        t.emplace_back(2 * j + b, 2 * i + a, -w * r[a][b]);
      }
  }
  Eigen::SparseMatrix<double> K(2 * g.nv(), 2 * g.nv());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

inline VectorXd mass_diag_real(const SurfaceGeometry& g) {
  VectorXd m(2 * g.nv());
  for (int v = 0; v < g.nv(); ++v) m[2 * v] = m[2 * v + 1] = g.vertex_area[v];
  return m;
}

// Block-diagonal mass-weighted squared shape operator A_v * S_v^2.
inline Eigen::SparseMatrix<double> mass_shape_sq_real(
    const SurfaceGeometry& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * g.nv());
  for (int v = 0; v < g.nv(); ++v) {
    const double s11 = g.shape_s11[v], s12 = g.shape_s12[v],
                 s22 = g.shape_s22[v];
    const double q11 = s11 * s11 + s12 * s12;
    const double q12 = s12 * (s11 + s22);
    const double q22 = s22 * s22 + s12 * s12;
    const double a = g.vertex_area[v];
    t.emplace_back(2 * v, 2 * v, a * q11);
    t.emplace_back(2 * v, 2 * v + 1, a * q12);
    t.emplace_back(2 * v + 1, 2 * v, a * q12);
    t.emplace_back(2 * v + 1, 2 * v + 1, a * q22);
  }
  Eigen::SparseMatrix<double> M(2 * g.nv(), 2 * g.nv());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

}  // namespace glv

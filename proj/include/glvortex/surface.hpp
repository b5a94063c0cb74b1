#pragma once

// Triangle-mesh representation of a closed oriented surface embedded in R^3,
// together with the intrinsic data needed downstream: edge/face incidence,
// corner angles, angle defects, a per-vertex tangent frame, Levi-Civita
// transport angles along edges, per-face connection holonomy, cotangent
// weights, and a per-vertex shape operator (analytic for the built-in
// surfaces, estimated from vertex normals for general meshes).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace glv {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;
using Eigen::VectorXi;

inline constexpr double pi = std::numbers::pi_v<double>;

inline double fold_angle(double a) {
  // principal branch (-pi, pi]
  a = std::fmod(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  if (a > pi) a -= 2.0 * pi;
  return a;
}

enum class SurfaceKind { Mesh, Sphere, Torus, Ellipsoid };

struct AnalyticParams {
  double radius = 1.0;               // sphere
  double major = 2.0, minor = 0.5;   // torus
  double a = 1.0, b = 1.0, c = 1.0;  // ellipsoid
};

// Point on the surface: a face plus barycentric coordinates.
struct SurfacePoint {
  int face = -1;
  Vector3d bary = Vector3d::Zero();
};

struct SurfaceGeometry {
  MatrixXd V;  // nv x 3
  MatrixXi F;  // nf x 3, CCW w.r.t. outward normal

  MatrixXi E;   // ne x 2, canonical orientation i<j
  MatrixXi FE;  // nf x 3 edge ids; FE(f,c) is edge (F(f,c), F(f,c+1))
  MatrixXi FS;  // nf x 3 sign: +1 if face traverses the edge canonically
  MatrixXi EF;  // ne x 2: face traversing i->j, face traversing j->i

  VectorXd face_area;
  MatrixXd face_normal;
  VectorXd vertex_area;    // barycentric dual cell
  MatrixXd vertex_normal;  // analytic when available

  MatrixXd corner_angle;    // nf x 3, interior angle at F(f,c)
  VectorXd vertex_angle_sum;
  VectorXd angle_defect;    // 2*pi - angle sum

  MatrixXd frame_e1, frame_e2;  // nv x 3 tangent frame, e2 = N x e1
  MatrixXd halfedge_angle;      // nf x 3, rescaled angular coordinate of
                                // outgoing halfedge F(f,c) -> F(f,c+1)
  VectorXd transport;  // ne: parallel transport along i -> j multiplies frame
                       // coordinates by e^{i t}: parallel fields satisfy
                       // z_j = e^{i t_e} z_i
  VectorXd holonomy;   // nf: connection rotation around the face, sums to 2*pi*chi

  VectorXd cotan_weight;  // ne

  // shape operator in vertex frame coordinates (symmetric 2x2)
  VectorXd shape_s11, shape_s12, shape_s22;

  SurfaceKind kind = SurfaceKind::Mesh;
  AnalyticParams params;

  double total_area = 0.0;
  double mean_edge = 0.0;
  int chi = 0;
  int genus = 0;

  int nv() const { return static_cast<int>(V.rows()); }
  int nf() const { return static_cast<int>(F.rows()); }
  int ne() const { return static_cast<int>(E.rows()); }

  Vector3d vpos(int v) const { return V.row(v).transpose(); }

  Vector3d point_world(const SurfacePoint& p) const {
    const auto f = F.row(p.face);
    return p.bary[0] * vpos(f[0]) + p.bary[1] * vpos(f[1]) + p.bary[2] * vpos(f[2]);
  }

  SurfacePoint vertex_point(int v) const {
    for (int f = 0; f < nf(); ++f)
      for (int c = 0; c < 3; ++c)
        if (F(f, c) == v) {
          SurfacePoint p;
          p.face = f;
          p.bary = Vector3d::Zero();
          p.bary[c] = 1.0;
          return p;
        }
    throw std::runtime_error("vertex_point: isolated vertex " + std::to_string(v));
  }

  // nearest vertex of the face carrying p
  int nearest_vertex(const SurfacePoint& p) const {
    int c = 0;
    p.bary.maxCoeff(&c);
    return F(p.face, c);
  }

  Matrix2d shape_at(int v) const {
    Matrix2d s;
    s << shape_s11[v], shape_s12[v], shape_s12[v], shape_s22[v];
    return s;
  }

  // face orthonormal basis (t1, t2, n)
  void face_basis(int f, Vector3d& t1, Vector3d& t2) const {
    t1 = (vpos(F(f, 1)) - vpos(F(f, 0))).normalized();
    const Vector3d n = face_normal.row(f).transpose();
    t2 = n.cross(t1);
  }

  // complex frame coordinate of a world tangent vector at vertex v
  std::complex<double> to_frame(int v, const Vector3d& w) const {
    return {w.dot(frame_e1.row(v).transpose()), w.dot(frame_e2.row(v).transpose())};
  }
  Vector3d from_frame(int v, const std::complex<double>& z) const {
    return z.real() * frame_e1.row(v).transpose() + z.imag() * frame_e2.row(v).transpose();
  }
};

namespace detail {

inline Vector3d closest_point_triangle(const Vector3d& p, const Vector3d& a,
                                       const Vector3d& b, const Vector3d& c,
                                       Vector3d& bary) {
  const Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) { bary = {1, 0, 0}; return a; }
  const Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) { bary = {0, 1, 0}; return b; }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double t = d1 / (d1 - d3);
    bary = {1 - t, t, 0};
    return a + t * ab;
  }
  const Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) { bary = {0, 0, 1}; return c; }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double t = d2 / (d2 - d6);
    bary = {1 - t, 0, t};
    return a + t * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    bary = {0, 1 - t, t};
    return b + t * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  bary = {1 - v - w, v, w};
  return a + ab * v + ac * w;
}

}  // namespace detail

inline SurfacePoint snap_to_surface(const SurfaceGeometry& g, const Vector3d& x) {
  SurfacePoint best;
  double best_d2 = std::numeric_limits<double>::max();
  for (int f = 0; f < g.nf(); ++f) {
    Vector3d bary;
    const Vector3d q = detail::closest_point_triangle(
        x, g.vpos(g.F(f, 0)), g.vpos(g.F(f, 1)), g.vpos(g.F(f, 2)), bary);
    const double d2 = (q - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best.face = f;
      best.bary = bary;
    }
  }
  return best;
}

namespace detail {

struct EdgeBuilder {
  std::unordered_map<std::uint64_t, int> index;
  std::vector<std::array<int, 2>> verts;
  std::vector<std::array<int, 2>> faces;  // [canonical traverser, reverse traverser]

  int lookup(int a, int b, int nv) {
    const int i = std::min(a, b), j = std::max(a, b);
    const std::uint64_t key = std::uint64_t(i) * std::uint64_t(nv) + std::uint64_t(j);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(verts.size());
    index.emplace(key, id);
    verts.push_back({i, j});
    faces.push_back({-1, -1});
    return id;
  }
};

inline void analytic_normal_shape(const SurfaceGeometry& g, int v, Vector3d& n,
                                  Eigen::Matrix3d* sw = nullptr) {
  const Vector3d x = g.vpos(v);
  switch (g.kind) {
    case SurfaceKind::Sphere: {
      n = x.normalized();
      if (sw) *sw = -(1.0 / g.params.radius) * (Eigen::Matrix3d::Identity() - n * n.transpose());
      break;
    }
    case SurfaceKind::Ellipsoid: {
      const double a = g.params.a, b = g.params.b, c = g.params.c;
      const Vector3d grad(x[0] / (a * a), x[1] / (b * b), x[2] / (c * c));
      n = grad.normalized();
      if (sw) {
        const Eigen::Matrix3d H =
            Vector3d(1 / (a * a), 1 / (b * b), 1 / (c * c)).asDiagonal();
        const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - n * n.transpose();
        *sw = -(P * H * P) / grad.norm();
      }
      break;
    }
    case SurfaceKind::Torus: {
      const double R = g.params.major, r = g.params.minor;
      const double u = std::atan2(x[1], x[0]);
      const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1]) - R;
      const double w = std::atan2(x[2], rho);
      const double cu = std::cos(u), su = std::sin(u), cw = std::cos(w), sw_ = std::sin(w);
      n = Vector3d(cw * cu, cw * su, sw_);
      if (sw) {
        const Vector3d ev(-sw_ * cu, -sw_ * su, cw);  // tube direction
        const Vector3d eu(-su, cu, 0);
        *sw = -(1.0 / r) * ev * ev.transpose() -
              (cw / (R + r * cw)) * eu * eu.transpose();
      }
      break;
    }
    default:
      throw std::logic_error("analytic_normal_shape: mesh surface");
  }
}

}  // namespace detail

// Vertex normals as angle-weighted averages of incident face normals.
inline MatrixXd estimate_vertex_normals(const MatrixXd& V, const MatrixXi& F,
                                        const MatrixXd& face_normal,
                                        const MatrixXd& corner_angle) {
  MatrixXd N = MatrixXd::Zero(V.rows(), 3);
  for (int f = 0; f < F.rows(); ++f)
    for (int c = 0; c < 3; ++c)
      N.row(F(f, c)) += corner_angle(f, c) * face_normal.row(f);
  for (int v = 0; v < N.rows(); ++v) {
    const double n = N.row(v).norm();
    if (n < 1e-300) throw std::runtime_error("degenerate vertex normal at vertex " + std::to_string(v));
    N.row(v) /= n;
  }
  return N;
}

// Per-face shape operator from linear interpolation of vertex normals,
// -grad N projected to the face plane and symmetrized, then area-averaged
// onto vertices and expressed in the vertex frames.
inline void estimate_shape_operators(SurfaceGeometry& g) {
  const int nv = g.nv();
  std::vector<Matrix2d> acc(nv, Matrix2d::Zero());
  VectorXd wsum = VectorXd::Zero(nv);
  for (int f = 0; f < g.nf(); ++f) {
    const int i = g.F(f, 0), j = g.F(f, 1), k = g.F(f, 2);
    const Vector3d pi_ = g.vpos(i), pj = g.vpos(j), pk = g.vpos(k);
    const Vector3d nf = g.face_normal.row(f).transpose();
    const double A = g.face_area[f];
    // gradients of barycentric coordinates
    const Vector3d gl[3] = {nf.cross(pk - pj) / (2 * A), nf.cross(pi_ - pk) / (2 * A),
                            nf.cross(pj - pi_) / (2 * A)};
    const Vector3d nvtx[3] = {g.vertex_normal.row(i).transpose(),
                              g.vertex_normal.row(j).transpose(),
                              g.vertex_normal.row(k).transpose()};
    Vector3d t1, t2;
    g.face_basis(f, t1, t2);
    Matrix2d B;
    for (int a = 0; a < 2; ++a) {
      const Vector3d ta = a == 0 ? t1 : t2;
      for (int b = 0; b < 2; ++b) {
        const Vector3d tb = b == 0 ? t1 : t2;
        double s = 0;
        for (int c = 0; c < 3; ++c) s += gl[c].dot(tb) * nvtx[c].dot(ta);
        B(a, b) = -s;
      }
    }
    const Matrix2d Sf = 0.5 * (B + B.transpose());
    // transfer to each corner's vertex frame
    for (int c = 0; c < 3; ++c) {
      const int v = g.F(f, c);
      const Vector3d e1 = g.frame_e1.row(v).transpose(), e2 = g.frame_e2.row(v).transpose();
      // project frame into face plane
      auto proj = [&](const Vector3d& w) {
        Vector3d p = w - w.dot(nf) * nf;
        const double n2 = p.norm();
        return n2 > 1e-14 ? Vector3d(p / n2) : Vector3d(t1);
      };
      const Vector3d f1 = proj(e1), f2 = proj(e2);
      Matrix2d J;  // columns: face-basis coords of projected frame vectors
      J << f1.dot(t1), f2.dot(t1), f1.dot(t2), f2.dot(t2);
      const Matrix2d Sv = J.transpose() * Sf * J;
      const double w = A / 3.0;
      acc[v] += w * 0.5 * (Sv + Sv.transpose());
      wsum[v] += w;
    }
  }
  g.shape_s11.resize(nv);
  g.shape_s12.resize(nv);
  g.shape_s22.resize(nv);
  for (int v = 0; v < nv; ++v) {
    const Matrix2d s = acc[v] / wsum[v];
    g.shape_s11[v] = s(0, 0);
    g.shape_s12[v] = 0.5 * (s(0, 1) + s(1, 0));
    g.shape_s22[v] = s(1, 1);
  }
}

// Builds the full geometry. Throws on non-triangular input, out-of-range or
// degenerate faces, boundary or non-manifold edges, inconsistent orientation,
// non-manifold vertices, and disconnected meshes; messages carry element ids.
inline SurfaceGeometry build_surface(const MatrixXd& V, const MatrixXi& F,
                                     SurfaceKind kind = SurfaceKind::Mesh,
                                     AnalyticParams params = {}) {
  SurfaceGeometry g;
  g.V = V;
  g.F = F;
  g.kind = kind;
  g.params = params;
  const int nv = g.nv(), nf = g.nf();
  if (F.cols() != 3) throw std::runtime_error("mesh must be triangular");
  if (nv < 4 || nf < 4) throw std::runtime_error("mesh too small");

  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) {
      if (F(f, c) < 0 || F(f, c) >= nv)
        throw std::runtime_error("face " + std::to_string(f) + " references vertex " +
                                 std::to_string(F(f, c)) + " out of range");
      if (F(f, c) == F(f, (c + 1) % 3))
        throw std::runtime_error("face " + std::to_string(f) + " is degenerate");
    }

  // edges and incidence
  detail::EdgeBuilder eb;
  g.FE.resize(nf, 3);
  g.FS.resize(nf, 3);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) {
      const int a = F(f, c), b = F(f, (c + 1) % 3);
      const int e = eb.lookup(a, b, nv);
      const int slot = a < b ? 0 : 1;
      if (eb.faces[e][slot] != -1) {
        if (eb.faces[e][1 - slot] != -1)
          throw std::runtime_error("non-manifold edge (" + std::to_string(std::min(a, b)) +
                                   "," + std::to_string(std::max(a, b)) + ")");
        throw std::runtime_error("inconsistent orientation: faces " +
                                 std::to_string(eb.faces[e][slot]) + " and " +
                                 std::to_string(f) + " traverse edge (" +
                                 std::to_string(a) + "," + std::to_string(b) +
                                 ") in the same direction");
      }
      eb.faces[e][slot] = f;
      g.FE(f, c) = e;
      g.FS(f, c) = a < b ? 1 : -1;
    }
  const int ne = static_cast<int>(eb.verts.size());
  g.E.resize(ne, 2);
  g.EF.resize(ne, 2);
  for (int e = 0; e < ne; ++e) {
    g.E(e, 0) = eb.verts[e][0];
    g.E(e, 1) = eb.verts[e][1];
    if (eb.faces[e][0] == -1 || eb.faces[e][1] == -1)
      throw std::runtime_error("boundary edge (" + std::to_string(eb.verts[e][0]) + "," +
                               std::to_string(eb.verts[e][1]) + "): surface must be closed");
    g.EF(e, 0) = eb.faces[e][0];
    g.EF(e, 1) = eb.faces[e][1];
  }

  // face areas, normals
  g.face_area.resize(nf);
  g.face_normal.resize(nf, 3);
  for (int f = 0; f < nf; ++f) {
    const Vector3d a = g.vpos(F(f, 0)), b = g.vpos(F(f, 1)), c = g.vpos(F(f, 2));
    const Vector3d n = (b - a).cross(c - a);
    const double n2 = n.norm();
    if (n2 < 1e-300) throw std::runtime_error("face " + std::to_string(f) + " has zero area");
    g.face_area[f] = 0.5 * n2;
    g.face_normal.row(f) = (n / n2).transpose();
  }
  g.total_area = g.face_area.sum();

  // connectivity (single component) via face BFS
  {
    std::vector<char> seen(nf, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
      const int f = q.front();
      q.pop();
      for (int c = 0; c < 3; ++c) {
        const int e = g.FE(f, c);
        const int other = g.EF(e, 0) == f ? g.EF(e, 1) : g.EF(e, 0);
        if (!seen[other]) {
          seen[other] = 1;
          ++count;
          q.push(other);
        }
      }
    }
    if (count != nf) throw std::runtime_error("mesh has multiple connected components");
  }

  g.chi = nv - ne + nf;
  if ((2 - g.chi) % 2 != 0) throw std::runtime_error("non-orientable connectivity");
  g.genus = (2 - g.chi) / 2;

  // corner angles (law of cosines), angle sums, defects
  g.corner_angle.resize(nf, 3);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) {
      const Vector3d p = g.vpos(F(f, c));
      const Vector3d u = g.vpos(F(f, (c + 1) % 3)) - p;
      const Vector3d w = g.vpos(F(f, (c + 2) % 3)) - p;
      const double cosang = std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0);
      g.corner_angle(f, c) = std::acos(cosang);
    }
  g.vertex_angle_sum = VectorXd::Zero(nv);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) g.vertex_angle_sum[F(f, c)] += g.corner_angle(f, c);
  g.angle_defect = (2.0 * pi) - g.vertex_angle_sum.array();

  // vertex areas
  g.vertex_area = VectorXd::Zero(nv);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) g.vertex_area[F(f, c)] += g.face_area[f] / 3.0;

  // vertex normals
  if (kind == SurfaceKind::Mesh) {
    g.vertex_normal = estimate_vertex_normals(V, F, g.face_normal, g.corner_angle);
  } else {
    g.vertex_normal.resize(nv, 3);
    for (int v = 0; v < nv; ++v) {
      Vector3d n;
      detail::analytic_normal_shape(g, v, n);
      g.vertex_normal.row(v) = n.transpose();
    }
  }

  // vertex star walk: ordered outgoing halfedges, rescaled angular coordinates.
  // Face traversing halfedge (u->w): EF(e, u<w ? 0 : 1).
  auto face_of_halfedge = [&](int u, int w) {
    const int i = std::min(u, w), j = std::max(u, w);
    const auto it = eb.index.find(std::uint64_t(i) * std::uint64_t(nv) + std::uint64_t(j));
    return g.EF(it->second, u < w ? 0 : 1);
  };
  auto corner_of = [&](int f, int v) {
    for (int c = 0; c < 3; ++c)
      if (g.F(f, c) == v) return c;
    throw std::logic_error("corner_of");
  };

  // first outgoing halfedge per vertex (deterministic: lowest incident face)
  std::vector<int> first_face(nv, -1);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c)
      if (first_face[F(f, c)] == -1) first_face[F(f, c)] = f;

  g.halfedge_angle.setConstant(nf, 3, std::numeric_limits<double>::quiet_NaN());
  g.frame_e1.resize(nv, 3);
  g.frame_e2.resize(nv, 3);
  std::vector<int> star_count(nv, 0);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) star_count[F(f, c)]++;

  for (int v = 0; v < nv; ++v) {
    const double scale = 2.0 * pi / g.vertex_angle_sum[v];
    int f = first_face[v];
    int c = corner_of(f, v);
    const int a0 = g.F(f, (c + 1) % 3);
    double phi = 0.0;
    int steps = 0;
    while (true) {
      g.halfedge_angle(f, c) = phi;
      phi += g.corner_angle(f, c) * scale;
      const int wn = g.F(f, (c + 2) % 3);  // next outgoing edge target (CCW)
      if (++steps > star_count[v])
        throw std::runtime_error("non-manifold vertex " + std::to_string(v));
      if (wn == a0) break;
      f = face_of_halfedge(v, wn);
      c = corner_of(f, v);
    }
    if (steps != star_count[v])
      throw std::runtime_error("non-manifold vertex " + std::to_string(v));
    // frame: e1 along the first outgoing edge projected to the tangent plane
    const Vector3d n = g.vertex_normal.row(v).transpose();
    const Vector3d d0 = g.vpos(a0) - g.vpos(v);
    Vector3d e1 = d0 - d0.dot(n) * n;
    const double e1n = e1.norm();
    if (e1n < 1e-14) throw std::runtime_error("degenerate tangent frame at vertex " + std::to_string(v));
    e1 /= e1n;
    g.frame_e1.row(v) = e1.transpose();
    g.frame_e2.row(v) = n.cross(e1).transpose();
  }

  // transport angles: moving a frame coordinate along i -> j multiplies it by
  // e^{i t}, t = phi_j(j->i) + pi - phi_i(i->j); the product of the factors
  // around a counterclockwise face is e^{i holonomy}
  auto halfedge_coord = [&](int u, int w) {
    const int f = face_of_halfedge(u, w);
    return g.halfedge_angle(f, corner_of(f, u));
  };
  g.transport.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const int i = g.E(e, 0), j = g.E(e, 1);
    g.transport[e] = fold_angle(halfedge_coord(j, i) + pi - halfedge_coord(i, j));
  }

  // per-face holonomy: sum of rescaled corner angles minus pi
  g.holonomy.resize(nf);
  for (int f = 0; f < nf; ++f) {
    double s = 0;
    for (int c = 0; c < 3; ++c) {
      const int v = g.F(f, c);
      s += g.corner_angle(f, c) * (2.0 * pi / g.vertex_angle_sum[v]);
    }
    g.holonomy[f] = s - pi;
  }

  // cotangent weights
  g.cotan_weight = VectorXd::Zero(ne);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) {
      // corner c is opposite edge (c+1, c+2)
      const int a = g.F(f, (c + 1) % 3), b = g.F(f, (c + 2) % 3);
      const Vector3d p = g.vpos(g.F(f, c));
      const Vector3d u = g.vpos(a) - p, w = g.vpos(b) - p;
      const double cot = u.dot(w) / u.cross(w).norm();
      const int i = std::min(a, b), j = std::max(a, b);
      const auto it = eb.index.find(std::uint64_t(i) * std::uint64_t(nv) + std::uint64_t(j));
      g.cotan_weight[it->second] += 0.5 * cot;
    }

  double esum = 0;
  for (int e = 0; e < ne; ++e) esum += (g.vpos(g.E(e, 0)) - g.vpos(g.E(e, 1))).norm();
  g.mean_edge = esum / ne;

  // shape operators
  if (kind == SurfaceKind::Mesh) {
    estimate_shape_operators(g);
  } else {
    g.shape_s11.resize(nv);
    g.shape_s12.resize(nv);
    g.shape_s22.resize(nv);
    for (int v = 0; v < nv; ++v) {
      Vector3d n;
      Eigen::Matrix3d sw;
      detail::analytic_normal_shape(g, v, n, &sw);
      const Vector3d e1 = g.frame_e1.row(v).transpose(), e2 = g.frame_e2.row(v).transpose();
      g.shape_s11[v] = e1.dot(sw * e1);
      g.shape_s12[v] = 0.5 * (e1.dot(sw * e2) + e2.dot(sw * e1));
      g.shape_s22[v] = e2.dot(sw * e2);
    }
  }
  return g;
}

// ---------------------------------------------------------------- builders

inline SurfaceGeometry icosphere(double radius, int refine) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vector3d> vs = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                              {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                              {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<int, 3>> fs = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
      {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
      {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
      {8, 6, 7},  {9, 8, 1}};
  for (auto& v : vs) v.normalize();
  for (int r = 0; r < refine; ++r) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const int id = static_cast<int>(vs.size());
      vs.push_back(((vs[a] + vs[b]) * 0.5).normalized());
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(fs.size() * 4);
    for (const auto& f : fs) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      nf.push_back({f[0], ab, ca});
      nf.push_back({f[1], bc, ab});
      nf.push_back({f[2], ca, bc});
      nf.push_back({ab, bc, ca});
    }
    fs = std::move(nf);
  }
  MatrixXd V(vs.size(), 3);
  for (size_t i = 0; i < vs.size(); ++i) V.row(i) = (radius * vs[i]).transpose();
  MatrixXi F(fs.size(), 3);
  for (size_t i = 0; i < fs.size(); ++i) F.row(i) << fs[i][0], fs[i][1], fs[i][2];
  AnalyticParams p;
  p.radius = radius;
  return build_surface(V, F, SurfaceKind::Sphere, p);
}

// Spheroids (a == b) are meshed by pushing the icosphere through the inverse
// of the conformal latitude map t -> 2 atan(exp(integral of sigma/rho)).  The
// map is conformal, so the near-equilateral icosphere faces stay
// near-equilateral on the spheroid (plain z-scaling shears every face in the
// mid-latitude belt and degrades cotangent weights).
inline SurfaceGeometry ellipsoid(double a, double b, double c, int refine) {
  SurfaceGeometry unit = icosphere(1.0, refine);
  MatrixXd V = unit.V;
  if (std::abs(a - b) < 1e-14 && std::abs(a) > 1e-14) {
    const double cr = c / a;  // meridian profile of the unit spheroid
    const int N = 20000;
    const double t0 = 1e-6;
    std::vector<double> ts(N + 1), Th(N + 1), q(N + 1);
    auto f = [&](double t) {
      const double ct = std::cos(t), st = std::sin(t);
      return std::sqrt(ct * ct + cr * cr * st * st) / st;
    };
    for (int i = 0; i <= N; ++i) ts[i] = t0 + (pi - 2 * t0) * i / N;
    const int ieq = N / 2;
    q[ieq] = 0.0;
    for (int i = ieq + 1; i <= N; ++i)
      q[i] = q[i - 1] + 0.5 * (f(ts[i - 1]) + f(ts[i])) * (ts[i] - ts[i - 1]);
    for (int i = ieq - 1; i >= 0; --i)
      q[i] = q[i + 1] - 0.5 * (f(ts[i + 1]) + f(ts[i])) * (ts[i + 1] - ts[i]);
    for (int i = 0; i <= N; ++i) Th[i] = 2.0 * std::atan(std::exp(q[i]));
    auto invert = [&](double T) {
      int lo = 0, hi = N;
      while (hi - lo > 1) {
        const int mi = (lo + hi) / 2;
        (Th[mi] <= T ? lo : hi) = mi;
      }
      const double u = (T - Th[lo]) / std::max(Th[hi] - Th[lo], 1e-300);
      return ts[lo] + u * (ts[hi] - ts[lo]);
    };
    for (int v = 0; v < V.rows(); ++v) {
      const Vector3d x = V.row(v).transpose();
      const double T = std::atan2(std::hypot(x[0], x[1]), x[2]);
      const double phi = std::atan2(x[1], x[0]);
      if (T < Th[0] || T > Th[N]) {
        V.row(v) << 0, 0, (T < 0.5 * pi ? c : -c);
        continue;
      }
      const double t = invert(T);
      V.row(v) << a * std::sin(t) * std::cos(phi),
          a * std::sin(t) * std::sin(phi), c * std::cos(t);
    }
  } else {
    V.col(0) *= a;
    V.col(1) *= b;
    V.col(2) *= c;
  }
  AnalyticParams p;
  p.a = a;
  p.b = b;
  p.c = c;
  return build_surface(V, unit.F, SurfaceKind::Ellipsoid, p);
}

// Staggered rows (alternate half-cell offsets in u) keep the triangles close
// to equilateral; an axis-aligned split would put near-zero cotangent weights
// on every diagonal.
inline SurfaceGeometry torus_grid(double R, double r, int nu, int nvv) {
  if (nu < 3 || nvv < 4) throw std::runtime_error("torus grid too coarse");
  if (nvv % 2 != 0) throw std::runtime_error("torus grid requires an even row count");
  MatrixXd V(nu * nvv, 3);
  for (int iv = 0; iv < nvv; ++iv)
    for (int iu = 0; iu < nu; ++iu) {
      const double u = 2.0 * pi * (iu + 0.5 * (iv % 2)) / nu, v = 2.0 * pi * iv / nvv;
      V.row(iu * nvv + iv) << (R + r * std::cos(v)) * std::cos(u),
          (R + r * std::cos(v)) * std::sin(u), r * std::sin(v);
    }
  MatrixXi F(2 * nu * nvv, 3);
  int n = 0;
  auto id = [&](int iu, int iv) { return ((iu + nu) % nu) * nvv + ((iv + nvv) % nvv); };
  for (int iv = 0; iv < nvv; ++iv)
    for (int iu = 0; iu < nu; ++iu) {
      const int a = id(iu, iv), b = id(iu + 1, iv);
      const int c = id(iu, iv + 1), d = id(iu + 1, iv + 1);
      if (iv % 2 == 0) {  // upper row shifted right by half a cell
        F.row(n++) << a, b, c;
        F.row(n++) << b, d, c;
      } else {  // upper row shifted left
        F.row(n++) << a, b, d;
        F.row(n++) << a, d, c;
      }
    }
  AnalyticParams p;
  p.major = R;
  p.minor = r;
  return build_surface(V, F, SurfaceKind::Torus, p);
}

namespace detail {

// Flip faces until orientation is globally consistent, then make it outward
// (positive enclosed volume). Used only by the genus-2 builder.
inline void orient_consistently(const MatrixXd& V, MatrixXi& F) {
  const int nf = static_cast<int>(F.rows());
  std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
  const std::uint64_t nv = V.rows();
  auto key = [&](int a, int b) {
    return std::uint64_t(std::min(a, b)) * nv + std::uint64_t(std::max(a, b));
  };
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) edge_faces[key(F(f, c), F(f, (c + 1) % 3))].push_back(f);
  std::vector<char> seen(nf, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  auto traverses = [&](int f, int a, int b) {
    for (int c = 0; c < 3; ++c)
      if (F(f, c) == a && F(f, (c + 1) % 3) == b) return true;
    return false;
  };
  while (!q.empty()) {
    const int f = q.front();
    q.pop();
    for (int c = 0; c < 3; ++c) {
      const int a = F(f, c), b = F(f, (c + 1) % 3);
      for (int other : edge_faces[key(a, b)]) {
        if (other == f || seen[other]) continue;
        if (traverses(other, a, b)) std::swap(F(other, 1), F(other, 2));
        seen[other] = 1;
        q.push(other);
      }
    }
  }
  double vol = 0;
  for (int f = 0; f < nf; ++f) {
    const Vector3d a = V.row(F(f, 0)), b = V.row(F(f, 1)), c = V.row(F(f, 2));
    vol += a.dot(b.cross(c)) / 6.0;
  }
  if (vol < 0)
    for (int f = 0; f < nf; ++f) std::swap(F(f, 1), F(f, 2));
}

}  // namespace detail

// Connected sum of two tori: remove one vertex star from each and bridge the
// two hexagonal rings. Euler characteristic -2 by construction.
inline SurfaceGeometry genus2_surface(double R = 2.0, double r = 0.5, int nu = 48,
                                      int nvv = 24) {
  const SurfaceGeometry base = torus_grid(R, r, nu, nvv);
  const double gap = 0.45 * r;
  const double D = R + r + gap / 2.0;
  const int remove_a = 0;  // vertex (u=0, v=0): outermost point on +x
  // copy A: shifted to x<0, removed vertex at x = -gap/2
  MatrixXd VA = base.V;
  VA.col(0).array() -= D;
  // copy B: mirrored across x=0 then shifted to x>0, removed vertex at x = +gap/2
  MatrixXd VB = base.V;
  VB.col(0) *= -1.0;
  VB.col(0).array() += D;

  const int n0 = base.nv();
  MatrixXd V(2 * n0, 3);
  V.topRows(n0) = VA;
  V.bottomRows(n0) = VB;

  std::vector<std::array<int, 3>> faces;
  auto keep = [&](int f) {
    for (int c = 0; c < 3; ++c)
      if (base.F(f, c) == remove_a) return false;
    return true;
  };
  for (int f = 0; f < base.nf(); ++f)
    if (keep(f)) {
      faces.push_back({base.F(f, 0), base.F(f, 1), base.F(f, 2)});
      faces.push_back({base.F(f, 0) + n0, base.F(f, 1) + n0, base.F(f, 2) + n0});
    }

  // ring of the removed vertex, ordered by angle in the (y,z) plane
  std::vector<int> ring;
  for (int f = 0; f < base.nf(); ++f)
    if (!keep(f))
      for (int c = 0; c < 3; ++c) {
        const int v = base.F(f, c);
        if (v != remove_a && std::find(ring.begin(), ring.end(), v) == ring.end())
          ring.push_back(v);
      }
  std::sort(ring.begin(), ring.end(), [&](int a, int b) {
    return std::atan2(VA(a, 2), VA(a, 1)) < std::atan2(VA(b, 2), VA(b, 1));
  });
  const int m = static_cast<int>(ring.size());
  // mirrored copy pairs up at matching angles
  for (int k = 0; k < m; ++k) {
    const int a0 = ring[k], a1 = ring[(k + 1) % m];
    const int b0 = ring[k] + n0, b1 = ring[(k + 1) % m] + n0;
    faces.push_back({a0, a1, b0});
    faces.push_back({a1, b1, b0});
  }

  // relax the seam: the raw bridge between the hexagonal rings is obtuse
  // enough to produce negative cotangent weights
  {
    std::vector<std::vector<int>> nbr(V.rows());
    for (const auto& f : faces)
      for (int c = 0; c < 3; ++c) {
        nbr[f[c]].push_back(f[(c + 1) % 3]);
        nbr[f[c]].push_back(f[(c + 2) % 3]);
      }
    std::vector<int> seam;
    for (int k = 0; k < m; ++k) {
      seam.push_back(ring[k]);
      seam.push_back(ring[k] + n0);
      for (int w : nbr[ring[k]]) seam.push_back(w);
      for (int w : nbr[ring[k] + n0]) seam.push_back(w);
    }
    std::sort(seam.begin(), seam.end());
    seam.erase(std::unique(seam.begin(), seam.end()), seam.end());
    for (int round = 0; round < 30; ++round) {
      MatrixXd Vnew = V;
      for (int v : seam) {
        Vector3d mean = Vector3d::Zero();
        for (int w : nbr[v]) mean += V.row(w).transpose();
        mean /= static_cast<double>(nbr[v].size());
        Vnew.row(v) = 0.5 * V.row(v) + 0.5 * mean.transpose();
      }
      V = Vnew;
    }
  }

  // drop the two removed (now unreferenced) vertices
  std::vector<int> remap(V.rows(), -1);
  int kept = 0;
  for (const auto& f : faces)
    for (int c = 0; c < 3; ++c)
      if (remap[f[c]] == -1) remap[f[c]] = kept++;
  MatrixXd Vc(kept, 3);
  for (int v = 0; v < static_cast<int>(V.rows()); ++v)
    if (remap[v] != -1) Vc.row(remap[v]) = V.row(v);

  MatrixXi F(faces.size(), 3);
  for (size_t i = 0; i < faces.size(); ++i)
    F.row(i) << remap[faces[i][0]], remap[faces[i][1]], remap[faces[i][2]];
  detail::orient_consistently(Vc, F);
  return build_surface(Vc, F, SurfaceKind::Mesh);
}

// ---------------------------------------------------------------- mesh IO

inline SurfaceGeometry load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  std::vector<Vector3d> vs;
  std::vector<std::array<int, 3>> fs;
  const bool off = path.size() >= 4 && path.substr(path.size() - 4) == ".off";
  const bool obj = path.size() >= 4 && path.substr(path.size() - 4) == ".obj";
  if (!off && !obj) throw std::runtime_error("unsupported mesh format (expect .off or .obj): " + path);

  if (off) {
    std::string tok;
    in >> tok;
    if (tok != "OFF") throw std::runtime_error("malformed OFF header in " + path);
    long nv = 0, nf = 0, ne = 0;
    in >> nv >> nf >> ne;
    for (long i = 0; i < nv; ++i) {
      Vector3d p;
      in >> p[0] >> p[1] >> p[2];
      vs.push_back(p);
    }
    for (long i = 0; i < nf; ++i) {
      int k;
      in >> k;
      if (k != 3)
        throw std::runtime_error("face " + std::to_string(i) + " in " + path +
                                 " is not a triangle");
      std::array<int, 3> f{};
      in >> f[0] >> f[1] >> f[2];
      fs.push_back(f);
    }
    if (!in) throw std::runtime_error("truncated OFF file: " + path);
  } else {
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string tag;
      if (!(ls >> tag)) continue;
      if (tag == "v") {
        Vector3d p;
        if (!(ls >> p[0] >> p[1] >> p[2]))
          throw std::runtime_error("malformed vertex at line " + std::to_string(lineno));
        vs.push_back(p);
      } else if (tag == "f") {
        std::vector<int> idx;
        std::string t;
        while (ls >> t) {
          const auto slash = t.find('/');
          idx.push_back(std::stoi(slash == std::string::npos ? t : t.substr(0, slash)) - 1);
        }
        if (idx.size() != 3)
          throw std::runtime_error("face at line " + std::to_string(lineno) +
                                   " is not a triangle");
        fs.push_back({idx[0], idx[1], idx[2]});
      }
    }
  }
  MatrixXd V(vs.size(), 3);
  for (size_t i = 0; i < vs.size(); ++i) V.row(i) = vs[i].transpose();
  MatrixXi F(fs.size(), 3);
  for (size_t i = 0; i < fs.size(); ++i) F.row(i) << fs[i][0], fs[i][1], fs[i][2];
  return build_surface(V, F, SurfaceKind::Mesh);
}

}  // namespace glv

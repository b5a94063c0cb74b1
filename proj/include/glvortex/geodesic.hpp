#pragma once

// Geodesic utilities on the mesh: distance fields (Dijkstra seeded on the
// source face, then triangle-unfolding relaxation sweeps), geodesic tracing
// by walking across faces (carrying parallel-transported vectors), and
// small-step exponential/log maps. The round sphere uses exact formulas for
// distances and log maps.

#include "surface.hpp"

#include <queue>
#include <unordered_map>

namespace glv {

// Per-vertex geodesic distance from a surface point.
inline VectorXd distance_field(const SurfaceGeometry& g, const SurfacePoint& src) {
  const int nv = g.nv();
  VectorXd d = VectorXd::Constant(nv, std::numeric_limits<double>::max());
  const Vector3d s = g.point_world(src);

  if (g.kind == SurfaceKind::Sphere) {
    const double R = g.params.radius;
    const Vector3d sn = s.normalized();
    for (int v = 0; v < nv; ++v) {
      const double c = std::clamp(sn.dot(g.vpos(v).normalized()), -1.0, 1.0);
      d[v] = R * std::acos(c);
    }
    return d;
  }

  // Dijkstra over the edge graph, seeded with the source face corners
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  for (int c = 0; c < 3; ++c) {
    const int v = g.F(src.face, c);
    const double dv = (g.vpos(v) - s).norm();
    if (dv < d[v]) {
      d[v] = dv;
      q.push({dv, v});
    }
  }
  std::vector<std::vector<std::pair<int, double>>> adj(nv);
  for (int e = 0; e < g.ne(); ++e) {
    const int i = g.E(e, 0), j = g.E(e, 1);
    const double len = (g.vpos(i) - g.vpos(j)).norm();
    adj[i].push_back({j, len});
    adj[j].push_back({i, len});
  }
  while (!q.empty()) {
    const auto [dist, v] = q.top();
    q.pop();
    if (dist > d[v] + 1e-15) continue;
    for (const auto& [w, len] : adj[v])
      if (d[v] + len < d[w]) {
        d[w] = d[v] + len;
        q.push({d[w], w});
      }
  }

  // unfolding correction: relax each corner from the other two via a planar
  // virtual source (fast-marching style local solver)
  auto relax = [&](int f) {
    bool changed = false;
    for (int c = 0; c < 3; ++c) {
      const int ia = g.F(f, c), ib = g.F(f, (c + 1) % 3), ic_ = g.F(f, (c + 2) % 3);
      const double da = d[ia], db = d[ib];
      if (da == std::numeric_limits<double>::max() || db == std::numeric_limits<double>::max())
        continue;
      const Vector3d A = g.vpos(ia), B = g.vpos(ib), C = g.vpos(ic_);
      const double ab = (B - A).norm();
      double cand;
      if (std::abs(da - db) > ab) {
        cand = std::min(da + (C - A).norm(), db + (C - B).norm());
      } else {
        // local 2D frame: A at origin, B on +x, C above
        const Vector3d ex = (B - A) / ab;
        const Vector3d n = (B - A).cross(C - A);
        const Vector3d ey = n.cross(B - A).normalized();
        const double cx = (C - A).dot(ex), cy = (C - A).dot(ey);
        const double sx = (da * da - db * db + ab * ab) / (2 * ab);
        const double sy2 = da * da - sx * sx;
        if (sy2 < 0) {
          cand = std::min(da + (C - A).norm(), db + (C - B).norm());
        } else {
          const double sy = -std::sqrt(sy2);
          // segment from source to C must cross the edge AB
          const double t = sx + (cx - sx) * (0 - sy) / (cy - sy);
          if (t < 0 || t > ab)
            cand = std::min(da + (C - A).norm(), db + (C - B).norm());
          else
            cand = std::hypot(cx - sx, cy - sy);
        }
      }
      if (cand < d[ic_] - 1e-14) {
        d[ic_] = cand;
        changed = true;
      }
    }
    return changed;
  };
  for (int sweep = 0; sweep < 30; ++sweep) {
    bool changed = false;
    if (sweep % 2 == 0) {
      for (int f = 0; f < g.nf(); ++f) changed |= relax(f);
    } else {
      for (int f = g.nf() - 1; f >= 0; --f) changed |= relax(f);
    }
    if (!changed) break;
  }
  return d;
}

inline double distance_at(const SurfaceGeometry& g, const VectorXd& field,
                          const SurfacePoint& p) {
  return field[g.F(p.face, 0)] * p.bary[0] + field[g.F(p.face, 1)] * p.bary[1] +
         field[g.F(p.face, 2)] * p.bary[2];
}

inline double geodesic_distance(const SurfaceGeometry& g, const SurfacePoint& p,
                                const SurfacePoint& q) {
  if (g.kind == SurfaceKind::Sphere) {
    const double R = g.params.radius;
    const Vector3d a = g.point_world(p).normalized(), b = g.point_world(q).normalized();
    return R * std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  }
  return distance_at(g, distance_field(g, p), q);
}

struct GeodesicTrace {
  SurfacePoint end;
  Vector3d direction = Vector3d::Zero();      // unit tangent at the endpoint
  std::vector<Vector3d> transported;          // parallel transport of carried vectors
};

namespace detail {

inline Vector3d face_bary(const SurfaceGeometry& g, int f, const Vector3d& x) {
  const Vector3d a = g.vpos(g.F(f, 0)), b = g.vpos(g.F(f, 1)), c = g.vpos(g.F(f, 2));
  const Vector3d n = g.face_normal.row(f).transpose();
  const double A = g.face_area[f];
  Vector3d bc;
  bc[0] = n.dot((b - x).cross(c - x)) / (2 * A);
  bc[1] = n.dot((c - x).cross(a - x)) / (2 * A);
  bc[2] = 1.0 - bc[0] - bc[1];
  return bc;
}

}  // namespace detail

// Walk a geodesic of given length: straight within each face, rotated about
// shared edges (unfolding) when crossing. Carried vectors are rotated the
// same way, which realizes discrete parallel transport along the path.
inline GeodesicTrace trace_geodesic(const SurfaceGeometry& g, const SurfacePoint& start,
                                    const Vector3d& dir_world, double length,
                                    const std::vector<Vector3d>& carry = {}) {
  GeodesicTrace out;
  out.transported = carry;
  int f = start.face;
  Vector3d x = g.point_world(start);
  {
    // pull off corners/edges so the exit search is unambiguous
    const Vector3d centroid = (g.vpos(g.F(f, 0)) + g.vpos(g.F(f, 1)) + g.vpos(g.F(f, 2))) / 3.0;
    x += 1e-9 * (centroid - x);
  }
  Vector3d n = g.face_normal.row(f).transpose();
  Vector3d dir = dir_world - dir_world.dot(n) * n;
  if (dir.norm() < 1e-14) throw std::runtime_error("trace_geodesic: direction normal to face");
  dir.normalize();
  double remaining = length;

  const int max_steps = 64 + static_cast<int>(12.0 * length / g.mean_edge);
  for (int step = 0; step < max_steps; ++step) {
    // exit parameter against each edge line of face f
    const Vector3d p0 = g.vpos(g.F(f, 0)), p1 = g.vpos(g.F(f, 1)), p2 = g.vpos(g.F(f, 2));
    const Vector3d pts[3] = {p0, p1, p2};
    double best_t = std::numeric_limits<double>::max();
    int best_c = -1;
    for (int c = 0; c < 3; ++c) {
      const Vector3d a = pts[c], b = pts[(c + 1) % 3];
      // in-plane outward normal of edge (a,b)
      Vector3d en = (b - a).cross(n);
      const double denom = dir.dot(en);
      if (denom <= 1e-15) continue;  // moving parallel or inward
      double t = (a - x).dot(en) / denom;
      if (t < -1e-12) continue;
      t = std::max(t, 0.0);
      if (t < best_t) {
        best_t = t;
        best_c = c;
      }
    }
    if (best_t >= remaining || best_c == -1) {
      x += remaining * dir;
      out.end.face = f;
      out.end.bary = detail::face_bary(g, f, x);
      // clamp tiny negatives from roundoff
      for (int k = 0; k < 3; ++k) out.end.bary[k] = std::max(out.end.bary[k], 0.0);
      out.end.bary /= out.end.bary.sum();
      out.direction = dir;
      return out;
    }
    // cross into the neighbor face
    x += best_t * dir;
    remaining -= best_t;
    const int e = g.FE(f, best_c);
    const int fn = g.EF(e, 0) == f ? g.EF(e, 1) : g.EF(e, 0);
    const Vector3d n2 = g.face_normal.row(fn).transpose();
    // rotate about the shared edge so that n -> n2
    const Vector3d axis0 = n.cross(n2);
    const double s = axis0.norm(), cth = std::clamp(n.dot(n2), -1.0, 1.0);
    if (s > 1e-15) {
      const Eigen::AngleAxisd rot(std::atan2(s, cth), axis0 / s);
      dir = rot * dir;
      for (auto& w : out.transported) w = rot * w;
    }
    // guard against drifting off the new face plane
    dir -= dir.dot(n2) * n2;
    dir.normalize();
    for (auto& w : out.transported) w -= w.dot(n2) * n2;
    f = fn;
    n = n2;
    // nudge off the edge to avoid re-hitting it
    x += 1e-12 * g.mean_edge * dir;
  }
  throw std::runtime_error("trace_geodesic: step limit exceeded");
}

// exp map: start point, tangent vector (world coordinates, length = step)
inline SurfacePoint exp_map(const SurfaceGeometry& g, const SurfacePoint& p,
                            const Vector3d& v) {
  const double len = v.norm();
  if (len < 1e-300) return p;
  return trace_geodesic(g, p, v / len, len).end;
}

// Log map: tangent vector at p, in the plane of p.face, pointing toward q
// (the convention shared by exp_map, trace_geodesic and face_basis). Near p
// it is the exact piecewise-linear inverse of exp_map: faces around p are
// unfolded into the plane of p.face by hinge rotations and the straight
// unfolded chord is returned. Far away it falls back to the exact
// great-circle tangent on the round sphere, or to the projected chord scaled
// to the geodesic distance on general meshes.
inline Vector3d log_map(const SurfaceGeometry& g, const SurfacePoint& p,
                        const SurfacePoint& q) {
  const Vector3d xp = g.point_world(p), xq = g.point_world(q);
  const Vector3d nb = g.face_normal.row(p.face).transpose();
  if (q.face == p.face) {
    const Vector3d w = xq - xp;
    return w - w.dot(nb) * nb;
  }

  // breadth-first hinge unfolding; rot/off map world points of each reached
  // face into the plane of p.face
  constexpr int max_unfold = 96;
  std::vector<int> faces{p.face};
  std::vector<Matrix3d> rot{Matrix3d::Identity()};
  std::vector<Vector3d> off{Vector3d::Zero()};
  std::unordered_map<int, int> reached{{p.face, 0}};
  for (std::size_t head = 0; head < faces.size() && faces.size() < max_unfold;
       ++head) {
    const int f = faces[head];
    const Matrix3d rf = rot[head];
    const Vector3d tf = off[head];
    for (int c = 0; c < 3; ++c) {
      const int e = g.FE(f, c);
      const int fn = g.EF(e, 0) == f ? g.EF(e, 1) : g.EF(e, 0);
      if (reached.count(fn)) continue;
      const Vector3d a = rf * g.vpos(g.E(e, 0)) + tf;
      const Vector3d b = rf * g.vpos(g.E(e, 1)) + tf;
      Vector3d u = b - a;
      const double un = u.norm();
      if (un < 1e-300) continue;
      u /= un;
      // hinge angle flattening fn's (partially unfolded) plane onto the base
      const Vector3d m = rf * g.face_normal.row(fn).transpose();
      const double th = std::atan2(m.cross(nb).dot(u), m.dot(nb));
      const Matrix3d Q = Eigen::AngleAxisd(th, u).toRotationMatrix();
      reached.emplace(fn, static_cast<int>(faces.size()));
      faces.push_back(fn);
      rot.push_back(Q * rf);
      off.push_back(Q * (tf - a) + a);
      if (fn == q.face) {
        const Vector3d w = rot.back() * xq + off.back() - xp;
        return w - w.dot(nb) * nb;
      }
    }
  }

  if (g.kind == SurfaceKind::Sphere) {
    const double R = g.params.radius;
    const Vector3d ar = xp.normalized(), br = xq.normalized();
    const double ang = std::acos(std::clamp(ar.dot(br), -1.0, 1.0));
    Vector3d t = br - ar.dot(br) * ar;
    if (t.norm() < 1e-14) return Vector3d::Zero();
    t.normalize();
    // rotate the smooth tangent plane onto the plane of p.face
    const Vector3d ax = ar.cross(nb);
    const double s = ax.norm(), cth = std::clamp(ar.dot(nb), -1.0, 1.0);
    if (s > 1e-15) t = Eigen::AngleAxisd(std::atan2(s, cth), ax / s) * t;
    t -= t.dot(nb) * nb;
    const double tn = t.norm();
    if (tn < 1e-14) return Vector3d::Zero();
    return (R * ang) * (t / tn);
  }
  Vector3d w = xq - xp;
  w -= w.dot(nb) * nb;
  const double wn = w.norm();
  if (wn < 1e-14) return Vector3d::Zero();
  return geodesic_distance(g, p, q) * (w / wn);
}

}  // namespace glv

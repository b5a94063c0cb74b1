#include <catch2/catch_amalgamated.hpp>

#include <glvortex/geodesic.hpp>

using namespace glv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("sphere distances are exact great-circle arcs") {
  const auto g = icosphere(1.0, 3);
  // vertex 0 of the icosahedron survives subdivision; antipode is a vertex too
  const SurfacePoint p = g.vertex_point(0);
  const auto d = distance_field(g, p);
  int far = 0;
  d.maxCoeff(&far);
  CHECK_THAT(d[far], WithinRel(pi, 1e-9));
  CHECK_THAT(d[0], WithinAbs(0.0, 1e-12));
}

TEST_CASE("mesh distance field approximates sphere distances") {
  // build the icosphere but treat it as a plain mesh
  const auto ga = icosphere(1.0, 4);
  const auto g = build_surface(ga.V, ga.F, SurfaceKind::Mesh);
  const SurfacePoint p = g.vertex_point(0);
  const auto d = distance_field(g, p);
  const Vector3d s = g.vpos(0).normalized();
  double worst = 0;
  for (int v = 0; v < g.nv(); ++v) {
    const double exact = std::acos(std::clamp(s.dot(g.vpos(v).normalized()), -1.0, 1.0));
    if (exact > 0.3) worst = std::max(worst, std::abs(d[v] - exact) / exact);
  }
  CHECK(worst < 0.02);
}

TEST_CASE("torus distance field is nearly symmetric") {
  const auto g = torus_grid(2.0, 0.5, 32, 16);
  const SurfacePoint p = g.vertex_point(3), q = g.vertex_point(200);
  const double dpq = distance_at(g, distance_field(g, p), q);
  const double dqp = distance_at(g, distance_field(g, q), p);
  CHECK_THAT(dpq, WithinRel(dqp, 0.02));
}

TEST_CASE("geodesic trace stays on the surface and preserves carried frames") {
  const auto g = icosphere(2.0, 4);
  const SurfacePoint p = g.vertex_point(11);
  Vector3d t1, t2;
  g.face_basis(p.face, t1, t2);
  const double len = 20.0 * g.mean_edge;
  const auto tr = trace_geodesic(g, p, t1, len, {t1, t2});
  const Vector3d x = g.point_world(tr.end);
  CHECK_THAT(x.norm(), WithinRel(2.0, 2e-3));
  // transported vectors stay orthonormal and tangent
  const Vector3d n = g.face_normal.row(tr.end.face).transpose();
  CHECK_THAT(tr.transported[0].norm(), WithinAbs(1.0, 1e-10));
  CHECK_THAT(tr.transported[1].norm(), WithinAbs(1.0, 1e-10));
  CHECK_THAT(tr.transported[0].dot(tr.transported[1]), WithinAbs(0.0, 1e-10));
  CHECK_THAT(tr.transported[0].dot(n), WithinAbs(0.0, 1e-6));
  // trace length equals geodesic distance along the sphere
  const double exact = 2.0 * std::acos(std::clamp(
                                g.point_world(p).normalized().dot(x.normalized()), -1.0, 1.0));
  CHECK_THAT(exact, WithinRel(len, 5e-3));
}

TEST_CASE("exp/log round trip at step scale") {
  for (const auto& g : {icosphere(1.0, 3), torus_grid(2.0, 0.5, 32, 16)}) {
    const SurfacePoint p = g.vertex_point(7);
    Vector3d t1, t2;
    g.face_basis(p.face, t1, t2);
    const Vector3d v = 0.1 * g.mean_edge * (0.6 * t1 + 0.8 * t2);
    const SurfacePoint q = exp_map(g, p, v);
    const Vector3d w = log_map(g, p, q);
    CHECK((w - v).norm() / v.norm() < 1e-6);
  }
}

TEST_CASE("far-field log map on the sphere has the exact arc length") {
  const auto g = icosphere(1.0, 3);
  const SurfacePoint p = g.vertex_point(0);
  const Vector3d target =
      Eigen::AngleAxisd(2.2, Vector3d(0.3, 0.5, 0.81).normalized()) * g.vpos(0);
  int qi = 0;
  for (int v = 1; v < g.nv(); ++v)
    if ((g.vpos(v) - target).norm() < (g.vpos(qi) - target).norm()) qi = v;
  const SurfacePoint q = g.vertex_point(qi);
  REQUIRE(geodesic_distance(g, p, q) > 1.0);  // beyond the unfolding radius
  const Vector3d v = log_map(g, p, q);
  CHECK_THAT(v.norm(), WithinRel(geodesic_distance(g, p, q), 1e-12));
  const Vector3d nf = g.face_normal.row(p.face).transpose();
  CHECK_THAT(v.dot(nf), WithinAbs(0.0, 1e-12));
}

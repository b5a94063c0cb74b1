#include <catch2/catch_amalgamated.hpp>

#include <glvortex/surface.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>

using namespace glv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("icosphere counts and topology") {
  const auto g = icosphere(1.0, 3);
  CHECK(g.nv() == 642);
  CHECK(g.nf() == 1280);
  CHECK(g.ne() == 1920);
  CHECK(g.chi == 2);
  CHECK(g.genus == 0);
  // inscribed polyhedron area converges to 4 pi from below
  const double gap3 = 4.0 * pi - g.total_area;
  const double gap4 = 4.0 * pi - icosphere(1.0, 4).total_area;
  CHECK(gap3 > 0);
  CHECK(gap4 < 0.3 * gap3);
  CHECK_THAT(g.vertex_area.sum(), WithinRel(g.total_area, 1e-12));
}

TEST_CASE("torus grid counts and topology") {
  const auto g = torus_grid(2.0, 0.5, 64, 32);
  CHECK(g.nv() == 2048);
  CHECK(g.nf() == 4096);
  CHECK(g.chi == 0);
  CHECK(g.genus == 1);
}

TEST_CASE("genus-2 surface topology") {
  const auto g = genus2_surface();
  CHECK(g.chi == -2);
  CHECK(g.genus == 2);
  // no degenerate triangles anywhere near the surgery seam
  CHECK(g.face_area.minCoeff() > 1e-5);
  CHECK(g.corner_angle.minCoeff() > 0.05);
}

TEST_CASE("angle defects sum to 2 pi chi") {
  for (const auto& g : {icosphere(1.0, 2), torus_grid(2.0, 0.5, 24, 12), genus2_surface(2.0, 0.5, 24, 12)}) {
    CHECK_THAT(g.angle_defect.sum(), WithinAbs(2.0 * pi * g.chi, 1e-11));
    CHECK_THAT(g.holonomy.sum(), WithinAbs(2.0 * pi * g.chi, 1e-11));
  }
}

TEST_CASE("face holonomy equals the product of edge transports") {
  const auto g = icosphere(1.0, 2);
  double worst = 0;
  for (int f = 0; f < g.nf(); ++f) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += g.FS(f, c) * g.transport[g.FE(f, c)];
    worst = std::max(worst, std::abs(fold_angle(s - g.holonomy[f])));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("tangent frames are orthonormal") {
  const auto g = ellipsoid(1.0, 1.0, 1.5, 2);
  for (int v = 0; v < g.nv(); ++v) {
    const Vector3d e1 = g.frame_e1.row(v), e2 = g.frame_e2.row(v),
                   n = g.vertex_normal.row(v);
    CHECK_THAT(e1.norm(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(e2.norm(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(e1.dot(e2), WithinAbs(0.0, 1e-12));
    CHECK_THAT(e1.dot(n), WithinAbs(0.0, 1e-12));
    CHECK_THAT(e2.dot(n), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("analytic sphere shape operator is umbilic -1/R") {
  const double R = 2.0;
  const auto g = icosphere(R, 2);
  for (int v = 0; v < g.nv(); v += 7) {
    const Matrix2d s = g.shape_at(v);
    CHECK_THAT(s(0, 0), WithinAbs(-1.0 / R, 1e-12));
    CHECK_THAT(s(1, 1), WithinAbs(-1.0 / R, 1e-12));
    CHECK_THAT(s(0, 1), WithinAbs(0.0, 1e-12));
    // |S u| = |u| / R for any tangent u
    const Vector2d u(0.3, -0.8);
    CHECK_THAT((s * u).norm(), WithinRel(u.norm() / R, 1e-12));
  }
}

TEST_CASE("analytic torus principal curvatures at the outer equator") {
  const auto g = torus_grid(2.0, 0.5, 64, 32);
  // vertex 0 sits at (R+r, 0, 0)
  REQUIRE_THAT(g.vpos(0)[0], WithinRel(2.5, 1e-12));
  const Eigen::SelfAdjointEigenSolver<Matrix2d> es(g.shape_at(0));
  const double k1 = std::abs(es.eigenvalues()[0]), k2 = std::abs(es.eigenvalues()[1]);
  CHECK_THAT(std::max(k1, k2), WithinRel(1.0 / 0.5, 1e-10));
  CHECK_THAT(std::min(k1, k2), WithinRel(1.0 / 2.5, 1e-10));
  // Gauss curvature = det S > 0 outside, < 0 inside
  CHECK(g.shape_at(0).determinant() > 0);
  const int inner = 32 / 2;  // vertex (u=0, v=pi)
  CHECK(g.shape_at(inner).determinant() < 0);
}

namespace {
double shape_estimate_error(int refine) {
  // build the mesh analytically, then re-estimate the shape operator as if it
  // were a raw mesh and compare against the analytic one
  const auto ga = ellipsoid(1.0, 1.0, 1.5, refine);
  auto gm = build_surface(ga.V, ga.F, SurfaceKind::Mesh);
  double num = 0, den = 0;
  for (int v = 0; v < ga.nv(); ++v) {
    // frames differ between builds only through the normals; compare invariants
    const Eigen::SelfAdjointEigenSolver<glv::Matrix2d> ea(ga.shape_at(v)), em(gm.shape_at(v));
    num += ga.vertex_area[v] * (ea.eigenvalues() - em.eigenvalues()).squaredNorm();
    den += ga.vertex_area[v] * ea.eigenvalues().squaredNorm();
  }
  return std::sqrt(num / den);
}
}  // namespace

TEST_CASE("estimated shape operator converges to the analytic one") {
  const double e2 = shape_estimate_error(2);
  const double e3 = shape_estimate_error(3);
  const double e4 = shape_estimate_error(4);
  CHECK(e3 < 0.75 * e2);
  CHECK(e4 < 0.75 * e3);
  CHECK(e4 < 0.05);
}

TEST_CASE("validation reports offending simplices") {
  MatrixXd V(4, 3);
  V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  {
    MatrixXi F(4, 3);
    F << 0, 2, 1, 0, 1, 3, 1, 2, 3, 2, 0, 3;
    CHECK_NOTHROW(build_surface(V, F));  // closed tet is fine
  }
  {
    // icosahedron with one face removed
    const auto ico = icosphere(1.0, 0);
    MatrixXi F = ico.F.topRows(ico.nf() - 1);
    CHECK_THROWS_WITH(build_surface(ico.V, F),
                      Catch::Matchers::ContainsSubstring("boundary edge"));
  }
  {
    MatrixXi F(4, 3);
    F << 0, 2, 1, 0, 3, 1, 1, 2, 3, 2, 0, 3;  // second face flipped
    CHECK_THROWS_WITH(build_surface(V, F),
                      Catch::Matchers::ContainsSubstring("inconsistent orientation"));
  }
  {
    // two tets sharing a face -> non-manifold edges
    MatrixXd V2(5, 3);
    V2 << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1;
    MatrixXi F2(6, 3);
    F2 << 0, 2, 1, 0, 1, 3, 1, 2, 3, 2, 0, 3, 0, 1, 4, 1, 2, 4;
    CHECK_THROWS_WITH(build_surface(V2, F2), Catch::Matchers::ContainsSubstring("non-manifold"));
  }
}

TEST_CASE("mesh file IO") {
  const auto g = icosphere(1.0, 1);
  const std::string off_path = "test_io_sphere.off";
  {
    std::ofstream out(off_path);
    out << std::setprecision(17);
    out << "OFF\n" << g.nv() << " " << g.nf() << " 0\n";
    for (int v = 0; v < g.nv(); ++v)
      out << g.V(v, 0) << " " << g.V(v, 1) << " " << g.V(v, 2) << "\n";
    for (int f = 0; f < g.nf(); ++f)
      out << "3 " << g.F(f, 0) << " " << g.F(f, 1) << " " << g.F(f, 2) << "\n";
  }
  const auto g2 = load_mesh(off_path);
  CHECK(g2.nv() == g.nv());
  CHECK(g2.chi == 2);
  CHECK_THAT(g2.total_area, WithinRel(g.total_area, 1e-12));
  std::remove(off_path.c_str());

  const std::string obj_path = "test_io_sphere.obj";
  {
    std::ofstream out(obj_path);
    for (int v = 0; v < g.nv(); ++v)
      out << "v " << g.V(v, 0) << " " << g.V(v, 1) << " " << g.V(v, 2) << "\n";
    for (int f = 0; f < g.nf(); ++f)
      out << "f " << g.F(f, 0) + 1 << " " << g.F(f, 1) + 1 << " " << g.F(f, 2) + 1 << "\n";
  }
  const auto g3 = load_mesh(obj_path);
  CHECK(g3.nv() == g.nv());
  CHECK(g3.chi == 2);
  std::remove(obj_path.c_str());
}

TEST_CASE("surface point snapping") {
  const auto g = icosphere(1.0, 2);
  const Vector3d x = 1.02 * Vector3d(0.3, -0.5, 0.8).normalized();
  const SurfacePoint p = snap_to_surface(g, x);
  REQUIRE(p.face >= 0);
  CHECK_THAT(p.bary.sum(), WithinAbs(1.0, 1e-12));
  CHECK((g.point_world(p) - x).norm() < 0.05);
  // vertex point round trip
  const SurfacePoint vp = g.vertex_point(17);
  CHECK((g.point_world(vp) - g.vpos(17)).norm() < 1e-14);
}

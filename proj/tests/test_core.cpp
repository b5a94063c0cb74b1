#include <glvortex/core_profile.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace glv;
using Catch::Matchers::WithinAbs;

namespace {
const CoreProfile& profile() {
  static const CoreProfile p = solve_core_profile();
  return p;
}
}  // namespace

TEST_CASE("vortex profile is monotone between 0 and 1") {
  const auto& p = profile();
  CHECK(p.f[0] == 0.0);
  for (int i = 0; i + 1 < p.f.size(); ++i) {
    CHECK(p.f[i + 1] >= p.f[i] - 1e-12);
    CHECK(p.f[i] >= 0.0);
    CHECK(p.f[i] <= 1.0 + 1e-12);
  }
}

TEST_CASE("initial slope matches the known profile constant") {
  const auto& p = profile();
  // f'(0) = 0.58318949... for the degree-one radial profile
  CHECK_THAT(p.slope, WithinAbs(0.5831894958, 5e-4));
  CHECK_THAT(p.slope_shooting, WithinAbs(p.slope, 1e-4));
}

TEST_CASE("profile matches the far-field series away from the core") {
  const auto& p = profile();
  for (double r : {30.0, 40.0, 60.0})
    CHECK_THAT(p.f_at(r), WithinAbs(core_profile_tail(r), 1e-6));
}

TEST_CASE("core energy extrapolation is converged") {
  const auto& p = profile();
  REQUIRE(p.gamma_at.size() == 3);
  // raw values carry the known pi/(4R^2) tail; the extrapolated estimates at
  // R = 40 and R = 80 must agree
  const double g40 = p.gamma_at[1].second, g80 = p.gamma_at[2].second;
  CHECK_THAT(g40 - g80, WithinAbs(0.25 * pi * (1.0 / 1600 - 1.0 / 6400), 2e-5));
  CHECK(p.gamma_err < 1e-4);
  CHECK(p.gamma > 0.0);
  CHECK(std::abs(p.gamma - g80) < 5e-4);
}

TEST_CASE("interpolated profile is continuous at the grid boundary") {
  const auto& p = profile();
  const double rmax = p.r[p.r.size() - 1];
  CHECK_THAT(p.f_at(rmax - 1e-9), WithinAbs(p.f_at(rmax + 1e-9), 1e-6));
}

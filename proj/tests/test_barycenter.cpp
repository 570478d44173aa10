#include <doctest.h>

#include <cmath>
#include <numbers>

#include "core/barycenter.hpp"
#include "core/flow.hpp"

using namespace wlm;

namespace {
constexpr double pi = std::numbers::pi;

Surface ellipsoid_surface(const Vec3& center, double a, double b, double c, int L, const SphericalGrid& grid) {
  std::vector<double> rho(grid.n_nodes());
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const double th = grid.node_theta(k), ph = grid.node_phi(k);
    const double sx = std::sin(th) * std::cos(ph), sy = std::sin(th) * std::sin(ph), sz = std::cos(th);
    rho[k] = 1.0 / std::sqrt(sx * sx / (a * a) + sy * sy / (b * b) + sz * sz / (c * c));
  }
  Surface s;
  s.center = center;
  s.L = L;
  grid.analysis(rho, s.coeffs);
  return s;
}

// brute-force lattice minimizer of w(p) = int |p-x|^2 dmu in the flat chart
Vec3 brute_force_center(const GeometryFields& F, const SphericalGrid& grid, Vec3 guess, double half_width) {
  Vec3 best = guess;
  for (int level = 0; level < 3; ++level) {
    double best_w = std::numeric_limits<double>::infinity();
    Vec3 best_p = best;
    const int n = 10;
    for (int i = -n; i <= n; ++i)
      for (int j = -n; j <= n; ++j)
        for (int l = -n; l <= n; ++l) {
          const Vec3 p = best + half_width * Vec3(i, j, l) / n;
          double w = 0.0;
          for (int k = 0; k < F.n_nodes(); ++k)
            w += grid.quad_weight(k) * F.dmu[k] * (p - F.y[k]).squaredNorm();
          if (w < best_w) {
            best_w = w;
            best_p = p;
          }
        }
    best = best_p;
    half_width /= n;  // refine around the winner
  }
  return best;
}
}  // namespace

TEST_CASE("flat round sphere: center is the sphere center, moments vanish") {
  FlatChart chart(2.0);
  SphericalGrid grid(16, 32, 10);
  const Vec3 c(0.2, -0.1, 0.15);
  const Surface s = Surface::round_sphere(c, 0.3, 10);
  CenteredGeometry cg;
  const CenterReport rep = geometric_center(chart, s, grid, CenterParams{}, GeodesicSolverParams::for_chart(chart), &cg);
  CHECK((rep.p0 - c).norm() <= 1e-10);
  CHECK(rep.moment_g.norm() <= 1e-10);
  CHECK(rep.moment_e.norm() <= 1e-10);
  CHECK(rep.dist_band <= 1e-10);
  CHECK(rep.hessian_positive);
  for (double m : odd_moments(cg, grid, 0)) CHECK(m <= 1e-10);
  for (double m : odd_moments(cg, grid, 1)) CHECK(m <= 1e-10);
}

TEST_CASE("flat translated ellipsoid: center matches the brute-force lattice minimizer") {
  FlatChart chart(3.0);
  SphericalGrid grid(24, 48, 12);
  const Vec3 c(0.3, 0.1, -0.2);
  const Surface s = ellipsoid_surface(c, 0.4, 0.35, 0.5, 12, grid);
  const GeometryFields F = geometry(chart, s, grid);

  const CenterReport rep = geometric_center(chart, s, grid, CenterParams{}, GeodesicSolverParams::for_chart(chart));
  const Vec3 oracle = brute_force_center(F, grid, c, 0.1);
  CHECK((rep.p0 - oracle).norm() <= 1e-6);

  // in the flat chart the minimizer is the measure centroid
  Vec3 centroid = Vec3::Zero();
  for (int k = 0; k < F.n_nodes(); ++k) centroid += grid.quad_weight(k) * F.dmu[k] * F.y[k];
  centroid /= F.area;
  CHECK((rep.p0 - centroid).norm() <= 1e-10);

  // first-order optimality bound on the recentered chart moment
  CHECK(rep.moment_g.norm() <= 10.0 * CenterParams{}.grad_tol * F.area);
}

TEST_CASE("space form geodesic sphere: center recovers the base point by symmetry") {
  SpaceFormChart chart(1.0, 1.5);
  SphericalGrid grid(16, 32, 10);
  GeodesicSolverParams geo = GeodesicSolverParams::for_chart(chart);
  const Vec3 q(0.15, -0.1, 0.2);
  const Surface s = geodesic_sphere(chart, q, 0.2, grid, geo, nullptr);
  const CenterReport rep = geometric_center(chart, s, grid, CenterParams{}, geo);
  CHECK((rep.p0 - q).norm() <= 1e-8);
  // distances are exactly r while the area radius is sin(r): the band is r - sin(r)
  CHECK(rep.dist_band == doctest::Approx(0.2 - std::sin(0.2)).epsilon(1e-4));
}

TEST_CASE("translation equivariance of the center in the flat chart") {
  FlatChart chart(3.0);
  SphericalGrid grid(16, 32, 8);
  const Vec3 t(0.4, -0.2, 0.3);
  Surface s = ellipsoid_surface(Vec3(0.1, 0.0, -0.1), 0.3, 0.32, 0.4, 8, grid);
  Surface st = s;
  st.center += t;
  const CenterReport a = geometric_center(chart, s, grid, CenterParams{}, GeodesicSolverParams::for_chart(chart));
  const CenterReport b = geometric_center(chart, st, grid, CenterParams{}, GeodesicSolverParams::for_chart(chart));
  CHECK((b.p0 - (a.p0 + t)).norm() <= 1e-8);
}

TEST_CASE("degree-1 moment detects a decentered sphere") {
  // flat chart: normal coordinates at the origin are the identity, so the
  // centered geometry of a sphere offset by d has moment int z^1/R dmu = area d / R
  FlatChart chart(2.0);
  SphericalGrid grid(16, 32, 10);
  const double R = 0.3, d = 0.12;
  const Surface s = Surface::round_sphere(Vec3(d, 0.0, 0.0), R, 10);
  const GeometryFields F = geometry(chart, s, grid);
  CenteredGeometry cg;
  cg.p0 = Vec3::Zero();
  cg.area = F.area;
  cg.area_radius = F.area_radius;
  cg.z = F.y;
  cg.dmu_g = F.dmu;
  cg.dmu_e = F.dmu;
  cg.nu_e = F.nu;
  const auto deg1 = odd_moments(cg, grid, 0);
  // factor ordering: nu components then z components / R
  CHECK(std::abs(deg1[3] - F.area * d / F.area_radius) <= 1e-8);
  CHECK(deg1[4] <= 1e-10);
  CHECK(deg1[0] <= 1e-10);  // int nu_e dmu_E = 0 on a closed surface
}

TEST_CASE("recentered surface refit reproduces a centered sphere") {
  FlatChart chart(2.0);
  SphericalGrid grid(16, 32, 10);
  const Surface s = Surface::round_sphere(Vec3(0.1, 0.05, -0.2), 0.25, 10);
  CenteredGeometry cg;
  geometric_center(chart, s, grid, CenterParams{}, GeodesicSolverParams::for_chart(chart), &cg);
  double rms = 1.0;
  const Surface rs = recentered_surface(cg, grid, &rms);
  CHECK(rms <= 1e-9);
  CHECK(rs.center.norm() == 0.0);
  CHECK(rs.coeffs[0] == doctest::Approx(0.25 * std::sqrt(4 * pi)).epsilon(1e-9));
}

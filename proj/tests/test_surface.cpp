#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "core/functionals.hpp"
#include "core/surface.hpp"

using namespace wlm;

namespace {
constexpr double pi = std::numbers::pi;

Surface ellipsoid_surface(double a, double b, double c, int L, const SphericalGrid& grid) {
  std::vector<double> rho(grid.n_nodes());
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const double th = grid.node_theta(k), ph = grid.node_phi(k);
    const double sx = std::sin(th) * std::cos(ph), sy = std::sin(th) * std::sin(ph), sz = std::cos(th);
    rho[k] = 1.0 / std::sqrt(sx * sx / (a * a) + sy * sy / (b * b) + sz * sz / (c * c));
  }
  Surface s;
  s.center = Vec3::Zero();
  s.L = L;
  grid.analysis(rho, s.coeffs);
  return s;
}

double ellipsoid_mean_curvature(double a, double b, double c, const Vec3& x) {
  // level set F = x^2/a^2 + y^2/b^2 + z^2/c^2, outward normal
  const Vec3 gradF(2 * x[0] / (a * a), 2 * x[1] / (b * b), 2 * x[2] / (c * c));
  const Mat3 hessF = Vec3(2 / (a * a), 2 / (b * b), 2 / (c * c)).asDiagonal();
  const Vec3 n = gradF.normalized();
  return (hessF.trace() - n.dot(hessF * n)) / gradF.norm();
}
}  // namespace

TEST_CASE("flat round sphere geometry is exact") {
  FlatChart chart(2.0);
  SphericalGrid grid(16, 32, 10);
  const double r = 0.7;
  const Surface s = Surface::round_sphere(Vec3(0.1, -0.05, 0.2), r, 10);
  const GeometryFields F = geometry(chart, s, grid);

  CHECK(std::abs(F.area - 4 * pi * r * r) <= 1e-10 * 4 * pi * r * r);
  for (int k = 0; k < F.n_nodes(); ++k) {
    CHECK(std::abs(F.H[k] - 2.0 / r) <= 1e-10 * (2.0 / r));
    CHECK(std::sqrt(F.tensor_norm2(k, F.Aring[k])) <= 1e-10);
    // normal bookkeeping
    CHECK(std::abs(F.nu[k].dot(F.g[k] * F.nu[k]) - 1.0) <= 1e-12);
    CHECK(std::abs(F.nu[k].dot(F.g[k] * F.e1[k])) <= 1e-12 * F.e1[k].norm());
    CHECK(std::abs(F.nu[k].dot(F.g[k] * F.e2[k])) <= 1e-12 * std::max(1.0, F.e2[k].norm()));
    CHECK(F.align[k] > 0.0);
    // H bookkeeping: gamma^{ij} A_ij recomputed from stored fields
    CHECK(std::abs((F.gamma_inv[k] * F.A[k]).trace() - F.H[k]) <= 1e-12 * std::abs(F.H[k]));
    // trace-free parts
    CHECK(std::abs((F.gamma_inv[k] * F.Aring[k]).trace()) <= 1e-12);
    CHECK(std::abs((F.gamma_inv[k] * F.Tring[k]).trace()) <= 1e-12);
  }
}

TEST_CASE("flat ellipsoid mean curvature matches the closed form") {
  FlatChart chart(3.0);
  SphericalGrid grid(32, 64, 24);
  const double a = 1.0, b = 1.0, c = 1.3;
  const Surface s = ellipsoid_surface(a, b, c, 24, grid);
  const GeometryFields F = geometry(chart, s, grid);
  double max_rel = 0.0;
  for (int k = 0; k < F.n_nodes(); k += 7) {
    const double exact = ellipsoid_mean_curvature(a, b, c, F.y[k]);
    max_rel = std::max(max_rel, std::abs(F.H[k] - exact) / std::abs(exact));
  }
  CHECK(max_rel <= 1e-6);
}

TEST_CASE("space form geodesic sphere is umbilic with H = 2 cot r") {
  SpaceFormChart chart(1.0, 1.5);
  SphericalGrid grid(24, 48, 16);
  const double r = 0.2;
  const Surface s = Surface::round_sphere(Vec3::Zero(), r, 16);
  const GeometryFields F = geometry(chart, s, grid);
  CHECK(std::abs(F.area - 4 * pi * std::sin(r) * std::sin(r)) <= 1e-7);
  const double Hexact = 2.0 / std::tan(r);
  for (int k = 0; k < F.n_nodes(); k += 5) {
    CHECK(std::abs(F.H[k] - Hexact) <= 1e-6);
    CHECK(std::sqrt(F.tensor_norm2(k, F.Aring[k])) <= 1e-8);
  }
}

TEST_CASE("integrate: odd function on a symmetric sphere vanishes") {
  FlatChart chart(2.0);
  SphericalGrid grid(16, 32, 10);
  const Surface s = Surface::round_sphere(Vec3::Zero(), 1.0, 10);
  const GeometryFields F = geometry(chart, s, grid);
  std::vector<double> f(F.n_nodes());
  for (int k = 0; k < F.n_nodes(); ++k) f[k] = F.dir[k][2];  // odd in z
  CHECK(std::abs(integrate(F, grid, f)) <= 1e-10);
}

TEST_CASE("degenerate surfaces are rejected with the node named") {
  FlatChart chart(2.0);
  SphericalGrid grid(16, 32, 10);
  Surface s = Surface::round_sphere(Vec3::Zero(), 0.1, 10);
  s.coeffs[2] = 1.2;  // huge Y_{1,0} component drives rho negative
  CHECK_THROWS_WITH_AS(geometry(chart, s, grid), doctest::Contains("node"), Error);
}

TEST_CASE("surface JSON round trip is bit exact") {
  std::mt19937 rng(57);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Surface s;
  s.center = Vec3(0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng));
  s.L = 8;
  s.coeffs.resize(81);
  for (double& c : s.coeffs) c = u(rng) * std::pow(10.0, -6.0 * std::abs(u(rng)));
  s.coeffs[0] = 2.0 + u(rng);
  const Surface t = Surface::from_json(s.to_json());
  CHECK(t.L == s.L);
  for (int a = 0; a < 3; ++a) CHECK(t.center[a] == s.center[a]);
  for (size_t i = 0; i < s.coeffs.size(); ++i) CHECK(t.coeffs[i] == s.coeffs[i]);

  CHECK_THROWS_AS(Surface::from_json("{\"center\":[0,0,0],\"L\":2}"), Error);
  CHECK_THROWS_AS(Surface::from_json("{\"center\":[0,0,0],\"L\":1,\"coeffs\":[1],\"extra\":0}"), Error);
  CHECK_THROWS_AS(Surface::from_json("not json"), Error);
}

TEST_CASE("scattered radial fit recovers a bandlimited surface") {
  SphericalGrid grid(24, 48, 12);
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Surface s = Surface::round_sphere(Vec3::Zero(), 1.0, 12);
  for (int n = 1; n < grid.n_coeff(); ++n) s.coeffs[n] = 0.01 * u(rng);

  std::vector<Vec3> dirs;
  std::vector<double> radii, weights;
  for (int t = 0; t < 1500; ++t) {
    Vec3 d(u(rng), u(rng), u(rng));
    while (d.norm() < 0.2) d = Vec3(u(rng), u(rng), u(rng));
    d.normalize();
    const double th = std::acos(std::clamp(d[2], -1.0, 1.0));
    const double ph = std::atan2(d[1], d[0]);
    dirs.push_back(d);
    radii.push_back(s.radius_at(th, ph));
    weights.push_back(1.0);
  }
  double rms = 0.0;
  const Surface fit = fit_scattered_radial(Vec3::Zero(), 12, dirs, radii, weights, &rms);
  CHECK(rms <= 1e-10);
  for (int n = 0; n < grid.n_coeff(); ++n) CHECK(std::abs(fit.coeffs[n] - s.coeffs[n]) <= 1e-8);
}

TEST_CASE("rotation equivariance of the scalar functionals") {
  // conjugating (c, rho) by a rotation leaves area, W, U, V, |Aring|_L2 unchanged
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SphericalGrid grid(32, 64, 16);

  Eigen::AngleAxisd rot1(0.83, Vec3(1.0, 2.0, -0.5).normalized());
  Eigen::AngleAxisd rot2(-1.91, Vec3(0.2, -1.0, 0.7).normalized());
  const Mat3 Q = (rot1 * rot2).toRotationMatrix();

  for (int which = 0; which < 2; ++which) {
    std::shared_ptr<Chart> chart;
    if (which == 0)
      chart = std::make_shared<FlatChart>(3.0);
    else
      chart = std::make_shared<SpaceFormChart>(0.8, 1.5);
    const double r0 = which == 0 ? 1.0 : 0.25;

    // smooth low-degree perturbation, fully resolved on the grid
    Surface s = Surface::round_sphere(Vec3::Zero(), r0, 16);
    for (int l = 2; l <= 4; ++l)
      for (int m = -l; m <= l; ++m) s.coeffs[l * l + l + m] = 0.02 * r0 * u(rng);
    if (which == 0) s.center = Vec3(0.2, -0.1, 0.15);

    // rotated surface: evaluate rho at Q^T omega on the grid nodes, re-analyze
    Surface sq;
    sq.center = Q * s.center;
    sq.L = s.L;
    sq.coeffs.resize(grid.n_coeff());
    std::vector<double> rho(grid.n_nodes());
    for (int k = 0; k < grid.n_nodes(); ++k) {
      const double th = grid.node_theta(k), ph = grid.node_phi(k);
      const Vec3 om(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      const Vec3 om_src = Q.transpose() * om;
      const double th2 = std::acos(std::clamp(om_src[2], -1.0, 1.0));
      const double ph2 = std::atan2(om_src[1], om_src[0]);
      rho[k] = s.radius_at(th2, ph2);
    }
    grid.analysis(rho, sq.coeffs);

    const FunctionalReport r1 = evaluate_functionals(*chart, s, grid);
    const FunctionalReport r2 = evaluate_functionals(*chart, sq, grid);
    CHECK(std::abs(r1.area - r2.area) <= 1e-10 * r1.area);
    CHECK(std::abs(r1.willmore - r2.willmore) <= 1e-10 * r1.willmore);
    CHECK(std::abs(r1.umbilicity - r2.umbilicity) <= 1e-10 * std::max(1.0, r1.umbilicity));
    CHECK(std::abs(r1.ambient_term - r2.ambient_term) <= 1e-10 * std::max(1.0, std::abs(r1.ambient_term)));
  }
}

TEST_CASE("resolution robustness of H") {
  FlatChart chart(3.0);
  SphericalGrid coarse(32, 64, 16), fine(48, 96, 24);
  const Surface s16 = ellipsoid_surface(1.0, 1.0, 1.2, 16, coarse);
  const Surface s24 = s16.resized(24);
  const GeometryFields Fc = geometry(chart, s16, coarse);
  const GeometryFields Ff = geometry(chart, s24, fine);
  // compare H as spectral fields at common sample points
  std::vector<double> hc_coeff, hf_coeff;
  coarse.analysis(Fc.H, hc_coeff);
  fine.analysis(Ff.H, hf_coeff);
  for (double th : {0.4, 1.1, 2.2})
    for (double ph : {0.3, 2.9, 5.1}) {
      const double vc = coarse.eval_point(hc_coeff, th, ph);
      const double vf = fine.eval_point(hf_coeff, th, ph);
      CHECK(std::abs(vc - vf) <= 1e-6 * std::abs(vf));
    }
}

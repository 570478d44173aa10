#include <doctest.h>

#include <cmath>
#include <numbers>

#include "core/functionals.hpp"

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
}  // namespace

TEST_CASE("flat round sphere functionals") {
  FlatChart chart(3.0);
  SphericalGrid grid(24, 48, 12);
  for (double r : {0.3, 0.8, 1.4}) {
    const Surface s = Surface::round_sphere(Vec3::Zero(), r, 12);
    const FunctionalReport rep = evaluate_functionals(chart, s, grid);
    CHECK(std::abs(rep.willmore - 4 * pi) <= 1e-8 * 4 * pi);  // scale invariance of W
    CHECK(rep.umbilicity <= 1e-10);
    CHECK(std::abs(rep.ambient_term) <= 1e-12);
    CHECK(std::abs(rep.gauss_bonnet_residual) <= 1e-8);
    CHECK(std::abs(rep.lambda_opt) <= 1e-10);
    CHECK(rep.el_residual_l2 <= 1e-7);
  }
}

TEST_CASE("space form geodesic sphere functionals and multiplier") {
  SpaceFormChart chart(1.0, 1.5);
  SphericalGrid grid(24, 48, 12);
  const double r = 0.2;
  const Surface s = Surface::round_sphere(Vec3::Zero(), r, 12);
  const FunctionalReport rep = evaluate_functionals(chart, s, grid);

  const double area = 4 * pi * std::sin(r) * std::sin(r);
  const double w = 4 * pi * std::cos(r) * std::cos(r);
  CHECK(std::abs(rep.area - area) <= 1e-7);
  CHECK(std::abs(rep.willmore - w) <= 1e-7);
  CHECK(rep.umbilicity <= 1e-7);
  CHECK(std::abs(rep.ambient_term + area) <= 1e-7);  // V = -|Sigma|
  CHECK(std::abs(rep.gauss_bonnet_residual) <= 1e-7);
  // W + |V| = 4 pi exactly for geodesic spheres in the unit space form
  CHECK(std::abs(rep.willmore - rep.ambient_term - 4 * pi) <= 1e-7);
  CHECK(rep.lambda_opt == doctest::Approx(-2.0).epsilon(1e-7));  // -Sc/3
  CHECK(rep.el_residual_l2 <= 1e-6);

  double l2 = 0.0;
  el_residual(chart, s, grid, -2.0, &l2);
  CHECK(l2 <= 1e-7);
}

TEST_CASE("ellipsoid is not a critical point and Gauss-Bonnet still holds") {
  FlatChart chart(3.0);
  SphericalGrid grid(48, 96, 24);
  const Surface s = ellipsoid_surface(1.0, 1.0, 1.3, 24, grid);
  const FunctionalReport rep = evaluate_functionals(chart, s, grid);
  CHECK(std::abs(rep.gauss_bonnet_residual) <= 1e-6);
  double l2 = 0.0;
  el_residual(chart, s, grid, 0.0, &l2);
  CHECK(l2 > 0.1);
}

TEST_CASE("lambda projection orthogonality is exact as quadrature sums") {
  SpaceFormChart chart(0.7, 1.5);
  SphericalGrid grid(24, 48, 12);
  Surface s = Surface::round_sphere(Vec3(0.1, 0.05, 0.0), 0.25, 12);
  s.coeffs[2 * 2 + 2 + 1] += 0.01;
  const GeometryFields F = geometry(chart, s, grid);
  const auto op = el_operator(F, grid);
  const double lam = optimal_lambda(F, grid, op);
  double inner = 0.0, scale = 0.0;
  for (int k = 0; k < F.n_nodes(); ++k) {
    const double w = grid.quad_weight(k) * F.dmu[k];
    inner += w * (op[k] + lam * F.H[k]) * F.H[k];
    scale += w * std::abs(op[k] * F.H[k]);
  }
  CHECK(std::abs(inner) <= 1e-12 * scale);
}

TEST_CASE("functional report serialization has the fixed field set") {
  FunctionalReport rep;
  rep.area = 1.5;
  rep.lambda_opt = -2.0;
  CHECK(rep.csv_header() == "area,R,W,U,V,gb_residual,lambda,el_l2");
  const std::string j = rep.to_json();
  for (const char* key : {"area", "\"R\"", "\"W\"", "\"U\"", "\"V\"", "gb_residual", "lambda", "el_l2"})
    CHECK(j.find(key) != std::string::npos);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "core/flow.hpp"

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

TEST_CASE("geodesic sphere constructions") {
  SphericalGrid grid(24, 48, 12);
  SUBCASE("flat: exact round sphere") {
    FlatChart chart(2.0);
    GeodesicSolverParams gp = GeodesicSolverParams::for_chart(chart);
    double rms = 1.0;
    const Surface s = geodesic_sphere(chart, Vec3(0.1, 0.0, -0.2), 0.3, grid, gp, &rms);
    CHECK(rms <= 1e-10);
    CHECK(s.coeffs[0] == doctest::Approx(0.3 * std::sqrt(4 * pi)).epsilon(1e-10));
    for (int n = 1; n < grid.n_coeff(); ++n) CHECK(std::abs(s.coeffs[n]) <= 1e-10);
  }
  SUBCASE("space form: geodesic sphere area") {
    SpaceFormChart chart(1.0, 1.5);
    GeodesicSolverParams gp = GeodesicSolverParams::for_chart(chart);
    const double r = 0.2;
    const Surface s = geodesic_sphere(chart, Vec3::Zero(), r, grid, gp, nullptr);
    const GeometryFields F = geometry(chart, s, grid);
    CHECK(std::abs(F.area - 4 * pi * std::sin(r) * std::sin(r)) <= 1e-7);
  }
  SUBCASE("radius precondition") {
    FlatChart chart(1.0);
    GeodesicSolverParams gp = GeodesicSolverParams::for_chart(chart);
    CHECK_THROWS_AS(geodesic_sphere(chart, Vec3::Zero(), 0.3, grid, gp, nullptr), Error);
  }
}

TEST_CASE("area restoration hits the target exactly") {
  SpaceFormChart chart(0.5, 1.5);
  SphericalGrid grid(16, 32, 8);
  Surface s = Surface::round_sphere(Vec3(0.05, 0.0, 0.1), 0.22, 8);
  s.coeffs[2 * 2 + 2] += 0.02;
  const double target = 0.5;
  restore_area(chart, s, grid, target, 1e-13);
  const GeometryFields F = geometry(chart, s, grid);
  CHECK(std::abs(F.area - target) <= 1e-12 * target);
}

TEST_CASE("flat flow: ellipsoid relaxes to the round sphere") {
  FlatChart chart(5.0);
  SphericalGrid grid(24, 48, 12);
  const double r = 1.0;
  const Surface init = ellipsoid_surface(r, r, 1.2 * r, 12, grid);

  FlowParams fp;
  fp.target_area = 4 * pi * r * r;
  fp.initial_step = 4e-6;
  fp.el_tol = 2e-7;  // scaled by R^3 = 1
  fp.max_steps = 60000;
  GeodesicSolverParams gp = GeodesicSolverParams::for_chart(chart);

  const FlowResult res = minimize(chart, init, fp, grid, gp);
  REQUIRE(res.trace.status == FlowStatus::converged);

  const FunctionalReport rep = evaluate_functionals(chart, res.surface, grid);
  CHECK(std::abs(rep.area - fp.target_area) <= 1e-11 * fp.target_area);
  CHECK(std::abs(rep.willmore - 4 * pi) <= 1e-6);
  CHECK(std::sqrt(rep.umbilicity) <= 1e-5);
  CHECK(std::abs(rep.lambda_opt) <= 1e-5);

  // trace invariants: W non-increasing along accepted shape steps, area pinned
  double last_w = std::numeric_limits<double>::infinity();
  for (const FlowStep& st : res.trace.steps) {
    if (st.kind == 's') {
      CHECK(st.willmore <= last_w + 1e-13);
      last_w = st.willmore;
    }
    CHECK(std::abs(st.area - fp.target_area) <= 1e-10 * fp.target_area);
  }
  // final multiplier reproducible from the surface alone
  CHECK(std::abs(optimal_lambda(chart, res.surface, grid) - res.trace.steps.back().lambda) <= 1e-8);
}

TEST_CASE("space form flow: perturbed geodesic sphere relaxes back") {
  SpaceFormChart chart(1.0, 1.5);
  SphericalGrid grid(24, 48, 12);
  const double r = 0.2;
  Surface init = Surface::round_sphere(Vec3::Zero(), r, 12);
  init.coeffs[2 * 2 + 2] += 0.05 * r;  // Y_{2,0} perturbation

  FlowParams fp;
  fp.target_area = 4 * pi * std::sin(r) * std::sin(r);
  fp.initial_step = 4e-6;
  fp.el_tol = 1e-9;
  fp.max_steps = 60000;
  GeodesicSolverParams gp = GeodesicSolverParams::for_chart(chart);

  const FlowResult res = minimize(chart, init, fp, grid, gp);
  REQUIRE(res.trace.status == FlowStatus::converged);
  const FunctionalReport rep = evaluate_functionals(chart, res.surface, grid);
  CHECK(std::sqrt(rep.umbilicity) <= 1e-5);
  CHECK(rep.lambda_opt == doctest::Approx(-2.0).epsilon(1e-5));
}

TEST_CASE("flat flow equivariance under chart translation") {
  FlatChart chart(5.0);
  SphericalGrid grid(16, 32, 8);
  const Vec3 t(0.4, -0.3, 0.2);
  Surface init = ellipsoid_surface(0.5, 0.5, 0.57, 8, grid);
  Surface init_t = init;
  init_t.center += t;

  FlowParams fp;
  fp.target_area = 4 * pi * 0.25;
  fp.initial_step = 4e-6;
  fp.el_tol = 1e-6;
  fp.max_steps = 30000;
  GeodesicSolverParams gp = GeodesicSolverParams::for_chart(chart);

  const FlowResult a = minimize(chart, init, fp, grid, gp);
  const FlowResult b = minimize(chart, init_t, fp, grid, gp);
  REQUIRE(a.trace.status == FlowStatus::converged);
  REQUIRE(b.trace.status == FlowStatus::converged);
  CHECK((b.surface.center - (a.surface.center + t)).norm() <= 1e-8);
  for (int n = 0; n < grid.n_coeff(); ++n) CHECK(std::abs(a.surface.coeffs[n] - b.surface.coeffs[n]) <= 1e-8);
}

TEST_CASE("degenerate start aborts with a trace") {
  FlatChart chart(5.0);
  SphericalGrid grid(16, 32, 8);
  Surface bad = Surface::round_sphere(Vec3::Zero(), 0.5, 8);
  bad.coeffs[2] = 3.0;  // rho <= 0 somewhere
  FlowParams fp;
  fp.target_area = pi;
  const FlowResult res = minimize(chart, bad, fp, grid, GeodesicSolverParams{});
  CHECK(res.trace.status == FlowStatus::degenerate);
  CHECK(!res.trace.message.empty());
}

TEST_CASE("flow trace serializes to CSV") {
  FlowTrace tr;
  tr.steps.push_back({0, 's', 12.57, 3.14, -2.0, 1e-5, 1e-7});
  tr.steps.push_back({1, 'c', 12.56, 3.14, -2.0, 9e-6, 1e-3});
  const std::string csv = tr.to_csv();
  CHECK(csv.find("step,kind,W,area,lambda,scaled_residual,step_size") == 0);
  CHECK(csv.find("0,s,") != std::string::npos);
  CHECK(csv.find("1,c,") != std::string::npos);
}

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "core/sphgrid.hpp"

using namespace wlm;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("quadrature weights sum to 4 pi") {
  const std::array<std::array<int, 3>, 3> sizes = {{{16, 32, 10}, {32, 64, 16}, {48, 96, 24}}};
  for (auto [nt, np, L] : sizes) {
    SphericalGrid grid(nt, np, L);
    double s = 0.0;
    for (int k = 0; k < grid.n_nodes(); ++k) s += grid.quad_weight(k);
    CHECK(std::abs(s - 4.0 * pi) <= 1e-12 * 4.0 * pi);
  }
}

TEST_CASE("grid construction validates node counts") {
  CHECK_THROWS(SphericalGrid(10, 32, 10));   // n_theta < L+1
  CHECK_THROWS(SphericalGrid(16, 20, 10));   // n_phi < 2L+2
  CHECK_THROWS(SphericalGrid(16, 33, 10));   // odd n_phi
}

TEST_CASE("analysis inverts synthesis on bandlimited coefficients") {
  SphericalGrid grid(16, 32, 10);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coeff(grid.n_coeff());
  for (double& c : coeff) c = u(rng);
  std::vector<double> f, back;
  grid.synthesis(coeff, f);
  grid.analysis(f, back);
  double err = 0.0;
  for (int n = 0; n < grid.n_coeff(); ++n) err = std::max(err, std::abs(back[n] - coeff[n]));
  CHECK(err <= 1e-10);

  // single delta coefficient round trip (Y_{3,2})
  std::fill(coeff.begin(), coeff.end(), 0.0);
  coeff[3 * 3 + 3 + 2] = 1.0;
  grid.synthesis(coeff, f);
  grid.analysis(f, back);
  for (int n = 0; n < grid.n_coeff(); ++n)
    CHECK(std::abs(back[n] - coeff[n]) <= 1e-10);
}

TEST_CASE("round-sphere spectral Laplacian eigencheck") {
  SphericalGrid grid(16, 32, 10);
  for (int l : {1, 3, 5, 10}) {
    for (int m : {-l, 0, (l > 1 ? l - 1 : l)}) {
      std::vector<double> coeff(grid.n_coeff(), 0.0);
      coeff[l * l + l + m] = 1.0;
      std::vector<double> f, lap_coeff, lap;
      grid.synthesis(coeff, f);
      grid.laplace_sphere(coeff, lap_coeff);
      grid.synthesis(lap_coeff, lap);
      double err = 0.0;
      for (int k = 0; k < grid.n_nodes(); ++k) err = std::max(err, std::abs(lap[k] + l * (l + 1.0) * f[k]));
      CHECK(err <= 1e-8);
    }
  }
}

TEST_CASE("synthesized theta and phi derivatives match finite differences of point evaluation") {
  SphericalGrid grid(24, 50, 12);
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coeff(grid.n_coeff());
  for (double& c : coeff) c = u(rng);

  std::vector<double> f, ft, fp, ftt, ftp, fpp;
  grid.synthesis_derivs(coeff, &f, &ft, &fp, &ftt, &ftp, &fpp);

  const double h = 1e-5;
  auto at = [&](double th, double ph) { return grid.eval_point(coeff, th, ph); };
  for (int trial = 0; trial < 12; ++trial) {
    const int k = static_cast<int>((0.5 + 0.5 * u(rng)) * (grid.n_nodes() - 1));
    const double th = grid.node_theta(k), ph = grid.node_phi(k);
    const double fd_t = (at(th + h, ph) - at(th - h, ph)) / (2 * h);
    const double fd_p = (at(th, ph + h) - at(th, ph - h)) / (2 * h);
    const double fd_tt = (at(th + h, ph) - 2 * at(th, ph) + at(th - h, ph)) / (h * h);
    const double fd_pp = (at(th, ph + h) - 2 * at(th, ph) + at(th, ph - h)) / (h * h);
    const double fd_tp = (at(th + h, ph + h) - at(th + h, ph - h) - at(th - h, ph + h) + at(th - h, ph - h)) / (4 * h * h);
    CHECK(ft[k] == doctest::Approx(fd_t).epsilon(1e-6));
    CHECK(fp[k] == doctest::Approx(fd_p).epsilon(1e-6));
    CHECK(ftt[k] == doctest::Approx(fd_tt).epsilon(1e-4));
    CHECK(fpp[k] == doctest::Approx(fd_pp).epsilon(1e-4));
    CHECK(ftp[k] == doctest::Approx(fd_tp).epsilon(1e-4));
  }
}

TEST_CASE("gauss legendre nodes integrate polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(12, x, w);
  // int_{-1}^{1} x^k dx for k <= 2n-1
  for (int k = 0; k <= 23; ++k) {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += w[i] * std::pow(x[i], k);
    const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1.0);
    CHECK(std::abs(s - exact) <= 1e-13);
  }
}

TEST_CASE("antipodal node map") {
  SphericalGrid grid(16, 32, 10);
  for (int k : {0, 5, 100, grid.n_nodes() - 1}) {
    const int a = grid.antipode(k);
    const double tk = grid.node_theta(k), ta = grid.node_theta(a);
    CHECK(std::abs(tk + ta - pi) <= 1e-12);
    const double dp = std::abs(grid.node_phi(k) - grid.node_phi(a));
    CHECK(std::abs(dp - pi) <= 1e-12);
    CHECK(grid.antipode(a) == k);
  }
}

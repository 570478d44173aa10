#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "metric.hpp"
#include "sphgrid.hpp"

namespace wlm {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// Star-shaped embedded sphere: chart-space center c and radial field
/// rho(omega) > 0 in real spherical-harmonic coefficients, y = c + rho(omega) omega.
struct Surface {
  Vec3 center = Vec3::Zero();
  int L = 0;
  std::vector<double> coeffs;  // (l,m) lexicographic, size (L+1)^2

  static Surface round_sphere(const Vec3& center, double radius, int L);
  /// rho scaled so that l=0 carries the given mean radius and the rest is the given shape
  Surface resized(int new_L) const;

  double radius_at(double theta, double phi) const;

  std::string to_json() const;
  static Surface from_json(const std::string& text);
};

/// Weighted least-squares fit of a radial field from scattered directions.
/// Returns the fitted surface and the rms fit error.
Surface fit_scattered_radial(const Vec3& center, int L, const std::vector<Vec3>& directions,
                             const std::vector<double>& radii, const std::vector<double>& weights, double* rms_error);

/// Per-node extrinsic package with respect to the ambient metric.
struct GeometryFields {
  const SphericalGrid* grid = nullptr;

  std::vector<Vec3> dir;             // unit radial direction omega
  std::vector<double> rho;
  std::vector<Vec3> y;               // embedding
  std::vector<Vec3> e1, e2;          // coordinate tangents d y/d theta, d y/d phi
  std::vector<Vec3> y11, y12, y22;   // second embedding derivatives
  std::vector<Vec3> nu;              // outward g-unit normal
  std::vector<Mat3> g, ginv;         // ambient metric at the node
  std::vector<Mat2> gamma, gamma_inv;
  std::vector<double> det_gamma;
  std::vector<double> dmu;           // area density per solid angle: sqrt(det gamma)/sin(theta)
  std::vector<Mat2> A, Aring;        // second fundamental form and trace-free part
  std::vector<double> H;
  std::vector<Mat2> T, Tring;        // tangential Ricci projection and trace-free part
  std::vector<Vec2> w1form;          // omega_i = Ric(nu, e_i)
  std::vector<double> ric_nn, sc;
  std::vector<Mat3> ric;
  std::vector<double> align;         // g(dir, nu) > 0 for star-shaped surfaces
  std::vector<Mat2> Gamma2_1, Gamma2_2;  // surface Christoffels Gamma^1_ij, Gamma^2_ij

  double area = 0.0;
  double area_radius = 0.0;

  int n_nodes() const { return grid->n_nodes(); }

  /// |B|^2_gamma for a symmetric 2-tensor at node k
  double tensor_norm2(int k, const Mat2& B) const {
    const Mat2 up = gamma_inv[k] * B * gamma_inv[k];
    return (up.array() * B.array()).sum();
  }
};

/// Assemble all geometry fields. Throws a degeneracy error naming the node when
/// rho <= 0 or the induced metric fails to be positive.
GeometryFields geometry(const Chart& chart, const Surface& surface, const SphericalGrid& grid);

/// Quadrature of a node field against the surface measure.
double integrate(const GeometryFields& fields, const SphericalGrid& grid, const std::vector<double>& f);

}  // namespace wlm

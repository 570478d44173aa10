#pragma once

#include "geodesic.hpp"
#include "surface.hpp"

namespace wlm {

struct CenterParams {
  double grad_tol = 1e-9;  // stop when |grad w| / area <= grad_tol
  int max_iters = 60;
  int grid_reduce = 1;  // integrate w on a grid coarsened by this factor (cost knob)

  void validate() const {
    if (grad_tol <= 0.0 || max_iters <= 0 || grid_reduce < 1)
      fail(ErrorCode::config, "center params must be positive");
  }
};

/// Surface expressed in normal coordinates at the geometric center: node images,
/// chart and Euclidean measure densities, Euclidean normals, distances.
struct CenteredGeometry {
  Vec3 p0 = Vec3::Zero();
  Mat3 frame = Mat3::Identity();
  double area = 0.0;
  double area_radius = 0.0;
  std::vector<Vec3> z;        // normal coordinates of the nodes
  std::vector<double> dmu_g;  // induced measure density per solid angle (chart invariant)
  std::vector<double> dmu_e;  // Euclidean measure density of the image
  std::vector<Vec3> nu_e;     // Euclidean outward normal of the image
};

struct CenterReport {
  Vec3 p0 = Vec3::Zero();
  double w_value = 0.0;    // int dist(p0,x)^2 dmu
  double grad_norm = 0.0;  // |grad w|_g at p0
  Vec3 moment_g = Vec3::Zero();  // int z dmu_g in normal coordinates
  Vec3 moment_e = Vec3::Zero();  // int z dmu_E
  double dist_band = 0.0;        // max | dist(p0,.) - R |
  bool hessian_positive = false;
  int iterations = 0;

  std::string to_json() const;
};

/// Minimize w(p) = int dist(p,x)^2 dmu by damped Newton from the centroid seed,
/// then recenter and evaluate the moment integrals in normal coordinates at p0.
CenterReport geometric_center(const Chart& chart, const Surface& surface, const SphericalGrid& grid,
                              const CenterParams& params, const GeodesicSolverParams& geo,
                              CenteredGeometry* geometry_out = nullptr);

/// Max |integral of products of factors from {nu_e^a, z^a/R}| with dmu_E,
/// for odd product degree 2k+1 (k = 0 or 1).
std::vector<double> odd_moments(const CenteredGeometry& cg, const SphericalGrid& grid, int k);

/// Star-shaped refit of the node images about the origin of the normal coordinates.
Surface recentered_surface(const CenteredGeometry& cg, const SphericalGrid& grid, double* fit_rms);

}  // namespace wlm

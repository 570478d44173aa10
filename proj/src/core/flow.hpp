#pragma once

#include "functionals.hpp"
#include "geodesic.hpp"
#include "surface.hpp"

namespace wlm {

struct FlowParams {
  double target_area = 0.0;
  double initial_step = 1e-5;   // step in flow time is initial_step * R^4 (fourth-order stiffness)
  int max_steps = 200000;
  double el_tol = 1e-8;         // stop when el_residual_l2 * R^3 <= el_tol
  double armijo_c = 0.1;
  double step_shrink = 0.5;
  double step_grow = 1.15;
  double area_newton_tol = 1e-12;  // relative
  int filter_interval = 50;        // zero coefficients above 2L/3 this often
  bool filter_enabled = true;
  // translational correction: Newton on the l=1 residual m(c) = int nu (G + lambda H) dmu.
  // Solves for the center where the translational gradient vanishes; required because
  // the translation modes are arbitrarily stiff relative to the shape modes.
  bool center_correction = true;
  int center_interval = 60;
  double center_tol = 1e-2;  // converged when |m| <= center_tol * R^4

  void validate() const {
    if (target_area <= 0.0) fail(ErrorCode::config, "flow: target_area must be positive");
    if (initial_step <= 0.0 || el_tol <= 0.0 || area_newton_tol <= 0.0)
      fail(ErrorCode::config, "flow: steps and tolerances must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail(ErrorCode::config, "flow: armijo_c must lie in (0,1)");
    if (max_steps <= 0) fail(ErrorCode::config, "flow: max_steps must be positive");
  }
};

enum class FlowStatus { converged, max_steps, degenerate };

struct FlowStep {
  int index = 0;
  char kind = 's';  // 's' shape, 'c' center, 'f' filter
  double willmore = 0.0;
  double area = 0.0;
  double lambda = 0.0;
  double scaled_residual = 0.0;
  double step_size = 0.0;
};

struct FlowTrace {
  std::vector<FlowStep> steps;
  FlowStatus status = FlowStatus::max_steps;
  std::string message;

  std::string to_csv() const;
};

struct FlowResult {
  Surface surface;
  FlowTrace trace;
};

/// Geodesic sphere of radius r about p0, returned as a star-shaped surface about
/// c = p0 with the radial field recovered by weighted least squares.
Surface geodesic_sphere(const Chart& chart, const Vec3& p0, double r, const SphericalGrid& grid,
                        const GeodesicSolverParams& params, double* fit_rms = nullptr);

/// Rescale the radial field about the center so the area matches the target exactly
/// (1-D Newton with multiplicative updates).
void restore_area(const Chart& chart, Surface& surface, const SphericalGrid& grid, double target_area,
                  double rel_tol);

/// Area-constrained Willmore descent: normal speed equal to the lambda-projected
/// Euler-Lagrange residual, converted to a radial perturbation, with Armijo
/// backtracking on W at fixed area and periodic translational Newton corrections.
FlowResult minimize(const Chart& chart, const Surface& init, const FlowParams& params, const SphericalGrid& grid,
                    const GeodesicSolverParams& geo_params);

}  // namespace wlm

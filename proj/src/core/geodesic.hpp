#pragma once

#include <memory>
#include <vector>

#include "metric.hpp"

namespace wlm {

struct GeodesicSolverParams {
  double step_size = 5e-4;      // RK4 arc-length step
  double shoot_tol = 1e-11;     // BVP residual tolerance (chart coordinates)
  int max_newton_iters = 30;

  void validate() const {
    if (step_size <= 0.0 || shoot_tol <= 0.0) fail(ErrorCode::config, "geodesic params must be positive");
  }
  static GeodesicSolverParams for_chart(const Chart& chart) {
    GeodesicSolverParams p;
    p.step_size = chart.valid_radius() / 2000.0;
    p.shoot_tol = 1e-11 * chart.valid_radius();
    return p;
  }
};

/// Endpoint of exp_p(v) together with the derivatives of the endpoint map.
struct GeodesicEnd {
  Vec3 y;      // gamma(1)
  Vec3 v;      // gamma'(1)
  Mat3 dy_dv;  // d exp_p(v) / dv
  Mat3 dy_dp;  // d exp_p(v) / dp  (only when requested)
};

Vec3 exp_map(const Chart& chart, const Vec3& p, const Vec3& v, const GeodesicSolverParams& params);

/// exp with the Jacobian in the initial velocity (and optionally in the base point),
/// propagated by the linearized geodesic equation alongside the RK4 state.
GeodesicEnd exp_map_jacobian(const Chart& chart, const Vec3& p, const Vec3& v, const GeodesicSolverParams& params,
                             bool with_base_jacobian = false);

/// Newton shooting for exp_p(v) = q, initialized with the flat-chart velocity q - p.
Vec3 log_map(const Chart& chart, const Vec3& p, const Vec3& q, const GeodesicSolverParams& params);

/// log_map together with d(log_p q)/dp at fixed q (for Newton on the center of mass).
struct LogResult {
  Vec3 v;
  Mat3 dv_dp;
  Mat3 dy_dv;  // endpoint Jacobian of the final shot, used for Euclidean measures in normal coordinates
};
LogResult log_map_jacobian(const Chart& chart, const Vec3& p, const Vec3& q, const GeodesicSolverParams& params,
                           const Vec3* warm_start = nullptr);

double distance(const Chart& chart, const Vec3& p, const Vec3& q, const GeodesicSolverParams& params);

/// Chart in geodesic normal coordinates at p0: z -> exp_p0(E z) with E a
/// g(p0)-orthonormal frame (Gram-Schmidt of the coordinate basis in order 1,2,3).
/// Metric derivatives are finite differences of the chain-rule metric, O(h^4).
class NormalChart final : public Chart {
public:
  NormalChart(std::shared_ptr<const Chart> base, const Vec3& p0, const GeodesicSolverParams& params);

  MetricKind kind() const override { return MetricKind::derived; }
  Mat3 metric(const Vec3& z) const override;
  std::array<Mat3, 3> dmetric(const Vec3& z) const override;
  std::array<std::array<Mat3, 3>, 3> ddmetric(const Vec3& z) const override;

  const Vec3& p0() const { return p0_; }
  const Mat3& frame() const { return frame_; }
  double fd_step_first() const { return h1_; }
  double fd_step_second() const { return h2_; }

  Vec3 to_base(const Vec3& z) const;    // chart point in base coordinates
  Vec3 from_base(const Vec3& x) const;  // normal coordinates of a base-chart point

private:
  std::shared_ptr<const Chart> base_;
  Vec3 p0_;
  Mat3 frame_;  // columns orthonormal w.r.t. g(p0)
  Mat3 frame_inv_;
  GeodesicSolverParams params_;
  double h1_, h2_;
};

std::shared_ptr<NormalChart> recenter_chart(std::shared_ptr<const Chart> chart, const Vec3& p0,
                                            const GeodesicSolverParams& params);

/// Log-log slopes of the normal-coordinate expansion residuals
///   Gamma^n_ab(y) + (Rm^n_agb + Rm^n_bga)(0) y^g / 3          -> O(|y|^2)
///   div b (y)     + Ric_bg(0) y^g b^b / 3                     -> O(|y|^2)
struct ExpansionReport {
  std::vector<double> radii;
  std::vector<double> gamma_residuals;  // max-abs per radius
  std::vector<double> divb_residuals;
  double gamma_slope = 0.0;
  double divb_slope = 0.0;
  bool exactly_flat = false;  // residuals at round-off level, slopes meaningless
};

ExpansionReport christoffel_expansion_check(const Chart& chart);

}  // namespace wlm

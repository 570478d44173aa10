#include "geodesic.hpp"

#include <cmath>
#include <limits>

namespace wlm {

namespace {

struct State {
  Vec3 y, v;
  Eigen::Matrix<double, 3, 6> J;  // endpoint sensitivity columns
  Eigen::Matrix<double, 3, 6> K;  // velocity sensitivity columns

  State operator+(const State& o) const {
    return {y + o.y, v + o.v, J + o.J, K + o.K};
  }
  State operator*(double s) const { return {y * s, v * s, J * s, K * s}; }
};

struct Deriv {
  const Chart& chart;
  bool with_jac;

  State operator()(const State& s) const {
    State d;
    d.y = s.v;
    const auto gamma = chart.christoffel(s.y);
    for (int a = 0; a < 3; ++a) d.v[a] = -s.v.dot(gamma[a] * s.v);
    if (with_jac) {
      const auto dgamma = chart.dchristoffel(s.y);
      d.J = s.K;
      for (int col = 0; col < 6; ++col) {
        Vec3 jy = s.J.col(col);
        Vec3 kv = s.K.col(col);
        for (int a = 0; a < 3; ++a) {
          double acc = 0.0;
          for (int g = 0; g < 3; ++g) acc += jy[g] * s.v.dot(dgamma[g][a] * s.v);
          acc += 2.0 * kv.dot(gamma[a] * s.v);
          d.K(a, col) = -acc;
        }
      }
    } else {
      d.J.setZero();
      d.K.setZero();
    }
    return d;
  }
};

State integrate(const Chart& chart, const Vec3& p, const Vec3& v, const GeodesicSolverParams& params, bool with_jac,
                bool with_base) {
  params.validate();
  chart.require_inside(p);
  State s;
  s.y = p;
  s.v = v;
  s.J.setZero();
  s.K.setZero();
  s.K.block<3, 3>(0, 0).setIdentity();  // d/dv block
  if (with_base) s.J.block<3, 3>(0, 3).setIdentity();

  const double speed = v.norm();
  if (speed == 0.0) {
    s.J.block<3, 3>(0, 0).setIdentity();  // d exp_p(v)/dv -> Id as v -> 0
    if (with_base) s.J.block<3, 3>(0, 3).setIdentity();
    return s;
  }
  const int n = std::max(8, static_cast<int>(std::ceil(speed / params.step_size)));
  const double dt = 1.0 / n;
  Deriv f{chart, with_jac};
  for (int i = 0; i < n; ++i) {
    State k1 = f(s);
    State k2 = f(s + k1 * (0.5 * dt));
    State k3 = f(s + k2 * (0.5 * dt));
    State k4 = f(s + k3 * dt);
    s = s + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    if (s.y.norm() >= chart.valid_radius())
      fail(ErrorCode::domain, "geodesic left the chart ball (radius " + std::to_string(s.y.norm()) + ")");
  }
  return s;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  // least-squares slope of ys against xs
  const size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace

Vec3 exp_map(const Chart& chart, const Vec3& p, const Vec3& v, const GeodesicSolverParams& params) {
  return integrate(chart, p, v, params, false, false).y;
}

GeodesicEnd exp_map_jacobian(const Chart& chart, const Vec3& p, const Vec3& v, const GeodesicSolverParams& params,
                             bool with_base_jacobian) {
  State s = integrate(chart, p, v, params, true, with_base_jacobian);
  GeodesicEnd e;
  e.y = s.y;
  e.v = s.v;
  e.dy_dv = s.J.block<3, 3>(0, 0);
  e.dy_dp = s.J.block<3, 3>(0, 3);
  return e;
}

Vec3 log_map(const Chart& chart, const Vec3& p, const Vec3& q, const GeodesicSolverParams& params) {
  return log_map_jacobian(chart, p, q, params).v;
}

LogResult log_map_jacobian(const Chart& chart, const Vec3& p, const Vec3& q, const GeodesicSolverParams& params,
                           const Vec3* warm_start) {
  chart.require_inside(p);
  chart.require_inside(q);
  Vec3 v = warm_start ? *warm_start : Vec3(q - p);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < params.max_newton_iters; ++it) {
    GeodesicEnd e = exp_map_jacobian(chart, p, v, params, true);
    Vec3 r = e.y - q;
    residual = r.norm();
    if (residual <= params.shoot_tol) {
      LogResult out;
      out.v = v;
      out.dy_dv = e.dy_dv;
      out.dv_dp = -e.dy_dv.inverse() * e.dy_dp;
      return out;
    }
    v -= e.dy_dv.partialPivLu().solve(r);
  }
  fail(ErrorCode::solver,
       "geodesic shooting did not converge, final residual " + std::to_string(residual));
}

double distance(const Chart& chart, const Vec3& p, const Vec3& q, const GeodesicSolverParams& params) {
  if ((p - q).norm() == 0.0) return 0.0;
  const Vec3 v = log_map(chart, p, q, params);
  const Mat3 g = chart.metric(p);
  return std::sqrt(v.dot(g * v));
}

// ------------------------------------------------------------- NormalChart

NormalChart::NormalChart(std::shared_ptr<const Chart> base, const Vec3& p0, const GeodesicSolverParams& params)
    : Chart(0.5 * (base->valid_radius() - p0.norm())), base_(std::move(base)), p0_(p0), params_(params) {
  if (p0.norm() >= 0.5 * base_->valid_radius())
    fail(ErrorCode::domain, "recenter point too close to the chart boundary");
  const Mat3 g0 = base_->metric(p0);
  // Gram-Schmidt of the coordinate basis in order (1,2,3) w.r.t. g(p0)
  Mat3 e = Mat3::Identity();
  for (int a = 0; a < 3; ++a) {
    Vec3 u = e.col(a);
    for (int b = 0; b < a; ++b) u -= frame_.col(b) * (frame_.col(b).dot(g0 * e.col(a)));
    frame_.col(a) = u / std::sqrt(u.dot(g0 * u));
  }
  frame_inv_ = frame_.inverse();
  h1_ = 1e-3 * base_->valid_radius();
  h2_ = 4e-3 * base_->valid_radius();
}

Vec3 NormalChart::to_base(const Vec3& z) const { return exp_map(*base_, p0_, frame_ * z, params_); }

Vec3 NormalChart::from_base(const Vec3& x) const { return frame_inv_ * log_map(*base_, p0_, x, params_); }

Mat3 NormalChart::metric(const Vec3& z) const {
  if (z.norm() == 0.0) return Mat3::Identity();
  GeodesicEnd e = exp_map_jacobian(*base_, p0_, frame_ * z, params_, false);
  const Mat3 jac = e.dy_dv * frame_;  // d Phi / d z
  return jac.transpose() * base_->metric(e.y) * jac;
}

std::array<Mat3, 3> NormalChart::dmetric(const Vec3& z) const {
  std::array<Mat3, 3> dg;
  for (int c = 0; c < 3; ++c) {
    Vec3 ec = Vec3::Zero();
    ec[c] = 1.0;
    dg[c] = (-metric(z + 2 * h1_ * ec) + 8.0 * metric(z + h1_ * ec) - 8.0 * metric(z - h1_ * ec) +
             metric(z - 2 * h1_ * ec)) /
            (12.0 * h1_);
  }
  return dg;
}

std::array<std::array<Mat3, 3>, 3> NormalChart::ddmetric(const Vec3& z) const {
  std::array<std::array<Mat3, 3>, 3> r;
  auto dg_at = [&](const Vec3& w) { return dmetric(w); };
  for (int d = 0; d < 3; ++d) {
    Vec3 ed = Vec3::Zero();
    ed[d] = 1.0;
    auto p2 = dg_at(z + 2 * h2_ * ed);
    auto p1 = dg_at(z + h2_ * ed);
    auto m1 = dg_at(z - h2_ * ed);
    auto m2 = dg_at(z - 2 * h2_ * ed);
    for (int c = 0; c < 3; ++c) r[d][c] = (-p2[c] + 8.0 * p1[c] - 8.0 * m1[c] + m2[c]) / (12.0 * h2_);
  }
  // symmetrize the mixed derivatives
  for (int c = 0; c < 3; ++c)
    for (int d = c + 1; d < 3; ++d) {
      Mat3 m = 0.5 * (r[c][d] + r[d][c]);
      r[c][d] = m;
      r[d][c] = m;
    }
  return r;
}

std::shared_ptr<NormalChart> recenter_chart(std::shared_ptr<const Chart> chart, const Vec3& p0,
                                            const GeodesicSolverParams& params) {
  return std::make_shared<NormalChart>(std::move(chart), p0, params);
}

// ---------------------------------------------- christoffel_expansion_check

ExpansionReport christoffel_expansion_check(const Chart& chart) {
  // precondition: normal form at the origin
  {
    const Mat3 g0 = chart.metric(Vec3::Zero());
    if ((g0 - Mat3::Identity()).norm() > 1e-6) fail(ErrorCode::domain, "chart is not normalized at 0 (g(0) != id)");
    const auto dg0 = chart.dmetric(Vec3::Zero());
    for (int c = 0; c < 3; ++c)
      if (dg0[c].norm() > 1e-6) fail(ErrorCode::domain, "chart is not in normal form at 0 (dg(0) != 0)");
  }
  CurvatureAtPoint cv = chart.curvature(Vec3::Zero());

  // deterministic probe directions: axes, face and body diagonals
  std::vector<Vec3> dirs;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) dirs.push_back(Vec3(sx, sy, sz).normalized());
  dirs.push_back(Vec3(1, 2, 3).normalized());
  dirs.push_back(Vec3(-2, 1, 2).normalized());

  ExpansionReport rep;
  const double r0 = 0.2 * chart.valid_radius();
  const int levels = 6;
  for (int j = 0; j < levels; ++j) {
    const double r = r0 * std::pow(2.0, -j);
    double gamma_res = 0.0;
    double divb_res = 0.0;
    for (const Vec3& d : dirs) {
      const Vec3 y = r * d;
      const auto gamma = chart.christoffel(y);
      for (int n = 0; n < 3; ++n)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            double model = 0.0;
            for (int g = 0; g < 3; ++g) model += -(cv.rm_at(a, g, b, n) + cv.rm_at(b, g, a, n)) * y[g] / 3.0;
            gamma_res = std::max(gamma_res, std::abs(gamma[n](a, b) - model));
          }
      for (int bcomp = 0; bcomp < 3; ++bcomp) {
        double div = 0.0;
        for (int a = 0; a < 3; ++a) div += gamma[a](a, bcomp);
        double model = -cv.ric.row(bcomp).dot(y) / 3.0;
        divb_res = std::max(divb_res, std::abs(div - model));
      }
    }
    rep.radii.push_back(r);
    rep.gamma_residuals.push_back(gamma_res);
    rep.divb_residuals.push_back(divb_res);
  }

  double max_res = 0.0;
  for (size_t i = 0; i < rep.radii.size(); ++i)
    max_res = std::max({max_res, rep.gamma_residuals[i], rep.divb_residuals[i]});
  if (max_res < 1e-12) {
    rep.exactly_flat = true;
    return rep;
  }
  std::vector<double> lx, lg, ld;
  for (size_t i = 0; i < rep.radii.size(); ++i) {
    if (rep.gamma_residuals[i] <= 0 || rep.divb_residuals[i] <= 0) continue;
    lx.push_back(std::log(rep.radii[i]));
    lg.push_back(std::log(rep.gamma_residuals[i]));
    ld.push_back(std::log(rep.divb_residuals[i]));
  }
  rep.gamma_slope = fit_slope(lx, lg);
  rep.divb_slope = fit_slope(lx, ld);
  return rep;
}

}  // namespace wlm

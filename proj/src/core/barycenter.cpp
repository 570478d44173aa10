#include "barycenter.hpp"

#include <cmath>
#include <memory>

#include <json.hpp>

namespace wlm {

namespace {

// integration grid for w and its derivatives (optionally coarsened)
const SphericalGrid* select_grid(const SphericalGrid& grid, int reduce, std::unique_ptr<SphericalGrid>& storage) {
  if (reduce <= 1) return &grid;
  const int L = grid.degree();
  const int nt = std::max(L + 1, grid.n_theta() / reduce);
  int np = std::max(2 * L + 2, grid.n_phi() / reduce);
  if (np % 2 != 0) ++np;
  if (nt >= grid.n_theta() && np >= grid.n_phi()) return &grid;
  storage = std::make_unique<SphericalGrid>(nt, np, L);
  return storage.get();
}

struct WDerivs {
  double w = 0.0;
  Vec3 f = Vec3::Zero();  // int log_p(x) dmu  (gradient is -2 g f)
  Mat3 df = Mat3::Zero();  // d f / d p
};

WDerivs w_derivatives(const Chart& chart, const Vec3& p, const std::vector<Vec3>& nodes,
                      const std::vector<double>& weights, const GeodesicSolverParams& geo, bool with_jacobian) {
  WDerivs out;
  for (size_t k = 0; k < nodes.size(); ++k) {
    if (with_jacobian) {
      const LogResult lr = log_map_jacobian(chart, p, nodes[k], geo);
      out.f += weights[k] * lr.v;
      out.df += weights[k] * lr.dv_dp;
      const Mat3 g0 = chart.metric(p);
      out.w += weights[k] * lr.v.dot(g0 * lr.v);
    } else {
      const Vec3 v = log_map(chart, p, nodes[k], geo);
      out.f += weights[k] * v;
      const Mat3 g0 = chart.metric(p);
      out.w += weights[k] * v.dot(g0 * v);
    }
  }
  return out;
}

}  // namespace

std::string CenterReport::to_json() const {
  nlohmann::json j;
  j["p0"] = {p0[0], p0[1], p0[2]};
  j["w_value"] = w_value;
  j["grad_norm"] = grad_norm;
  j["moment_g"] = {moment_g[0], moment_g[1], moment_g[2]};
  j["moment_e"] = {moment_e[0], moment_e[1], moment_e[2]};
  j["dist_band"] = dist_band;
  j["hessian_positive"] = hessian_positive;
  j["iterations"] = iterations;
  return j.dump();
}

CenterReport geometric_center(const Chart& chart, const Surface& surface, const SphericalGrid& grid,
                              const CenterParams& params, const GeodesicSolverParams& geo,
                              CenteredGeometry* geometry_out) {
  params.validate();
  const GeometryFields F = geometry(chart, surface, grid);

  // integration nodes and weights for w (optionally on a coarser grid)
  std::unique_ptr<SphericalGrid> coarse;
  const SphericalGrid* wgrid = select_grid(grid, params.grid_reduce, coarse);
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  double seed_area = 0.0;
  Vec3 centroid = Vec3::Zero();
  if (wgrid == &grid) {
    nodes = F.y;
    weights.resize(F.n_nodes());
    for (int k = 0; k < F.n_nodes(); ++k) weights[k] = grid.quad_weight(k) * F.dmu[k];
  } else {
    const GeometryFields Fc = geometry(chart, surface.resized(wgrid->degree()), *wgrid);
    nodes = Fc.y;
    weights.resize(Fc.n_nodes());
    for (int k = 0; k < Fc.n_nodes(); ++k) weights[k] = wgrid->quad_weight(k) * Fc.dmu[k];
  }
  for (size_t k = 0; k < nodes.size(); ++k) {
    seed_area += weights[k];
    centroid += weights[k] * nodes[k];
  }
  centroid /= seed_area;

  CenterReport rep;
  Vec3 p = centroid;
  const double cap = 2.0 * F.area_radius;
  bool converged = false;
  WDerivs wd;
  for (int it = 0; it < params.max_iters; ++it) {
    wd = w_derivatives(chart, p, nodes, weights, geo, true);
    const Mat3 g0 = chart.metric(p);
    rep.grad_norm = 2.0 * std::sqrt(wd.f.dot(g0 * wd.f));
    rep.iterations = it;
    if (rep.grad_norm / F.area <= params.grad_tol) {
      converged = true;
      break;
    }
    Vec3 step = wd.df.partialPivLu().solve(-wd.f);
    if (step.norm() > cap) step *= cap / step.norm();
    p += step;
    chart.require_inside(p);
  }
  if (!converged) fail(ErrorCode::solver, "geometric center iteration did not reach the gradient tolerance");

  rep.p0 = p;
  rep.w_value = wd.w;
  // Hess w = -2 g df at the critical point
  const Mat3 g0 = chart.metric(p);
  const Mat3 hess = -2.0 * g0 * wd.df;
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (hess + hess.transpose()));
  rep.hessian_positive = es.eigenvalues().minCoeff() > 0.0;

  // recentered package on the full grid
  CenteredGeometry cg;
  cg.p0 = p;
  cg.area = F.area;
  cg.area_radius = F.area_radius;
  // orthonormal frame, Gram-Schmidt in coordinate order
  for (int a = 0; a < 3; ++a) {
    Vec3 u = Vec3::Unit(a);
    for (int b = 0; b < a; ++b) u -= cg.frame.col(b) * (cg.frame.col(b).dot(g0 * Vec3::Unit(a)));
    cg.frame.col(a) = u / std::sqrt(u.dot(g0 * u));
  }
  const Mat3 frame_inv = cg.frame.transpose() * g0;

  const int nn = F.n_nodes();
  cg.z.resize(nn);
  cg.dmu_g.resize(nn);
  cg.dmu_e.resize(nn);
  cg.nu_e.resize(nn);
  Vec3 mg = Vec3::Zero(), me = Vec3::Zero();
  double band = 0.0;
  for (int k = 0; k < nn; ++k) {
    const LogResult lr = log_map_jacobian(chart, p, F.y[k], geo);
    const Vec3 z = frame_inv * lr.v;
    cg.z[k] = z;
    cg.dmu_g[k] = F.dmu[k];
    const Mat3 dz_dy = frame_inv * lr.dy_dv.inverse();
    const Vec3 ez1 = dz_dy * F.e1[k];
    const Vec3 ez2 = dz_dy * F.e2[k];
    const Vec3 cr = ez1.cross(ez2);
    const int i = k / grid.n_phi();
    cg.dmu_e[k] = cr.norm() / grid.sin_theta(i);
    Vec3 ne = cr.normalized();
    cg.nu_e[k] = ne;
    const double w = grid.quad_weight(k);
    mg += w * F.dmu[k] * z;
    me += w * cg.dmu_e[k] * z;
    band = std::max(band, std::abs(z.norm() - F.area_radius));
  }
  rep.moment_g = mg;
  rep.moment_e = me;
  rep.dist_band = band;
  if (geometry_out) *geometry_out = std::move(cg);
  return rep;
}

std::vector<double> odd_moments(const CenteredGeometry& cg, const SphericalGrid& grid, int k) {
  if (k != 0 && k != 1) fail(ErrorCode::config, "odd_moments supports k = 0 or 1");
  const int nn = static_cast<int>(cg.z.size());
  // factor table: nu_e components then z components / R
  std::vector<std::vector<double>> factors(6, std::vector<double>(nn));
  for (int n = 0; n < nn; ++n) {
    for (int a = 0; a < 3; ++a) {
      factors[a][n] = cg.nu_e[n][a];
      factors[3 + a][n] = cg.z[n][a] / cg.area_radius;
    }
  }
  std::vector<double> out;
  if (k == 0) {
    for (int a = 0; a < 6; ++a) {
      double s = 0.0;
      for (int n = 0; n < nn; ++n) s += grid.quad_weight(n) * cg.dmu_e[n] * factors[a][n];
      out.push_back(std::abs(s));
    }
  } else {
    for (int a = 0; a < 6; ++a)
      for (int b = a; b < 6; ++b)
        for (int c = b; c < 6; ++c) {
          double s = 0.0;
          for (int n = 0; n < nn; ++n)
            s += grid.quad_weight(n) * cg.dmu_e[n] * factors[a][n] * factors[b][n] * factors[c][n];
          out.push_back(std::abs(s));
        }
  }
  return out;
}

Surface recentered_surface(const CenteredGeometry& cg, const SphericalGrid& grid, double* fit_rms) {
  std::vector<Vec3> dirs(cg.z.size());
  std::vector<double> radii(cg.z.size()), weights(cg.z.size());
  for (size_t k = 0; k < cg.z.size(); ++k) {
    radii[k] = cg.z[k].norm();
    dirs[k] = cg.z[k] / radii[k];
    weights[k] = grid.quad_weight(static_cast<int>(k));
  }
  return fit_scattered_radial(Vec3::Zero(), grid.degree(), dirs, radii, weights, fit_rms);
}

}  // namespace wlm

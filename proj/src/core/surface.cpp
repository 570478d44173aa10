#include "surface.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

namespace wlm {

namespace {
constexpr double pi = std::numbers::pi;
}

Surface Surface::round_sphere(const Vec3& center, double radius, int L) {
  Surface s;
  s.center = center;
  s.L = L;
  s.coeffs.assign((L + 1) * (L + 1), 0.0);
  s.coeffs[0] = radius * std::sqrt(4.0 * pi);  // Y_00 = 1/sqrt(4 pi)
  return s;
}

Surface Surface::resized(int new_L) const {
  Surface s;
  s.center = center;
  s.L = new_L;
  s.coeffs.assign((new_L + 1) * (new_L + 1), 0.0);
  const int lmax = std::min(L, new_L);
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) s.coeffs[l * l + l + m] = coeffs[l * l + l + m];
  return s;
}

double Surface::radius_at(double theta, double phi) const {
  std::vector<double> p;
  legendre_point(L, std::cos(theta), std::sin(theta), p);
  auto tri = [this](int l, int m) { return m * (L + 1) - m * (m - 1) / 2 + (l - m); };
  const double sqrt2 = std::numbers::sqrt2;
  double s = 0.0;
  for (int m = 0; m <= L; ++m) {
    const double c = std::cos(m * phi), sn = std::sin(m * phi);
    for (int l = m; l <= L; ++l) {
      const double v = p[tri(l, m)];
      if (m == 0)
        s += coeffs[l * l + l] * v;
      else
        s += sqrt2 * v * (coeffs[l * l + l + m] * c + coeffs[l * l + l - m] * sn);
    }
  }
  return s;
}

std::string Surface::to_json() const {
  nlohmann::json j;
  j["center"] = {center[0], center[1], center[2]};
  j["L"] = L;
  j["coeffs"] = coeffs;
  return j.dump();
}

Surface Surface::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::io, std::string("surface file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("center") || !j.contains("L") || !j.contains("coeffs"))
    fail(ErrorCode::io, "surface JSON requires keys center, L, coeffs");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "center" && it.key() != "L" && it.key() != "coeffs")
      fail(ErrorCode::io, "surface JSON: unknown key '" + it.key() + "'");
  Surface s;
  auto c = j["center"];
  if (!c.is_array() || c.size() != 3) fail(ErrorCode::io, "surface JSON: center must have 3 entries");
  for (int a = 0; a < 3; ++a) s.center[a] = c[a].get<double>();
  s.L = j["L"].get<int>();
  if (s.L < 0) fail(ErrorCode::io, "surface JSON: negative degree");
  s.coeffs = j["coeffs"].get<std::vector<double>>();
  if (static_cast<int>(s.coeffs.size()) != (s.L + 1) * (s.L + 1))
    fail(ErrorCode::io, "surface JSON: coeffs length does not match (L+1)^2");
  return s;
}

Surface fit_scattered_radial(const Vec3& center, int L, const std::vector<Vec3>& directions,
                             const std::vector<double>& radii, const std::vector<double>& weights,
                             double* rms_error) {
  const int nc = (L + 1) * (L + 1);
  const int n = static_cast<int>(directions.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nc, nc);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
  Eigen::VectorXd row(nc);
  std::vector<double> p;
  const double sqrt2 = std::numbers::sqrt2;
  auto tri = [L](int l, int m) { return m * (L + 1) - m * (m - 1) / 2 + (l - m); };
  for (int k = 0; k < n; ++k) {
    const Vec3 d = directions[k].normalized();
    const double theta = std::acos(std::clamp(d[2], -1.0, 1.0));
    const double phi = std::atan2(d[1], d[0]);
    legendre_point(L, std::cos(theta), std::sin(theta), p);
    for (int m = 0; m <= L; ++m) {
      const double c = std::cos(m * phi), sn = std::sin(m * phi);
      for (int l = m; l <= L; ++l) {
        const double v = p[tri(l, m)];
        if (m == 0)
          row[l * l + l] = v;
        else {
          row[l * l + l + m] = sqrt2 * v * c;
          row[l * l + l - m] = sqrt2 * v * sn;
        }
      }
    }
    const double w = weights.empty() ? 1.0 : weights[k];
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row, w);
    rhs += w * radii[k] * row;
  }
  Eigen::VectorXd sol = Eigen::MatrixXd(gram.selfadjointView<Eigen::Lower>()).ldlt().solve(rhs);

  Surface s;
  s.center = center;
  s.L = L;
  s.coeffs.assign(sol.data(), sol.data() + nc);
  if (rms_error) {
    double err2 = 0.0, wsum = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vec3 d = directions[k].normalized();
      const double theta = std::acos(std::clamp(d[2], -1.0, 1.0));
      const double phi = std::atan2(d[1], d[0]);
      const double w = weights.empty() ? 1.0 : weights[k];
      const double r = s.radius_at(theta, phi);
      err2 += w * (r - radii[k]) * (r - radii[k]);
      wsum += w;
    }
    *rms_error = std::sqrt(err2 / wsum);
  }
  return s;
}

GeometryFields geometry(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  if (surface.L != grid.degree())
    fail(ErrorCode::config, "surface degree does not match the grid (resize the surface first)");
  const int nn = grid.n_nodes();
  GeometryFields F;
  F.grid = &grid;

  std::vector<double> rho, rt, rp, rtt, rtp, rpp;
  grid.synthesis_derivs(surface.coeffs, &rho, &rt, &rp, &rtt, &rtp, &rpp);

  auto resize_all = [&](auto&... vs) { (vs.resize(nn), ...); };
  resize_all(F.dir, F.rho, F.y, F.e1, F.e2, F.y11, F.y12, F.y22, F.nu, F.g, F.ginv, F.gamma, F.gamma_inv,
             F.det_gamma, F.dmu, F.A, F.Aring, F.H, F.T, F.Tring, F.w1form, F.ric_nn, F.sc, F.ric, F.align,
             F.Gamma2_1, F.Gamma2_2);

  double area = 0.0;
  for (int k = 0; k < nn; ++k) {
    const int i = k / grid.n_phi();
    const double theta = grid.node_theta(k), phi = grid.node_phi(k);
    const double st = grid.sin_theta(i), ct = std::cos(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);

    const Vec3 om(st * cp, st * sp, ct);
    const Vec3 om_t(ct * cp, ct * sp, -st);
    const Vec3 om_p(-st * sp, st * cp, 0.0);
    const Vec3 om_tt = -om;
    const Vec3 om_tp(-ct * sp, ct * cp, 0.0);
    const Vec3 om_pp(-st * cp, -st * sp, 0.0);

    const double r = rho[k];
    if (!(r > 0.0))
      fail(ErrorCode::degenerate, "surface lost star-shape at node " + std::to_string(k) +
                                      " (rho = " + std::to_string(r) + ")");
    F.dir[k] = om;
    F.rho[k] = r;
    const Vec3 y = surface.center + r * om;
    chart.require_inside(y);
    F.y[k] = y;
    const Vec3 e1 = rt[k] * om + r * om_t;
    const Vec3 e2 = rp[k] * om + r * om_p;
    F.e1[k] = e1;
    F.e2[k] = e2;
    F.y11[k] = rtt[k] * om + 2.0 * rt[k] * om_t + r * om_tt;
    F.y12[k] = rtp[k] * om + rt[k] * om_p + rp[k] * om_t + r * om_tp;
    F.y22[k] = rpp[k] * om + 2.0 * rp[k] * om_p + r * om_pp;

    const Mat3 g = chart.metric(y);
    const Mat3 ginv = g.inverse();
    F.g[k] = g;
    F.ginv[k] = ginv;

    Mat2 gam;
    gam(0, 0) = e1.dot(g * e1);
    gam(0, 1) = gam(1, 0) = e1.dot(g * e2);
    gam(1, 1) = e2.dot(g * e2);
    const double det = gam(0, 0) * gam(1, 1) - gam(0, 1) * gam(0, 1);
    if (!(gam(0, 0) > 0.0) || !(det > 0.0))
      fail(ErrorCode::degenerate, "induced metric not positive at node " + std::to_string(k));
    F.gamma[k] = gam;
    F.det_gamma[k] = det;
    Mat2 gi;
    gi(0, 0) = gam(1, 1) / det;
    gi(1, 1) = gam(0, 0) / det;
    gi(0, 1) = gi(1, 0) = -gam(0, 1) / det;
    F.gamma_inv[k] = gi;
    F.dmu[k] = std::sqrt(det) / st;
    area += grid.quad_weight(k) * F.dmu[k];

    // outward unit normal: raise the Euclidean conormal e1 x e2 with g^{-1}
    const Vec3 w = e1.cross(e2);
    Vec3 nu = ginv * w;
    nu /= std::sqrt(w.dot(ginv * w));
    F.nu[k] = nu;
    const double align = om.dot(g * nu);
    if (!(align > 0.0)) fail(ErrorCode::degenerate, "normal not outward at node " + std::to_string(k));
    F.align[k] = align;

    // second fundamental form A_ij = -g(nu, dd y_ij + Gamma(y)(e_i, e_j))
    const auto gamma_amb = chart.christoffel(y);
    auto covar2 = [&](const Vec3& ydd, const Vec3& u, const Vec3& v) {
      Vec3 d = ydd;
      for (int a = 0; a < 3; ++a) d[a] += u.dot(gamma_amb[a] * v);
      return d;
    };
    const Vec3 D11 = covar2(F.y11[k], e1, e1);
    const Vec3 D12 = covar2(F.y12[k], e1, e2);
    const Vec3 D22 = covar2(F.y22[k], e2, e2);
    Mat2 A;
    A(0, 0) = -nu.dot(g * D11);
    A(0, 1) = A(1, 0) = -nu.dot(g * D12);
    A(1, 1) = -nu.dot(g * D22);
    F.A[k] = A;
    const double H = (gi * A).trace();
    F.H[k] = H;
    F.Aring[k] = A - 0.5 * H * gam;

    // ambient curvature restrictions
    Mat3 ric;
    double sc;
    chart.ricci(y, ric, sc);
    F.ric[k] = ric;
    F.sc[k] = sc;
    F.ric_nn[k] = nu.dot(ric * nu);
    F.w1form[k] = Vec2(nu.dot(ric * e1), nu.dot(ric * e2));
    Mat2 T;
    T(0, 0) = e1.dot(ric * e1);
    T(0, 1) = T(1, 0) = e1.dot(ric * e2);
    T(1, 1) = e2.dot(ric * e2);
    F.T[k] = T;
    F.Tring[k] = T - 0.5 * (sc - F.ric_nn[k]) * gam;

    // surface Christoffels from d_k gamma_ij assembled out of ambient dg and dd y
    const auto dg = chart.dmetric(y);
    auto dg_along = [&](const Vec3& u) {
      Mat3 m = Mat3::Zero();
      for (int c = 0; c < 3; ++c) m += u[c] * dg[c];
      return m;
    };
    const Mat3 dg1 = dg_along(e1);
    const Mat3 dg2 = dg_along(e2);
    const Vec3 es[2] = {e1, e2};
    const Vec3 ydd[2][2] = {{F.y11[k], F.y12[k]}, {F.y12[k], F.y22[k]}};
    const Mat3 dgs[2] = {dg1, dg2};
    double dgam[2][2][2];  // d_k gamma_ij
    for (int kk = 0; kk < 2; ++kk)
      for (int ii = 0; ii < 2; ++ii)
        for (int jj = 0; jj < 2; ++jj)
          dgam[kk][ii][jj] = es[ii].dot(dgs[kk] * es[jj]) + (g * ydd[kk][ii]).dot(es[jj]) +
                             es[ii].dot(g * ydd[kk][jj]);
    for (int kk = 0; kk < 2; ++kk)
      for (int ii = 0; ii < 2; ++ii)
        for (int jj = 0; jj < 2; ++jj) {
          double s = 0.0;
          for (int ll = 0; ll < 2; ++ll) s += gi(kk, ll) * (dgam[ii][ll][jj] + dgam[jj][ii][ll] - dgam[ll][ii][jj]);
          (kk == 0 ? F.Gamma2_1[k] : F.Gamma2_2[k])(ii, jj) = 0.5 * s;
        }
  }
  F.area = area;
  F.area_radius = std::sqrt(area / (4.0 * pi));
  return F;
}

double integrate(const GeometryFields& fields, const SphericalGrid& grid, const std::vector<double>& f) {
  double s = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) s += grid.quad_weight(k) * fields.dmu[k] * f[k];
  return s;
}

}  // namespace wlm

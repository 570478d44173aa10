#include "metric.hpp"

#include <cmath>

#include <json.hpp>

#include "metric_json.hpp"

namespace wlm {

std::array<Mat3, 3> Chart::christoffel(const Vec3& y) const {
  const Mat3 g = metric(y);
  const Mat3 ginv = g.inverse();
  const auto dg = dmetric(y);
  std::array<Mat3, 3> gamma;
  for (int m = 0; m < 3; ++m) gamma[m].setZero();
  for (int m = 0; m < 3; ++m)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int q = 0; q < 3; ++q) s += ginv(m, q) * (dg[b](c, q) + dg[c](b, q) - dg[q](b, c));
        gamma[m](b, c) = 0.5 * s;
      }
  return gamma;
}

std::array<std::array<Mat3, 3>, 3> Chart::dchristoffel(const Vec3& y) const {
  const Mat3 g = metric(y);
  const Mat3 ginv = g.inverse();
  const auto dg = dmetric(y);
  const auto ddg = ddmetric(y);
  // d_a g^{ms} = -g^{mp} d_a g_{pq} g^{qs}
  std::array<Mat3, 3> dginv;
  for (int a = 0; a < 3; ++a) dginv[a] = -ginv * dg[a] * ginv;

  std::array<std::array<Mat3, 3>, 3> dgamma;
  for (int a = 0; a < 3; ++a)
    for (int m = 0; m < 3; ++m) {
      dgamma[a][m].setZero();
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) {
          double s = 0.0;
          for (int q = 0; q < 3; ++q) {
            s += dginv[a](m, q) * (dg[b](c, q) + dg[c](b, q) - dg[q](b, c));
            s += ginv(m, q) * (ddg[a][b](c, q) + ddg[a][c](b, q) - ddg[a][q](b, c));
          }
          dgamma[a][m](b, c) = 0.5 * s;
        }
    }
  return dgamma;
}

CurvatureAtPoint Chart::assemble_curvature(const Vec3& y) const {
  require_inside(y);
  CurvatureAtPoint cv;
  cv.y = y;
  const Mat3 g = metric(y);
  const Mat3 ginv = g.inverse();
  const auto gamma = christoffel(y);
  const auto dgamma = dchristoffel(y);

  // Rm^m_{abc} = d_a Gamma^m_bc - d_b Gamma^m_ac + Gamma^m_ap Gamma^p_bc - Gamma^m_bp Gamma^p_ac
  double rm_up[3][3][3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int m = 0; m < 3; ++m) {
          double s = dgamma[a][m](b, c) - dgamma[b][m](a, c);
          for (int p = 0; p < 3; ++p) s += gamma[m](a, p) * gamma[p](b, c) - gamma[m](b, p) * gamma[p](a, c);
          rm_up[m][a][b][c] = s;
        }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int n = 0; n < 3; ++n) {
          double s = 0.0;
          for (int m = 0; m < 3; ++m) s += g(n, m) * rm_up[m][a][b][c];
          cv.rm_at(a, b, c, n) = s;
        }
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int n = 0; n < 3; ++n) s += ginv(a, n) * cv.rm_at(a, b, c, n);
      cv.ric(b, c) = s;
    }
  cv.sc = (ginv * cv.ric).trace();
  cv.einstein = cv.ric - 0.5 * cv.sc * g;
  return cv;
}

CurvatureAtPoint Chart::curvature(const Vec3& y) const {
  CurvatureAtPoint cv = assemble_curvature(y);
  // No closed form for grad Sc / Hess Sc here: O(h^4) finite differences of the
  // assembled scalar curvature, h recorded in the result.
  const double h = 5e-3 * valid_radius_;
  auto sc_at = [&](const Vec3& p) {
    Mat3 r;
    double s;
    ricci(p, r, s);
    return s;
  };
  Vec3 dsc;
  Mat3 hess_coord;
  for (int a = 0; a < 3; ++a) {
    Vec3 ea = Vec3::Zero();
    ea[a] = 1.0;
    dsc[a] = (-sc_at(y + 2 * h * ea) + 8 * sc_at(y + h * ea) - 8 * sc_at(y - h * ea) + sc_at(y - 2 * h * ea)) / (12 * h);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      Vec3 ea = Vec3::Zero(), eb = Vec3::Zero();
      ea[a] = 1.0;
      eb[b] = 1.0;
      double v;
      if (a == b) {
        v = (-sc_at(y + 2 * h * ea) + 16 * sc_at(y + h * ea) - 30 * sc_at(y) + 16 * sc_at(y - h * ea) -
             sc_at(y - 2 * h * ea)) /
            (12 * h * h);
      } else {
        auto d1 = [&](const Vec3& p) {
          return (-sc_at(p + 2 * h * eb) + 8 * sc_at(p + h * eb) - 8 * sc_at(p - h * eb) + sc_at(p - 2 * h * eb)) /
                 (12 * h);
        };
        v = (-d1(y + 2 * h * ea) + 8 * d1(y + h * ea) - 8 * d1(y - h * ea) + d1(y - 2 * h * ea)) / (12 * h);
      }
      hess_coord(a, b) = v;
      hess_coord(b, a) = v;
    }
  cv.grad_sc = dsc;
  const auto gamma = christoffel(y);
  Mat3 hess = hess_coord;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) hess(a, b) -= gamma[c](a, b) * dsc[c];
  cv.hess_sc = hess;
  cv.fd_step = h;
  return cv;
}

void Chart::ricci(const Vec3& y, Mat3& ric_out, double& sc_out) const {
  CurvatureAtPoint cv = assemble_curvature(y);
  ric_out = cv.ric;
  sc_out = cv.sc;
}

void Chart::riemann(const Vec3& y, std::array<double, 81>& rm_out) const {
  rm_out = assemble_curvature(y).rm;
}

// ---------------------------------------------------------------- FlatChart

std::array<std::array<Mat3, 3>, 3> FlatChart::ddmetric(const Vec3&) const {
  std::array<std::array<Mat3, 3>, 3> r;
  for (auto& a : r)
    for (auto& m : a) m.setZero();
  return r;
}

std::array<std::array<Mat3, 3>, 3> FlatChart::dchristoffel(const Vec3&) const {
  std::array<std::array<Mat3, 3>, 3> r;
  for (auto& a : r)
    for (auto& m : a) m.setZero();
  return r;
}

CurvatureAtPoint FlatChart::curvature(const Vec3& y) const {
  require_inside(y);
  CurvatureAtPoint cv;
  cv.y = y;
  return cv;
}

// ----------------------------------------------------------- SpaceFormChart

SpaceFormChart::SpaceFormChart(double kappa, double valid_radius) : Chart(valid_radius), kappa_(kappa) {
  if (kappa > 0.0) {
    const double conjugate = M_PI / std::sqrt(kappa);
    if (valid_radius >= 0.95 * conjugate)
      fail(ErrorCode::config, "space form chart radius too close to the conjugate radius");
  }
}

void SpaceFormChart::sigma_eval(double s, double& sig, double& dsig, double& ddsig) const {
  // sigma(s) = sum_{k>=0} (-1)^k 2^{2k+3} kappa^{k+1} s^k / (2k+4)!
  sig = dsig = ddsig = 0.0;
  double a = 8.0 * kappa_ / 24.0;  // running coefficient a_k, a_0 = kappa/3
  double sk = 1.0;                 // s^k
  double sk1 = 0.0;                // s^(k-1)
  double sk2 = 0.0;                // s^(k-2)
  for (int k = 0; k < 48; ++k) {
    sig += a * sk;
    if (k >= 1) dsig += a * k * sk1;
    if (k >= 2) ddsig += a * k * (k - 1) * sk2;
    a *= -4.0 * kappa_ / ((2.0 * k + 5.0) * (2.0 * k + 6.0));
    sk2 = sk1;
    sk1 = sk;
    sk *= s;
    if (std::abs(a) * std::max(std::abs(sk), 1.0) < 1e-280) break;
  }
}

Mat3 SpaceFormChart::metric(const Vec3& y) const {
  const double s = y.squaredNorm();
  double sig, d1, d2;
  sigma_eval(s, sig, d1, d2);
  return Mat3::Identity() - sig * (s * Mat3::Identity() - y * y.transpose());
}

std::array<Mat3, 3> SpaceFormChart::dmetric(const Vec3& y) const {
  const double s = y.squaredNorm();
  double sig, dsig, d2;
  sigma_eval(s, sig, dsig, d2);
  const Mat3 q = s * Mat3::Identity() - y * y.transpose();  // r^2 delta - y y^T
  std::array<Mat3, 3> dg;
  for (int c = 0; c < 3; ++c) {
    Mat3 dq;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        dq(a, b) = 2.0 * y[c] * (a == b ? 1.0 : 0.0) - (a == c ? 1.0 : 0.0) * y[b] - y[a] * (b == c ? 1.0 : 0.0);
    dg[c] = -(2.0 * y[c] * dsig) * q - sig * dq;
  }
  return dg;
}

std::array<std::array<Mat3, 3>, 3> SpaceFormChart::ddmetric(const Vec3& y) const {
  const double s = y.squaredNorm();
  double sig, dsig, ddsig;
  sigma_eval(s, sig, dsig, ddsig);
  const Mat3 q = s * Mat3::Identity() - y * y.transpose();
  auto dq = [&](int c) {
    Mat3 m;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        m(a, b) = 2.0 * y[c] * (a == b ? 1.0 : 0.0) - (a == c ? 1.0 : 0.0) * y[b] - y[a] * (b == c ? 1.0 : 0.0);
    return m;
  };
  auto ddq = [&](int c, int d) {
    Mat3 m;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        m(a, b) = 2.0 * (c == d ? 1.0 : 0.0) * (a == b ? 1.0 : 0.0) - (a == c ? 1.0 : 0.0) * (b == d ? 1.0 : 0.0) -
                  (a == d ? 1.0 : 0.0) * (b == c ? 1.0 : 0.0);
    return m;
  };
  std::array<std::array<Mat3, 3>, 3> r;
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) {
      r[c][d] = -(4.0 * ddsig * y[c] * y[d] + 2.0 * dsig * (c == d ? 1.0 : 0.0)) * q -
                2.0 * dsig * (y[c] * dq(d) + y[d] * dq(c)) - sig * ddq(c, d);
    }
  return r;
}

CurvatureAtPoint SpaceFormChart::curvature(const Vec3& y) const {
  require_inside(y);
  CurvatureAtPoint cv;
  cv.y = y;
  const Mat3 g = metric(y);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int n = 0; n < 3; ++n) cv.rm_at(a, b, c, n) = kappa_ * (g(a, n) * g(b, c) - g(a, c) * g(b, n));
  cv.ric = 2.0 * kappa_ * g;
  cv.sc = 6.0 * kappa_;
  cv.einstein = cv.ric - 0.5 * cv.sc * g;
  // Sc is constant: grad and Hessian vanish identically.
  return cv;
}

void SpaceFormChart::ricci(const Vec3& y, Mat3& ric_out, double& sc_out) const {
  ric_out = 2.0 * kappa_ * metric(y);
  sc_out = 6.0 * kappa_;
}

void SpaceFormChart::riemann(const Vec3& y, std::array<double, 81>& rm_out) const {
  const Mat3 g = metric(y);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int n = 0; n < 3; ++n)
          rm_out[((a * 3 + b) * 3 + c) * 3 + n] = kappa_ * (g(a, n) * g(b, c) - g(a, c) * g(b, n));
}

// ----------------------------------------------------------- ConformalChart

ConformalChart::ConformalChart(Poly3 phi, double valid_radius) : Chart(valid_radius), phi_(std::move(phi)) {
  if (phi_.degree() > 4) fail(ErrorCode::config, "conformal factor degree exceeds 4");
  for (int a = 0; a < 3; ++a) dphi_[a] = phi_.derivative(a);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) ddphi_[a][b] = dphi_[a].derivative(b);
  Poly3 grad2;
  for (int a = 0; a < 3; ++a) grad2 = grad2 + dphi_[a] * dphi_[a];
  p_ = phi_.laplacian() * (-4.0) - grad2 * 2.0;
  for (int a = 0; a < 3; ++a) dp_[a] = p_.derivative(a);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) ddp_[a][b] = dp_[a].derivative(b);
}

void ConformalChart::phi_derivs(const Vec3& y, double& phi, Vec3& dphi, Mat3& ddphi) const {
  phi = phi_.eval(y);
  for (int a = 0; a < 3; ++a) dphi[a] = dphi_[a].eval(y);
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      ddphi(a, b) = ddphi_[a][b].eval(y);
      ddphi(b, a) = ddphi(a, b);
    }
}

Mat3 ConformalChart::metric(const Vec3& y) const { return std::exp(2.0 * phi_.eval(y)) * Mat3::Identity(); }

std::array<Mat3, 3> ConformalChart::dmetric(const Vec3& y) const {
  const double e = std::exp(2.0 * phi_.eval(y));
  std::array<Mat3, 3> dg;
  for (int c = 0; c < 3; ++c) dg[c] = 2.0 * dphi_[c].eval(y) * e * Mat3::Identity();
  return dg;
}

std::array<std::array<Mat3, 3>, 3> ConformalChart::ddmetric(const Vec3& y) const {
  double phi;
  Vec3 dphi;
  Mat3 ddphi;
  phi_derivs(y, phi, dphi, ddphi);
  const double e = std::exp(2.0 * phi);
  std::array<std::array<Mat3, 3>, 3> r;
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) r[c][d] = (4.0 * dphi[c] * dphi[d] + 2.0 * ddphi(c, d)) * e * Mat3::Identity();
  return r;
}

std::array<Mat3, 3> ConformalChart::christoffel(const Vec3& y) const {
  Vec3 dphi;
  for (int a = 0; a < 3; ++a) dphi[a] = dphi_[a].eval(y);
  std::array<Mat3, 3> gamma;
  for (int m = 0; m < 3; ++m)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        gamma[m](b, c) = (m == c ? dphi[b] : 0.0) + (m == b ? dphi[c] : 0.0) - (b == c ? dphi[m] : 0.0);
  return gamma;
}

std::array<std::array<Mat3, 3>, 3> ConformalChart::dchristoffel(const Vec3& y) const {
  Mat3 ddphi;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) ddphi(a, b) = ddphi_[a][b].eval(y);
  std::array<std::array<Mat3, 3>, 3> r;
  for (int a = 0; a < 3; ++a)
    for (int m = 0; m < 3; ++m)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          r[a][m](b, c) =
              (m == c ? ddphi(b, a) : 0.0) + (m == b ? ddphi(c, a) : 0.0) - (b == c ? ddphi(m, a) : 0.0);
  return r;
}

double ConformalChart::scalar_curvature(const Vec3& y) const {
  return std::exp(-2.0 * phi_.eval(y)) * p_.eval(y);
}

void ConformalChart::ricci(const Vec3& y, Mat3& ric_out, double& sc_out) const {
  double phi;
  Vec3 dphi;
  Mat3 ddphi;
  phi_derivs(y, phi, dphi, ddphi);
  const double lap = ddphi.trace();
  const double grad2 = dphi.squaredNorm();
  ric_out = -ddphi + dphi * dphi.transpose() - (lap + grad2) * Mat3::Identity();
  sc_out = std::exp(-2.0 * phi) * (-4.0 * lap - 2.0 * grad2);
}

CurvatureAtPoint ConformalChart::curvature(const Vec3& y) const {
  require_inside(y);
  CurvatureAtPoint cv = assemble_curvature(y);
  double phi;
  Vec3 dphi;
  Mat3 ddphi;
  phi_derivs(y, phi, dphi, ddphi);
  const double e = std::exp(-2.0 * phi);
  const double p = p_.eval(y);
  Vec3 dp;
  Mat3 ddp;
  for (int a = 0; a < 3; ++a) dp[a] = dp_[a].eval(y);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) ddp(a, b) = ddp_[a][b].eval(y);

  cv.sc = e * p;
  cv.grad_sc = e * (dp - 2.0 * p * dphi);
  Mat3 hess_coord = e * (ddp - 2.0 * dp * dphi.transpose() - 2.0 * dphi * dp.transpose() - 2.0 * p * ddphi +
                         4.0 * p * dphi * dphi.transpose());
  const auto gamma = christoffel(y);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) hess_coord(a, b) -= gamma[c](a, b) * cv.grad_sc[c];
  cv.hess_sc = hess_coord;
  cv.einstein = cv.ric - 0.5 * cv.sc * metric(y);
  return cv;
}

// ------------------------------------------------------------------- JSON

std::shared_ptr<Chart> chart_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::config, std::string("metric block is not valid JSON: ") + e.what());
  }
  return chart_from_json_object(j);
}

std::shared_ptr<Chart> chart_from_json_object(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::config, "metric block must be a JSON object");
  static const std::array<std::string, 4> allowed = {"kind", "valid_radius", "kappa", "phi"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || (it.key() == k);
    if (!ok) fail(ErrorCode::config, "metric block: unknown key '" + it.key() + "'");
  }
  if (!j.contains("kind") || !j["kind"].is_string()) fail(ErrorCode::config, "metric block: missing 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  const double radius = j.value("valid_radius", 1.0);
  if (kind == "flat") {
    if (j.contains("kappa") || j.contains("phi")) fail(ErrorCode::config, "metric block: flat takes no parameters");
    return std::make_shared<FlatChart>(radius);
  }
  if (kind == "space_form") {
    if (!j.contains("kappa")) fail(ErrorCode::config, "metric block: space_form requires 'kappa'");
    if (j.contains("phi")) fail(ErrorCode::config, "metric block: space_form takes no 'phi'");
    return std::make_shared<SpaceFormChart>(j["kappa"].get<double>(), radius);
  }
  if (kind == "conformal") {
    if (j.contains("kappa")) fail(ErrorCode::config, "metric block: conformal takes no 'kappa'");
    Poly3 phi;
    if (j.contains("phi")) {
      if (!j["phi"].is_array()) fail(ErrorCode::config, "metric block: 'phi' must be a list of monomials");
      for (const auto& t : j["phi"]) {
        if (!t.is_object() || !t.contains("exp") || !t.contains("coeff") || t.size() != 2)
          fail(ErrorCode::config, "metric block: phi entries must be {exp:[i,j,k], coeff:c}");
        auto e = t["exp"];
        if (!e.is_array() || e.size() != 3) fail(ErrorCode::config, "metric block: phi exponent must have 3 entries");
        phi.add_term(e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), t["coeff"].get<double>());
      }
    }
    return std::make_shared<ConformalChart>(std::move(phi), radius);
  }
  fail(ErrorCode::config, "metric block: unknown kind '" + kind + "'");
}

std::string chart_to_json(const Chart& chart) {
  nlohmann::json j;
  j["valid_radius"] = chart.valid_radius();
  switch (chart.kind()) {
    case MetricKind::flat:
      j["kind"] = "flat";
      break;
    case MetricKind::space_form:
      j["kind"] = "space_form";
      j["kappa"] = static_cast<const SpaceFormChart&>(chart).kappa();
      break;
    case MetricKind::conformal: {
      j["kind"] = "conformal";
      auto arr = nlohmann::json::array();
      for (const auto& [e, c] : static_cast<const ConformalChart&>(chart).phi().terms()) {
        arr.push_back({{"exp", {e[0], e[1], e[2]}}, {"coeff", c}});
      }
      j["phi"] = arr;
      break;
    }
    case MetricKind::derived:
      j["kind"] = "derived";
      break;
  }
  return j.dump();
}

}  // namespace wlm

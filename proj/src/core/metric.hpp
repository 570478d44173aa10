#pragma once

#include <array>
#include <memory>
#include <string>

#include "errors.hpp"
#include "poly3.hpp"

namespace wlm {

/// Curvature data assembled at a single chart point.
/// Sign convention: Rm_{abcn} = <(D_a D_b - D_b D_a) e_c, e_n>, Ric_{bc} = g^{an} Rm_{abcn}.
struct CurvatureAtPoint {
  Vec3 y = Vec3::Zero();
  std::array<double, 81> rm{};  // Rm_{abcn}, index ((a*3+b)*3+c)*3+n
  Mat3 ric = Mat3::Zero();
  double sc = 0.0;
  Vec3 grad_sc = Vec3::Zero();  // coordinate partials d_a Sc
  Mat3 hess_sc = Mat3::Zero();  // covariant Hessian of Sc
  Mat3 einstein = Mat3::Zero();
  double fd_step = 0.0;  // 0 when grad/hess are analytic, else the FD step used

  double rm_at(int a, int b, int c, int n) const { return rm[((a * 3 + b) * 3 + c) * 3 + n]; }
  double& rm_at(int a, int b, int c, int n) { return rm[((a * 3 + b) * 3 + c) * 3 + n]; }
};

enum class MetricKind { flat, space_form, conformal, derived };

/// An analytic Riemannian 3-metric on the coordinate ball |y| < valid_radius.
/// All evaluators are closed-form for the builtin kinds; derived (normal-coordinate)
/// charts tabulate geodesic Jacobians and differentiate them by finite differences.
class Chart {
public:
  virtual ~Chart() = default;

  virtual MetricKind kind() const = 0;
  double valid_radius() const { return valid_radius_; }

  void require_inside(const Vec3& y) const {
    if (y.norm() >= valid_radius_)
      fail(ErrorCode::domain, "point at radius " + std::to_string(y.norm()) +
                                  " outside chart ball of radius " + std::to_string(valid_radius_));
  }

  virtual Mat3 metric(const Vec3& y) const = 0;
  /// dg[c](a,b) = d_c g_ab
  virtual std::array<Mat3, 3> dmetric(const Vec3& y) const = 0;
  /// ddg[c][d](a,b) = d_c d_d g_ab
  virtual std::array<std::array<Mat3, 3>, 3> ddmetric(const Vec3& y) const = 0;

  /// Gamma[m](b,c) = Gamma^m_bc.  Generic assembly from g and dg.
  virtual std::array<Mat3, 3> christoffel(const Vec3& y) const;
  /// dGamma[a][m](b,c) = d_a Gamma^m_bc.
  virtual std::array<std::array<Mat3, 3>, 3> dchristoffel(const Vec3& y) const;

  /// Full curvature package; generic assembly unless a closed form exists.
  virtual CurvatureAtPoint curvature(const Vec3& y) const;

  /// Lean path for per-node loops: Ricci tensor and scalar curvature only.
  virtual void ricci(const Vec3& y, Mat3& ric_out, double& sc_out) const;

  /// Rm_{abcn} contracted against four vectors (lean path for Simons terms).
  virtual void riemann(const Vec3& y, std::array<double, 81>& rm_out) const;

protected:
  explicit Chart(double valid_radius) : valid_radius_(valid_radius) {
    if (valid_radius <= 0.0) fail(ErrorCode::config, "valid_radius must be positive");
  }

  // generic curvature assembly from the metric evaluators
  CurvatureAtPoint assemble_curvature(const Vec3& y) const;

  double valid_radius_;
};

class FlatChart final : public Chart {
public:
  explicit FlatChart(double valid_radius) : Chart(valid_radius) {}
  MetricKind kind() const override { return MetricKind::flat; }
  Mat3 metric(const Vec3&) const override { return Mat3::Identity(); }
  std::array<Mat3, 3> dmetric(const Vec3&) const override { return {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()}; }
  std::array<std::array<Mat3, 3>, 3> ddmetric(const Vec3&) const override;
  std::array<Mat3, 3> christoffel(const Vec3&) const override { return {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()}; }
  std::array<std::array<Mat3, 3>, 3> dchristoffel(const Vec3&) const override;
  CurvatureAtPoint curvature(const Vec3& y) const override;
  void ricci(const Vec3&, Mat3& ric_out, double& sc_out) const override {
    ric_out.setZero();
    sc_out = 0.0;
  }
  void riemann(const Vec3&, std::array<double, 81>& rm_out) const override { rm_out.fill(0.0); }
};

/// Constant sectional curvature kappa in normal coordinates:
///   g = delta - sigma(r^2) (r^2 delta - y y^T),  sigma(s) = (1 - sn_kappa(r)^2/r^2)/r^2.
/// sigma and its derivatives are evaluated by a globally convergent even power series,
/// which avoids the removable singularity at r = 0 altogether.
class SpaceFormChart final : public Chart {
public:
  SpaceFormChart(double kappa, double valid_radius);
  MetricKind kind() const override { return MetricKind::space_form; }
  double kappa() const { return kappa_; }
  Mat3 metric(const Vec3& y) const override;
  std::array<Mat3, 3> dmetric(const Vec3& y) const override;
  std::array<std::array<Mat3, 3>, 3> ddmetric(const Vec3& y) const override;
  CurvatureAtPoint curvature(const Vec3& y) const override;
  void ricci(const Vec3& y, Mat3& ric_out, double& sc_out) const override;
  void riemann(const Vec3& y, std::array<double, 81>& rm_out) const override;

private:
  // sigma(s), sigma'(s), sigma''(s) with s = r^2
  void sigma_eval(double s, double& sig, double& dsig, double& ddsig) const;
  double kappa_;
};

/// Conformally flat metric g = e^{2 phi} delta with polynomial phi, deg(phi) <= 4.
/// Scalar curvature and its derivatives come from symbolic differentiation of
/// Sc = e^{-2 phi} (-4 Lap phi - 2 |grad phi|^2).
class ConformalChart final : public Chart {
public:
  ConformalChart(Poly3 phi, double valid_radius);
  MetricKind kind() const override { return MetricKind::conformal; }
  const Poly3& phi() const { return phi_; }
  Mat3 metric(const Vec3& y) const override;
  std::array<Mat3, 3> dmetric(const Vec3& y) const override;
  std::array<std::array<Mat3, 3>, 3> ddmetric(const Vec3& y) const override;
  std::array<Mat3, 3> christoffel(const Vec3& y) const override;
  std::array<std::array<Mat3, 3>, 3> dchristoffel(const Vec3& y) const override;
  CurvatureAtPoint curvature(const Vec3& y) const override;
  void ricci(const Vec3& y, Mat3& ric_out, double& sc_out) const override;

  double scalar_curvature(const Vec3& y) const;  // closed form, used as its own oracle in tests

private:
  void phi_derivs(const Vec3& y, double& phi, Vec3& dphi, Mat3& ddphi) const;

  Poly3 phi_;
  Poly3 dphi_[3];
  Poly3 ddphi_[3][3];
  Poly3 p_;  // P = -4 Lap phi - 2 |grad phi|^2,   Sc = e^{-2 phi} P
  Poly3 dp_[3];
  Poly3 ddp_[3][3];
};

/// Parse a metric config block:
///   {"kind":"flat"|"space_form"|"conformal", "valid_radius":r, "kappa":k,
///    "phi":[{"exp":[i,j,k],"coeff":c}, ...]}
/// Unknown keys are rejected.
std::shared_ptr<Chart> chart_from_json(const std::string& json_text);
std::string chart_to_json(const Chart& chart);

}  // namespace wlm

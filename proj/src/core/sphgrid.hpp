#pragma once

#include <vector>

#include "errors.hpp"

namespace wlm {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n, machine precision).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Pseudospectral grid on S^2: Gauss-Legendre colatitudes x uniform longitudes,
/// real spherical-harmonic basis up to degree L, synthesis/analysis and analytic
/// first/second angular derivatives of synthesized fields.
///
/// Real basis convention (orthonormal, no Condon-Shortley phase):
///   Y_{l,0}  = Pbar_{l,0}(theta)
///   Y_{l,m}  = sqrt(2) Pbar_{l,m}(theta) cos(m phi),  m > 0
///   Y_{l,-m} = sqrt(2) Pbar_{l,m}(theta) sin(m phi),  m > 0
/// Coefficients stored in (l, m) lexicographic order: index l^2 + l + m.
class SphericalGrid {
public:
  SphericalGrid(int n_theta, int n_phi, int max_degree);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int degree() const { return L_; }
  int n_nodes() const { return n_theta_ * n_phi_; }
  int n_coeff() const { return (L_ + 1) * (L_ + 1); }

  double theta(int i) const { return theta_[i]; }
  double phi(int j) const { return phi_[j]; }
  double node_theta(int k) const { return theta_[k / n_phi_]; }
  double node_phi(int k) const { return phi_[k % n_phi_]; }
  double sin_theta(int i) const { return sin_theta_[i]; }
  /// solid-angle quadrature weight of node k (sum over k = 4 pi)
  double quad_weight(int k) const { return w_theta_[k / n_phi_] * w_phi_; }

  /// antipodal node index (grid is symmetric under the antipodal map)
  int antipode(int k) const;

  void analysis(const std::vector<double>& f, std::vector<double>& coeff) const;
  void synthesis(const std::vector<double>& coeff, std::vector<double>& f) const;

  /// Synthesis with angular derivatives; null outputs are skipped.
  void synthesis_derivs(const std::vector<double>& coeff, std::vector<double>* f, std::vector<double>* f_t,
                        std::vector<double>* f_p, std::vector<double>* f_tt, std::vector<double>* f_tp,
                        std::vector<double>* f_pp) const;

  /// Round-sphere spectral Laplacian: coefficient-wise multiplication by -l(l+1).
  void laplace_sphere(const std::vector<double>& coeff_in, std::vector<double>& coeff_out) const;

  /// Evaluate a coefficient vector at an arbitrary point (for scattered fitting and containment tests).
  double eval_point(const std::vector<double>& coeff, double theta, double phi) const;

  /// Row of basis values Y_n(theta, phi), n = 0..n_coeff-1.
  void basis_row(double theta, double phi, double* row) const;

private:
  int tri(int l, int m) const { return m * (L_ + 1) - m * (m - 1) / 2 + (l - m); }  // m-major triangle index
  void build_tables();

  int n_theta_, n_phi_, L_;
  std::vector<double> theta_, cos_theta_, sin_theta_, w_theta_, phi_;
  double w_phi_ = 0.0;
  // Pbar tables and theta-derivatives, layout [tri(l,m) * n_theta + i]
  std::vector<double> plm_, dplm_, ddplm_;
  // trig tables, layout [m * n_phi + j]
  std::vector<double> cosm_, sinm_;
};

/// Pbar_{l,m}(theta) for all l <= L at one point; out has the m-major triangle layout of tri().
void legendre_point(int L, double ct, double st, std::vector<double>& out);

}  // namespace wlm

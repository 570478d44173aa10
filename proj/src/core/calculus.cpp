#include "calculus.hpp"

#include <cmath>

namespace wlm {

namespace {

struct SpectralDerivs {
  std::vector<double> ft, fp, ftt, ftp, fpp;
};

void spectral(const SphericalGrid& grid, const std::vector<double>& f, SpectralDerivs& d, bool second) {
  std::vector<double> coeff;
  grid.analysis(f, coeff);
  grid.synthesis_derivs(coeff, nullptr, &d.ft, &d.fp, second ? &d.ftt : nullptr, second ? &d.ftp : nullptr,
                        second ? &d.fpp : nullptr);
}

// ambient covariant components of e_i lowered with g: (g e_i)_alpha
inline Vec3 flat_e(const GeometryFields& F, int k, int i) { return F.g[k] * (i == 0 ? F.e1[k] : F.e2[k]); }

}  // namespace

std::vector<Vec2> scalar_gradient(const GeometryFields& fields, const SphericalGrid& grid,
                                  const std::vector<double>& f) {
  SpectralDerivs d;
  spectral(grid, f, d, false);
  std::vector<Vec2> out(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) out[k] = Vec2(d.ft[k], d.fp[k]);
  return out;
}

std::vector<Mat2> scalar_hessian(const GeometryFields& fields, const SphericalGrid& grid,
                                 const std::vector<double>& f, std::vector<Vec2>* grad_out) {
  SpectralDerivs d;
  spectral(grid, f, d, true);
  std::vector<Mat2> out(fields.n_nodes());
  if (grad_out) grad_out->resize(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) {
    const Vec2 grad(d.ft[k], d.fp[k]);
    if (grad_out) (*grad_out)[k] = grad;
    Mat2 h;
    h(0, 0) = d.ftt[k];
    h(0, 1) = h(1, 0) = d.ftp[k];
    h(1, 1) = d.fpp[k];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        h(i, j) -= fields.Gamma2_1[k](i, j) * grad[0] + fields.Gamma2_2[k](i, j) * grad[1];
    out[k] = h;
  }
  return out;
}

std::vector<double> laplace_beltrami(const GeometryFields& fields, const SphericalGrid& grid,
                                     const std::vector<double>& f) {
  const auto hess = scalar_hessian(fields, grid, f);
  std::vector<double> out(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) out[k] = (fields.gamma_inv[k] * hess[k]).trace();
  return out;
}

std::vector<Mat2> covector_derivative(const GeometryFields& fields, const SphericalGrid& grid,
                                      const std::vector<Vec2>& sigma) {
  const int nn = fields.n_nodes();
  // ambient components sigma_hat_alpha = sigma_i gamma^{ij} (g e_j)_alpha  (smooth scalars on S^2)
  std::array<std::vector<double>, 3> amb;
  for (auto& a : amb) a.resize(nn);
  for (int k = 0; k < nn; ++k) {
    const Vec2 up = fields.gamma_inv[k] * sigma[k];
    const Vec3 v = flat_e(fields, k, 0) * up[0] + flat_e(fields, k, 1) * up[1];
    for (int a = 0; a < 3; ++a) amb[a][k] = v[a];
  }
  std::array<SpectralDerivs, 3> damb;
  for (int a = 0; a < 3; ++a) spectral(grid, amb[a], damb[a], false);

  std::vector<Mat2> out(nn);
  for (int k = 0; k < nn; ++k) {
    const Vec3 es[2] = {fields.e1[k], fields.e2[k]};
    const Vec3 ydd[2][2] = {{fields.y11[k], fields.y12[k]}, {fields.y12[k], fields.y22[k]}};
    Vec3 hat;
    for (int a = 0; a < 3; ++a) hat[a] = amb[a][k];
    Mat2 m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Vec3 dhat;
        for (int a = 0; a < 3; ++a) dhat[a] = (i == 0 ? damb[a].ft[k] : damb[a].fp[k]);
        double v = dhat.dot(es[j]) + hat.dot(ydd[i][j]);
        v -= fields.Gamma2_1[k](i, j) * sigma[k][0] + fields.Gamma2_2[k](i, j) * sigma[k][1];
        m(i, j) = v;
      }
    out[k] = m;
  }
  return out;
}

std::vector<std::array<Mat2, 2>> tensor_derivative(const GeometryFields& fields, const SphericalGrid& grid,
                                                   const std::vector<Mat2>& B) {
  const int nn = fields.n_nodes();
  // push to ambient: Bhat_{ab} = B_kl gamma^{ki} gamma^{lj} (g e_i)_a (g e_j)_b, six smooth scalars
  std::array<std::vector<double>, 6> amb;  // (00,01,02,11,12,22)
  for (auto& a : amb) a.resize(nn);
  auto sym_idx = [](int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == 0) return b;          // 0,1,2
    if (a == 1) return 2 + b;      // 3,4
    return 5;                      // 2,2
  };
  for (int k = 0; k < nn; ++k) {
    const Mat2 up = fields.gamma_inv[k] * B[k] * fields.gamma_inv[k];  // B^{ij}
    const Vec3 f0 = flat_e(fields, k, 0), f1 = flat_e(fields, k, 1);
    Mat3 hat = Mat3::Zero();
    hat += up(0, 0) * f0 * f0.transpose();
    hat += up(0, 1) * (f0 * f1.transpose() + f1 * f0.transpose());
    hat += up(1, 1) * f1 * f1.transpose();
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) amb[sym_idx(a, b)][k] = hat(a, b);
  }
  std::array<SpectralDerivs, 6> damb;
  for (int c = 0; c < 6; ++c) spectral(grid, amb[c], damb[c], false);

  std::vector<std::array<Mat2, 2>> out(nn);
  for (int k = 0; k < nn; ++k) {
    const Vec3 es[2] = {fields.e1[k], fields.e2[k]};
    const Vec3 ydd[2][2] = {{fields.y11[k], fields.y12[k]}, {fields.y12[k], fields.y22[k]}};
    Mat3 hat;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) hat(a, b) = amb[sym_idx(a, b)][k];
    const Mat2* G2[2] = {&fields.Gamma2_1[k], &fields.Gamma2_2[k]};
    for (int c = 0; c < 2; ++c) {
      Mat3 dhat;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) dhat(a, b) = (c == 0 ? damb[sym_idx(a, b)].ft[k] : damb[sym_idx(a, b)].fp[k]);
      Mat2 m;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double v = es[i].dot(dhat * es[j]) + ydd[c][i].dot(hat * es[j]) + es[i].dot(hat * ydd[c][j]);
          for (int l = 0; l < 2; ++l)
            v -= (*G2[l])(c, i) * B[k](l, j) + (*G2[l])(c, j) * B[k](i, l);
          m(i, j) = v;
        }
      out[k][c] = m;
    }
  }
  return out;
}

std::vector<Vec2> tensor_divergence(const GeometryFields& fields, const SphericalGrid& grid,
                                    const std::vector<Mat2>& B) {
  const auto C = tensor_derivative(fields, grid, B);
  std::vector<Vec2> out(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) {
    const Mat2& gi = fields.gamma_inv[k];
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int c = 0; c < 2; ++c) s += gi(i, c) * C[k][c](i, j);
      out[k][j] = s;
    }
  }
  return out;
}

std::vector<Mat2> tensor_laplacian(const GeometryFields& fields, const SphericalGrid& grid,
                                   const std::vector<Mat2>& B) {
  const int nn = fields.n_nodes();
  const auto C = tensor_derivative(fields, grid, B);  // C[k][c](i,j) = nabla_c B_ij

  // push the 3-tensor to ambient components (sym in the last pair): 18 smooth scalars
  std::array<std::vector<double>, 18> amb;
  for (auto& a : amb) a.resize(nn);
  auto sym_idx = [](int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == 0) return b;
    if (a == 1) return 2 + b;
    return 5;
  };
  for (int k = 0; k < nn; ++k) {
    const Mat2& gi = fields.gamma_inv[k];
    const Vec3 f[2] = {flat_e(fields, k, 0), flat_e(fields, k, 1)};
    // C^{c i j} = gamma^{cc'} gamma^{ii'} gamma^{jj'} C_{c'i'j'}
    double up[2][2][2];
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double s = 0.0;
          for (int c2 = 0; c2 < 2; ++c2)
            for (int i2 = 0; i2 < 2; ++i2)
              for (int j2 = 0; j2 < 2; ++j2) s += gi(c, c2) * gi(i, i2) * gi(j, j2) * C[k][c2](i2, j2);
          up[c][i][j] = s;
        }
    for (int g3 = 0; g3 < 3; ++g3)
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
          double s = 0.0;
          for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 2; ++i)
              for (int j = 0; j < 2; ++j) s += up[c][i][j] * f[c][g3] * f[i][a] * f[j][b];
          amb[g3 * 6 + sym_idx(a, b)][k] = s;
        }
  }
  std::array<SpectralDerivs, 18> damb;
  for (int c = 0; c < 18; ++c) spectral(grid, amb[c], damb[c], false);

  std::vector<Mat2> out(nn);
  for (int k = 0; k < nn; ++k) {
    const Vec3 es[2] = {fields.e1[k], fields.e2[k]};
    const Vec3 ydd[2][2] = {{fields.y11[k], fields.y12[k]}, {fields.y12[k], fields.y22[k]}};
    const Mat2* G2[2] = {&fields.Gamma2_1[k], &fields.Gamma2_2[k]};
    const Mat2& gi = fields.gamma_inv[k];

    // hat tensor and its theta/phi derivatives at the node
    double hat[3][3][3], dhat[2][3][3][3];
    for (int g3 = 0; g3 < 3; ++g3)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int idx = g3 * 6 + sym_idx(a, b);
          hat[g3][a][b] = amb[idx][k];
          dhat[0][g3][a][b] = damb[idx].ft[k];
          dhat[1][g3][a][b] = damb[idx].fp[k];
        }
    auto contract = [&](const double t[3][3][3], const Vec3& u, const Vec3& v, const Vec3& w) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) s += t[a][b][c] * u[a] * v[b] * w[c];
      return s;
    };

    Mat2 lap = Mat2::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l)
          for (int c = 0; c < 2; ++c) {
            // nabla_l C_cij
            double v = contract(dhat[l], es[c], es[i], es[j]) + contract(hat, ydd[l][c], es[i], es[j]) +
                       contract(hat, es[c], ydd[l][i], es[j]) + contract(hat, es[c], es[i], ydd[l][j]);
            for (int m = 0; m < 2; ++m)
              v -= (*G2[m])(l, c) * C[k][m](i, j) + (*G2[m])(l, i) * C[k][c](m, j) +
                   (*G2[m])(l, j) * C[k][c](i, m);
            s += gi(l, c) * v;
          }
        lap(i, j) = s;
      }
    out[k] = 0.5 * (lap + lap.transpose());
  }
  return out;
}

std::vector<Mat2> simons_defect(const Chart& chart, const GeometryFields& fields, const SphericalGrid& grid) {
  const int nn = fields.n_nodes();
  const auto lapA = tensor_laplacian(fields, grid, fields.Aring);
  std::vector<Vec2> gradH;
  const auto hessH = scalar_hessian(fields, grid, fields.H, &gradH);
  const auto dw = covector_derivative(fields, grid, fields.w1form);

  std::vector<Mat2> out(nn);
  std::array<double, 81> rm{};
  for (int k = 0; k < nn; ++k) {
    const Mat2& gam = fields.gamma[k];
    const Mat2& gi = fields.gamma_inv[k];
    const Mat2& Ar = fields.Aring[k];
    const double H = fields.H[k];
    const double a2 = fields.tensor_norm2(k, Ar);

    const Mat2 hess0 = hessH[k] - 0.5 * (gi * hessH[k]).trace() * gam;
    const Mat2 AgA = Ar * gi * Ar;

    chart.riemann(fields.y[k], rm);
    const Vec3 es[2] = {fields.e1[k], fields.e2[k]};
    double rm4[2][2][2][2];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            double s = 0.0;
            for (int p = 0; p < 3; ++p)
              for (int q = 0; q < 3; ++q)
                for (int r = 0; r < 3; ++r)
                  for (int t = 0; t < 3; ++t)
                    s += rm[((p * 3 + q) * 3 + r) * 3 + t] * es[a][p] * es[b][q] * es[c][r] * es[d][t];
            rm4[a][b][c][d] = s;
          }
    const Mat2 Aup = gi * Ar;        // Aring^k_j = gamma^{ka} Aring_{aj}
    const Mat2 Aupup = gi * Ar * gi;  // Aring^{kl}
    Mat2 curv1 = Mat2::Zero(), curv2 = Mat2::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s1 = 0.0, s2 = 0.0;
        // Aring_j^k gamma^{lm} Rm_{likm}
        for (int kk = 0; kk < 2; ++kk)
          for (int l = 0; l < 2; ++l)
            for (int m = 0; m < 2; ++m) s1 += Aup(kk, j) * gi(l, m) * rm4[l][i][kk][m];
        // Aring^{kl} Rm_{ikjl}
        for (int kk = 0; kk < 2; ++kk)
          for (int l = 0; l < 2; ++l) s2 += Aupup(kk, l) * rm4[i][kk][j][l];
        curv1(i, j) = s1;
        curv2(i, j) = s2;
      }

    const Mat2 dws = 0.5 * (dw[k] + dw[k].transpose());
    const double divw = (gi * dw[k]).trace();

    Mat2 rhs = hess0 + H * AgA + 0.5 * H * H * Ar - a2 * Ar - 0.5 * H * a2 * gam + curv1 + curv2 +
               2.0 * dws - divw * gam;
    Mat2 res = lapA[k] - rhs;
    out[k] = 0.5 * (res + res.transpose());
  }
  return out;
}

double simons_residual(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  const GeometryFields fields = geometry(chart, surface, grid);
  const auto defect = simons_defect(chart, fields, grid);
  std::vector<double> norm2(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) norm2[k] = fields.tensor_norm2(k, defect[k]);
  return std::sqrt(integrate(fields, grid, norm2));
}

}  // namespace wlm

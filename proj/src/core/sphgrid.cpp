#include "sphgrid.hpp"

#include <cmath>
#include <numbers>

namespace wlm {

namespace {
constexpr double pi = std::numbers::pi;

// normalized Pbar recurrence coefficients
double coef_a(int l, int m) { return std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m)); }
double coef_b(int l, int m) {
  return std::sqrt(((2.0 * l + 1.0) * (double(l - 1) * (l - 1) - double(m) * m)) /
                   ((2.0 * l - 3.0) * (double(l) * l - double(m) * m)));
}
double coef_e(int l, int m) {
  return std::sqrt((double(l) * l - double(m) * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0));
}
}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, p1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one polished step
        p0 = 1.0;
        p1 = x;
        for (int l = 2; l <= n; ++l) {
          const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
          p0 = p1;
          p1 = p2;
        }
        break;
      }
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = -x;  // ascending order
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

void legendre_point(int L, double ct, double st, std::vector<double>& out) {
  out.assign((L + 1) * (L + 2) / 2, 0.0);
  auto tri = [L](int l, int m) { return m * (L + 1) - m * (m - 1) / 2 + (l - m); };
  double pmm = std::sqrt(1.0 / (4.0 * pi));
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st;
    out[tri(m, m)] = pmm;
    if (m + 1 <= L) out[tri(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * ct * pmm;
    for (int l = m + 2; l <= L; ++l)
      out[tri(l, m)] = coef_a(l, m) * ct * out[tri(l - 1, m)] - coef_b(l, m) * out[tri(l - 2, m)];
  }
}

SphericalGrid::SphericalGrid(int n_theta, int n_phi, int max_degree)
    : n_theta_(n_theta), n_phi_(n_phi), L_(max_degree) {
  if (L_ < 0 || n_theta_ < L_ + 1 || n_phi_ < 2 * L_ + 2 || n_phi_ % 2 != 0)
    fail(ErrorCode::config, "grid requires n_theta >= L+1 and even n_phi >= 2L+2");
  std::vector<double> x, w;
  gauss_legendre(n_theta_, x, w);
  theta_.resize(n_theta_);
  cos_theta_.resize(n_theta_);
  sin_theta_.resize(n_theta_);
  w_theta_.resize(n_theta_);
  for (int i = 0; i < n_theta_; ++i) {
    // descending colatitude ordering: theta_0 near the north pole
    cos_theta_[i] = x[n_theta_ - 1 - i];
    theta_[i] = std::acos(cos_theta_[i]);
    sin_theta_[i] = std::sin(theta_[i]);
    w_theta_[i] = w[n_theta_ - 1 - i];
  }
  phi_.resize(n_phi_);
  for (int j = 0; j < n_phi_; ++j) phi_[j] = 2.0 * pi * j / n_phi_;
  w_phi_ = 2.0 * pi / n_phi_;
  build_tables();
}

int SphericalGrid::antipode(int k) const {
  const int i = k / n_phi_, j = k % n_phi_;
  return (n_theta_ - 1 - i) * n_phi_ + (j + n_phi_ / 2) % n_phi_;
}

void SphericalGrid::build_tables() {
  const int ntri = (L_ + 1) * (L_ + 2) / 2;
  plm_.assign(static_cast<size_t>(ntri) * n_theta_, 0.0);
  dplm_.assign(plm_.size(), 0.0);
  ddplm_.assign(plm_.size(), 0.0);
  std::vector<double> col;
  for (int i = 0; i < n_theta_; ++i) {
    const double ct = cos_theta_[i], st = sin_theta_[i];
    legendre_point(L_, ct, st, col);
    for (int m = 0; m <= L_; ++m)
      for (int l = m; l <= L_; ++l) {
        const int t = tri(l, m);
        const double p = col[t];
        plm_[static_cast<size_t>(t) * n_theta_ + i] = p;
        // dPbar/dtheta = (l ct Pbar_lm - e_lm Pbar_{l-1,m}) / st
        double dp;
        if (l == m)
          dp = l * ct / st * p;  // Pbar_mm ~ st^m
        else
          dp = (l * ct * p - coef_e(l, m) * col[tri(l - 1, m)]) / st;
        dplm_[static_cast<size_t>(t) * n_theta_ + i] = dp;
        // Legendre ODE: P'' = -ct/st P' - (l(l+1) - m^2/st^2) P
        ddplm_[static_cast<size_t>(t) * n_theta_ + i] =
            -ct / st * dp - (l * (l + 1.0) - double(m) * m / (st * st)) * p;
      }
  }
  cosm_.assign(static_cast<size_t>(L_ + 1) * n_phi_, 0.0);
  sinm_.assign(cosm_.size(), 0.0);
  for (int m = 0; m <= L_; ++m)
    for (int j = 0; j < n_phi_; ++j) {
      cosm_[static_cast<size_t>(m) * n_phi_ + j] = std::cos(m * phi_[j]);
      sinm_[static_cast<size_t>(m) * n_phi_ + j] = std::sin(m * phi_[j]);
    }
}

void SphericalGrid::analysis(const std::vector<double>& f, std::vector<double>& coeff) const {
  coeff.assign(n_coeff(), 0.0);
  const double sqrt2 = std::numbers::sqrt2;
  std::vector<double> fc(n_theta_), fs(n_theta_);
  for (int m = 0; m <= L_; ++m) {
    const double* cm = &cosm_[static_cast<size_t>(m) * n_phi_];
    const double* sm = &sinm_[static_cast<size_t>(m) * n_phi_];
    for (int i = 0; i < n_theta_; ++i) {
      const double* row = &f[static_cast<size_t>(i) * n_phi_];
      double ac = 0.0, as = 0.0;
      for (int j = 0; j < n_phi_; ++j) {
        ac += row[j] * cm[j];
        as += row[j] * sm[j];
      }
      fc[i] = ac * w_phi_;
      fs[i] = as * w_phi_;
    }
    for (int l = m; l <= L_; ++l) {
      const double* p = &plm_[static_cast<size_t>(tri(l, m)) * n_theta_];
      double cc = 0.0, cs = 0.0;
      for (int i = 0; i < n_theta_; ++i) {
        cc += w_theta_[i] * p[i] * fc[i];
        cs += w_theta_[i] * p[i] * fs[i];
      }
      if (m == 0) {
        coeff[l * l + l] = cc;
      } else {
        coeff[l * l + l + m] = sqrt2 * cc;
        coeff[l * l + l - m] = sqrt2 * cs;
      }
    }
  }
}

void SphericalGrid::synthesis(const std::vector<double>& coeff, std::vector<double>& f) const {
  synthesis_derivs(coeff, &f, nullptr, nullptr, nullptr, nullptr, nullptr);
}

void SphericalGrid::synthesis_derivs(const std::vector<double>& coeff, std::vector<double>* f, std::vector<double>* f_t,
                                     std::vector<double>* f_p, std::vector<double>* f_tt, std::vector<double>* f_tp,
                                     std::vector<double>* f_pp) const {
  const double sqrt2 = std::numbers::sqrt2;
  const size_t nn = static_cast<size_t>(n_nodes());
  auto prep = [&](std::vector<double>* v) {
    if (v) v->assign(nn, 0.0);
  };
  prep(f);
  prep(f_t);
  prep(f_p);
  prep(f_tt);
  prep(f_tp);
  prep(f_pp);

  // theta-profiles per order m: A (cos part), B (sin part), with dtheta and ddtheta variants
  std::vector<double> A(n_theta_), B(n_theta_), At(n_theta_), Bt(n_theta_), Att(n_theta_), Btt(n_theta_);
  const bool need_t = f_t || f_tp;
  const bool need_tt = f_tt != nullptr;

  for (int m = 0; m <= L_; ++m) {
    const double norm = (m == 0) ? 1.0 : sqrt2;
    bool any = false;
    std::fill(A.begin(), A.end(), 0.0);
    std::fill(B.begin(), B.end(), 0.0);
    if (need_t) {
      std::fill(At.begin(), At.end(), 0.0);
      std::fill(Bt.begin(), Bt.end(), 0.0);
    }
    if (need_tt) {
      std::fill(Att.begin(), Att.end(), 0.0);
      std::fill(Btt.begin(), Btt.end(), 0.0);
    }
    for (int l = m; l <= L_; ++l) {
      const double cc = norm * coeff[l * l + l + m];
      const double cs = (m == 0) ? 0.0 : norm * coeff[l * l + l - m];
      if (cc == 0.0 && cs == 0.0) continue;
      any = true;
      const size_t base = static_cast<size_t>(tri(l, m)) * n_theta_;
      for (int i = 0; i < n_theta_; ++i) {
        const double p = plm_[base + i];
        A[i] += cc * p;
        if (m != 0) B[i] += cs * p;
      }
      if (need_t)
        for (int i = 0; i < n_theta_; ++i) {
          const double dp = dplm_[base + i];
          At[i] += cc * dp;
          if (m != 0) Bt[i] += cs * dp;
        }
      if (need_tt)
        for (int i = 0; i < n_theta_; ++i) {
          const double ddp = ddplm_[base + i];
          Att[i] += cc * ddp;
          if (m != 0) Btt[i] += cs * ddp;
        }
    }
    if (!any) continue;
    const double* cm = &cosm_[static_cast<size_t>(m) * n_phi_];
    const double* sm = &sinm_[static_cast<size_t>(m) * n_phi_];
    for (int i = 0; i < n_theta_; ++i) {
      const size_t row = static_cast<size_t>(i) * n_phi_;
      for (int j = 0; j < n_phi_; ++j) {
        const double c = cm[j], s = sm[j];
        if (f) (*f)[row + j] += A[i] * c + B[i] * s;
        if (f_t) (*f_t)[row + j] += At[i] * c + Bt[i] * s;
        if (f_p) (*f_p)[row + j] += m * (-A[i] * s + B[i] * c);
        if (f_tt) (*f_tt)[row + j] += Att[i] * c + Btt[i] * s;
        if (f_tp) (*f_tp)[row + j] += m * (-At[i] * s + Bt[i] * c);
        if (f_pp) (*f_pp)[row + j] -= m * m * (A[i] * c + B[i] * s);
      }
    }
  }
}

void SphericalGrid::laplace_sphere(const std::vector<double>& coeff_in, std::vector<double>& coeff_out) const {
  coeff_out.assign(n_coeff(), 0.0);
  for (int l = 0; l <= L_; ++l)
    for (int m = -l; m <= l; ++m) coeff_out[l * l + l + m] = -double(l) * (l + 1.0) * coeff_in[l * l + l + m];
}

double SphericalGrid::eval_point(const std::vector<double>& coeff, double theta, double phi) const {
  std::vector<double> row(n_coeff());
  basis_row(theta, phi, row.data());
  double s = 0.0;
  for (int n = 0; n < n_coeff(); ++n) s += coeff[n] * row[n];
  return s;
}

void SphericalGrid::basis_row(double theta, double phi, double* row) const {
  const double sqrt2 = std::numbers::sqrt2;
  std::vector<double> p;
  legendre_point(L_, std::cos(theta), std::sin(theta), p);
  for (int m = 0; m <= L_; ++m) {
    const double c = std::cos(m * phi), s = std::sin(m * phi);
    for (int l = m; l <= L_; ++l) {
      const double v = p[tri(l, m)];
      if (m == 0) {
        row[l * l + l] = v;
      } else {
        row[l * l + l + m] = sqrt2 * v * c;
        row[l * l + l - m] = sqrt2 * v * s;
      }
    }
  }
}

}  // namespace wlm

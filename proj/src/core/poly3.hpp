#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <vector>

namespace wlm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Polynomial in three variables, stored as monomial exponent triple -> coefficient.
/// Used for conformal factors and symbolic curvature expressions derived from them.
class Poly3 {
public:
  Poly3() = default;

  static Poly3 constant(double c) {
    Poly3 p;
    if (c != 0.0) p.terms_[{0, 0, 0}] = c;
    return p;
  }

  void add_term(int i, int j, int k, double c) {
    if (c == 0.0) return;
    auto key = std::array<int, 3>{i, j, k};
    auto it = terms_.find(key);
    if (it == terms_.end())
      terms_[key] = c;
    else if ((it->second += c) == 0.0)
      terms_.erase(it);
  }

  double eval(const Vec3& y) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * ipow(y[0], e[0]) * ipow(y[1], e[1]) * ipow(y[2], e[2]);
    return s;
  }

  Poly3 derivative(int axis) const {
    Poly3 d;
    for (const auto& [e, c] : terms_) {
      if (e[axis] == 0) continue;
      auto f = e;
      f[axis] -= 1;
      d.add_term(f[0], f[1], f[2], c * e[axis]);
    }
    return d;
  }

  Poly3 operator+(const Poly3& o) const {
    Poly3 r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e[0], e[1], e[2], c);
    return r;
  }

  Poly3 operator-(const Poly3& o) const {
    Poly3 r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e[0], e[1], e[2], -c);
    return r;
  }

  Poly3 operator*(const Poly3& o) const {
    Poly3 r;
    for (const auto& [a, ca] : terms_)
      for (const auto& [b, cb] : o.terms_) r.add_term(a[0] + b[0], a[1] + b[1], a[2] + b[2], ca * cb);
    return r;
  }

  Poly3 operator*(double s) const {
    Poly3 r;
    for (const auto& [e, c] : terms_) r.add_term(e[0], e[1], e[2], c * s);
    return r;
  }

  Poly3 laplacian() const {
    Poly3 r;
    for (int a = 0; a < 3; ++a) r = r + derivative(a).derivative(a);
    return r;
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
    return d;
  }

  bool empty() const { return terms_.empty(); }

  const std::map<std::array<int, 3>, double>& terms() const { return terms_; }

private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  std::map<std::array<int, 3>, double> terms_;
};

}  // namespace wlm

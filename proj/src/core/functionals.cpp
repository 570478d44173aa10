#include "functionals.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

namespace wlm {

namespace {
constexpr double pi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string FunctionalReport::to_json() const {
  nlohmann::json j;
  j["area"] = area;
  j["R"] = area_radius;
  j["W"] = willmore;
  j["U"] = umbilicity;
  j["V"] = ambient_term;
  j["gb_residual"] = gauss_bonnet_residual;
  j["lambda"] = lambda_opt;
  j["el_l2"] = el_residual_l2;
  return j.dump();
}

std::string FunctionalReport::csv_header() const { return "area,R,W,U,V,gb_residual,lambda,el_l2"; }

std::string FunctionalReport::csv_row() const {
  return fmt17(area) + "," + fmt17(area_radius) + "," + fmt17(willmore) + "," + fmt17(umbilicity) + "," +
         fmt17(ambient_term) + "," + fmt17(gauss_bonnet_residual) + "," + fmt17(lambda_opt) + "," +
         fmt17(el_residual_l2);
}

std::vector<double> el_operator(const GeometryFields& fields, const SphericalGrid& grid) {
  const auto lapH = laplace_beltrami(fields, grid, fields.H);
  std::vector<double> out(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) {
    const double a2 = fields.tensor_norm2(k, fields.Aring[k]);
    out[k] = lapH[k] + fields.H[k] * a2 + fields.H[k] * fields.ric_nn[k];
  }
  return out;
}

std::vector<double> el_residual(const Chart& chart, const Surface& surface, const SphericalGrid& grid, double lambda,
                                double* l2_norm) {
  const GeometryFields fields = geometry(chart, surface, grid);
  std::vector<double> r = el_operator(fields, grid);
  for (int k = 0; k < fields.n_nodes(); ++k) r[k] += lambda * fields.H[k];
  if (l2_norm) {
    std::vector<double> r2(r.size());
    for (size_t k = 0; k < r.size(); ++k) r2[k] = r[k] * r[k];
    *l2_norm = std::sqrt(integrate(fields, grid, r2));
  }
  return r;
}

double optimal_lambda(const GeometryFields& fields, const SphericalGrid& grid, const std::vector<double>& el_op) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < fields.n_nodes(); ++k) {
    const double w = grid.quad_weight(k) * fields.dmu[k];
    num += w * el_op[k] * fields.H[k];
    den += w * fields.H[k] * fields.H[k];
  }
  if (den == 0.0) fail(ErrorCode::degenerate, "optimal_lambda: vanishing int H^2 dmu");
  return -num / den;
}

double optimal_lambda(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  const GeometryFields fields = geometry(chart, surface, grid);
  return optimal_lambda(fields, grid, el_operator(fields, grid));
}

FunctionalReport evaluate_functionals(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  const GeometryFields fields = geometry(chart, surface, grid);
  FunctionalReport rep;
  rep.area = fields.area;
  rep.area_radius = fields.area_radius;

  std::vector<double> h2(fields.n_nodes()), a2(fields.n_nodes()), v(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) {
    h2[k] = fields.H[k] * fields.H[k];
    a2[k] = fields.tensor_norm2(k, fields.Aring[k]);
    v[k] = fields.ric_nn[k] - 0.5 * fields.sc[k];
  }
  rep.willmore = 0.25 * integrate(fields, grid, h2);
  rep.umbilicity = integrate(fields, grid, a2);
  rep.ambient_term = integrate(fields, grid, v);
  rep.gauss_bonnet_residual = rep.willmore - 4.0 * pi - 0.5 * rep.umbilicity - rep.ambient_term;

  const auto op = el_operator(fields, grid);
  rep.lambda_opt = optimal_lambda(fields, grid, op);
  std::vector<double> r2(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) {
    const double r = op[k] + rep.lambda_opt * fields.H[k];
    r2[k] = r * r;
  }
  rep.el_residual_l2 = std::sqrt(integrate(fields, grid, r2));
  return rep;
}

CheapFunctionals cheap_functionals(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  const GeometryFields fields = geometry(chart, surface, grid);
  CheapFunctionals out;
  out.area = fields.area;
  std::vector<double> h2(fields.n_nodes());
  for (int k = 0; k < fields.n_nodes(); ++k) h2[k] = fields.H[k] * fields.H[k];
  out.willmore = 0.25 * integrate(fields, grid, h2);
  return out;
}

}  // namespace wlm

#pragma once

#include <string>

#include "calculus.hpp"
#include "surface.hpp"

namespace wlm {

struct FunctionalReport {
  double area = 0.0;
  double area_radius = 0.0;          // R = sqrt(area / 4 pi)
  double willmore = 0.0;             // W = 1/4 int H^2
  double umbilicity = 0.0;           // U = int |Aring|^2
  double ambient_term = 0.0;         // V = int (Ric(nu,nu) - Sc/2)
  double gauss_bonnet_residual = 0.0;  // W - 4 pi - U/2 - V
  double lambda_opt = 0.0;
  double el_residual_l2 = 0.0;       // at lambda_opt

  std::string to_json() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

/// Normal-direction Euler-Lagrange operator G = Lap H + H |Aring|^2 + H Ric(nu,nu)
/// evaluated at the nodes (the residual field is G + lambda H).
std::vector<double> el_operator(const GeometryFields& fields, const SphericalGrid& grid);

/// Residual field of the constrained equation at a given multiplier, and its L2(dmu) norm.
std::vector<double> el_residual(const Chart& chart, const Surface& surface, const SphericalGrid& grid, double lambda,
                                double* l2_norm);

/// L2(dmu) projection: lambda* = -<G, H> / <H, H>; orthogonality <G + lambda* H, H> = 0
/// holds exactly as quadrature sums.
double optimal_lambda(const GeometryFields& fields, const SphericalGrid& grid, const std::vector<double>& el_op);
double optimal_lambda(const Chart& chart, const Surface& surface, const SphericalGrid& grid);

FunctionalReport evaluate_functionals(const Chart& chart, const Surface& surface, const SphericalGrid& grid);

/// Functionals that need no spectral differentiation (used inside flow line searches).
struct CheapFunctionals {
  double area = 0.0;
  double willmore = 0.0;
};
CheapFunctionals cheap_functionals(const Chart& chart, const Surface& surface, const SphericalGrid& grid);

}  // namespace wlm

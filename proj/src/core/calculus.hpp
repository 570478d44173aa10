#pragma once

#include "surface.hpp"

namespace wlm {

/// First angular derivatives (d_theta f, d_phi f) of a node scalar, pseudospectral.
std::vector<Vec2> scalar_gradient(const GeometryFields& fields, const SphericalGrid& grid,
                                  const std::vector<double>& f);

/// Covariant Hessian of a node scalar; optionally exposes the first derivatives.
std::vector<Mat2> scalar_hessian(const GeometryFields& fields, const SphericalGrid& grid,
                                 const std::vector<double>& f, std::vector<Vec2>* grad_out = nullptr);

/// Laplace-Beltrami of a node scalar w.r.t. the induced metric.
std::vector<double> laplace_beltrami(const GeometryFields& fields, const SphericalGrid& grid,
                                     const std::vector<double>& f);

/// Covariant derivative of a covector field: out[k](i,j) = nabla_i sigma_j.
/// Differentiation happens on the ambient Cartesian components, which are smooth
/// fields on the parameter sphere; coordinate components are never differentiated
/// across the poles.
std::vector<Mat2> covector_derivative(const GeometryFields& fields, const SphericalGrid& grid,
                                      const std::vector<Vec2>& sigma);

/// Covariant derivative of a symmetric 2-tensor: out[k][c](i,j) = nabla_c B_ij.
std::vector<std::array<Mat2, 2>> tensor_derivative(const GeometryFields& fields, const SphericalGrid& grid,
                                                   const std::vector<Mat2>& B);

/// (div B)_j = gamma^{ik} nabla_i B_kj.
std::vector<Vec2> tensor_divergence(const GeometryFields& fields, const SphericalGrid& grid,
                                    const std::vector<Mat2>& B);

/// Rough Laplacian of a symmetric 2-tensor, gamma^{kl} nabla_k nabla_l B.
std::vector<Mat2> tensor_laplacian(const GeometryFields& fields, const SphericalGrid& grid,
                                   const std::vector<Mat2>& B);

/// L2(dmu) norm of the discrete Simons identity defect on the surface.
double simons_residual(const Chart& chart, const Surface& surface, const SphericalGrid& grid);

/// Pointwise Simons defect tensor (exposed for tests).
std::vector<Mat2> simons_defect(const Chart& chart, const GeometryFields& fields, const SphericalGrid& grid);

}  // namespace wlm

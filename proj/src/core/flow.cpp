#include "flow.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace wlm {

namespace {
constexpr double pi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double surface_area(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  // area-only pass: first derivatives and the induced metric, nothing else
  std::vector<double> rho, rt, rp;
  grid.synthesis_derivs(surface.coeffs, &rho, &rt, &rp, nullptr, nullptr, nullptr);
  double area = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const int i = k / grid.n_phi();
    const double theta = grid.node_theta(k), phi = grid.node_phi(k);
    const double st = grid.sin_theta(i), ct = std::cos(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);
    const Vec3 om(st * cp, st * sp, ct);
    const Vec3 om_t(ct * cp, ct * sp, -st);
    const Vec3 om_p(-st * sp, st * cp, 0.0);
    const double r = rho[k];
    if (!(r > 0.0)) fail(ErrorCode::degenerate, "surface lost star-shape at node " + std::to_string(k));
    const Vec3 y = surface.center + r * om;
    const Vec3 e1 = rt[k] * om + r * om_t;
    const Vec3 e2 = rp[k] * om + r * om_p;
    const Mat3 g = chart.metric(y);
    const double g11 = e1.dot(g * e1), g12 = e1.dot(g * e2), g22 = e2.dot(g * e2);
    const double det = g11 * g22 - g12 * g12;
    if (!(det > 0.0)) fail(ErrorCode::degenerate, "induced metric degenerate at node " + std::to_string(k));
    area += grid.quad_weight(k) * std::sqrt(det) / st;
  }
  return area;
}

// translational residual m^a = int nu^a (G + lambda* H) dmu and the functional report pieces
struct StepQuantities {
  double area = 0.0, willmore = 0.0, lambda = 0.0, el_l2 = 0.0;
  Vec3 m = Vec3::Zero();
  std::vector<double> residual;       // G + lambda* H at nodes
  std::vector<double> align;          // g(dir, nu)
};

StepQuantities step_quantities(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  const GeometryFields F = geometry(chart, surface, grid);
  StepQuantities q;
  q.area = F.area;
  const auto op = el_operator(F, grid);
  q.lambda = optimal_lambda(F, grid, op);
  q.residual.resize(F.n_nodes());
  q.align = F.align;
  double w = 0.0, l2 = 0.0;
  Vec3 m = Vec3::Zero();
  for (int k = 0; k < F.n_nodes(); ++k) {
    const double wk = grid.quad_weight(k) * F.dmu[k];
    const double r = op[k] + q.lambda * F.H[k];
    q.residual[k] = r;
    w += wk * F.H[k] * F.H[k];
    l2 += wk * r * r;
    m += wk * r * F.nu[k];
  }
  q.willmore = 0.25 * w;
  q.el_l2 = std::sqrt(l2);
  q.m = m;
  return q;
}

}  // namespace

std::string FlowTrace::to_csv() const {
  std::string out = "step,kind,W,area,lambda,scaled_residual,step_size\n";
  for (const FlowStep& s : steps) {
    out += std::to_string(s.index);
    out += ',';
    out += s.kind;
    out += ',' + fmt17(s.willmore) + ',' + fmt17(s.area) + ',' + fmt17(s.lambda) + ',' +
           fmt17(s.scaled_residual) + ',' + fmt17(s.step_size) + '\n';
  }
  return out;
}

Surface geodesic_sphere(const Chart& chart, const Vec3& p0, double r, const SphericalGrid& grid,
                        const GeodesicSolverParams& params, double* fit_rms) {
  if (!(r > 0.0) || r >= 0.25 * chart.valid_radius())
    fail(ErrorCode::domain, "geodesic sphere radius must satisfy 0 < r < valid_radius/4");
  // orthonormal frame at p0 (Gram-Schmidt, order 1,2,3)
  const Mat3 g0 = chart.metric(p0);
  Mat3 frame;
  for (int a = 0; a < 3; ++a) {
    Vec3 u = Vec3::Unit(a);
    for (int b = 0; b < a; ++b) u -= frame.col(b) * (frame.col(b).dot(g0 * Vec3::Unit(a)));
    frame.col(a) = u / std::sqrt(u.dot(g0 * u));
  }
  std::vector<Vec3> dirs(grid.n_nodes());
  std::vector<double> radii(grid.n_nodes()), weights(grid.n_nodes());
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const double th = grid.node_theta(k), ph = grid.node_phi(k);
    const Vec3 om(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    const Vec3 x = exp_map(chart, p0, r * (frame * om), params);
    const Vec3 d = x - p0;
    radii[k] = d.norm();
    dirs[k] = d / radii[k];
    weights[k] = grid.quad_weight(k);
  }
  return fit_scattered_radial(p0, grid.degree(), dirs, radii, weights, fit_rms);
}

void restore_area(const Chart& chart, Surface& surface, const SphericalGrid& grid, double target_area,
                  double rel_tol) {
  for (int it = 0; it < 60; ++it) {
    const double area = surface_area(chart, surface, grid);
    if (std::abs(area - target_area) <= rel_tol * target_area) return;
    const double s = std::sqrt(target_area / area);
    for (double& c : surface.coeffs) c *= s;
  }
  fail(ErrorCode::solver, "area restoration did not converge");
}

FlowResult minimize(const Chart& chart, const Surface& init, const FlowParams& params, const SphericalGrid& grid,
                    const GeodesicSolverParams& geo_params) {
  params.validate();
  (void)geo_params;
  FlowResult out;
  out.surface = (init.L == grid.degree()) ? init : init.resized(grid.degree());
  FlowTrace& trace = out.trace;

  const double R = std::sqrt(params.target_area / (4.0 * pi));
  const double scale3 = R * R * R;
  const double center_tol_abs = params.center_tol * R * R * R * R;
  const int l_cut = 2 * grid.degree() / 3;

  try {
    restore_area(chart, out.surface, grid, params.target_area, params.area_newton_tol);

    double tau = params.initial_step * R * R * R * R;
    const double tau_max = 1e6 * tau;
    double tau_ref = tau;  // running scale of productive steps

    // Near the constrained minimum the per-step energy decrease falls below double
    // round-off long before the residual reaches the discretization floor; from
    // that point acceptance switches to strict residual descent under a W guard.
    bool residual_phase = false;
    double w_guard = std::numeric_limits<double>::infinity();

    Surface best = out.surface;
    double best_res = std::numeric_limits<double>::infinity();

    int since_filter = 0;
    int since_center = params.center_interval;  // try a center pass right away

    StepQuantities q = step_quantities(chart, out.surface, grid);
    for (int step = 0; step < params.max_steps; ++step) {
      const double scaled = q.el_l2 * scale3;
      const bool center_ok = !params.center_correction || q.m.norm() <= center_tol_abs;
      if (scaled <= params.el_tol && center_ok) {
        trace.steps.push_back({step, 's', q.willmore, q.area, q.lambda, scaled, 0.0});
        trace.status = FlowStatus::converged;
        return out;
      }
      if (q.el_l2 < best_res) {
        best_res = q.el_l2;
        best = out.surface;
      }

      // periodic translational Newton correction
      if (params.center_correction && since_center >= params.center_interval && q.m.norm() > center_tol_abs) {
        since_center = 0;
        const double h = 0.05 * R;
        Mat3 J;
        bool fd_ok = true;
        try {
          for (int a = 0; a < 3; ++a) {
            Surface sp = out.surface, sm = out.surface;
            sp.center[a] += h;
            sm.center[a] -= h;
            restore_area(chart, sp, grid, params.target_area, params.area_newton_tol);
            restore_area(chart, sm, grid, params.target_area, params.area_newton_tol);
            J.col(a) = (step_quantities(chart, sp, grid).m - step_quantities(chart, sm, grid).m) / (2.0 * h);
          }
        } catch (const Error&) {
          fd_ok = false;
        }
        if (fd_ok) {
          // damped Newton step on m(c) = 0
          const Mat3 JtJ = J.transpose() * J + 1e-12 * J.squaredNorm() * Mat3::Identity();
          Vec3 dc = JtJ.ldlt().solve(-J.transpose() * q.m);
          const double cap = 0.5 * R;
          if (dc.norm() > cap) dc *= cap / dc.norm();
          Surface trial = out.surface;
          trial.center += dc;
          try {
            restore_area(chart, trial, grid, params.target_area, params.area_newton_tol);
            StepQuantities qt = step_quantities(chart, trial, grid);
            if (qt.m.norm() < q.m.norm()) {
              out.surface = trial;
              q = qt;
              trace.steps.push_back({step, 'c', q.willmore, q.area, q.lambda, q.el_l2 * scale3, dc.norm()});
              continue;
            }
          } catch (const Error&) {
            // keep the current surface when the trial degenerates
          }
        }
      }
      ++since_center;

      // spectral filter
      if (params.filter_enabled && since_filter >= params.filter_interval) {
        since_filter = 0;
        Surface filtered = out.surface;
        for (int l = l_cut + 1; l <= grid.degree(); ++l)
          for (int m = -l; m <= l; ++m) filtered.coeffs[l * l + l + m] = 0.0;
        restore_area(chart, filtered, grid, params.target_area, params.area_newton_tol);
        out.surface = filtered;
        q = step_quantities(chart, out.surface, grid);
        trace.steps.push_back({step, 'f', q.willmore, q.area, q.lambda, q.el_l2 * scale3, 0.0});
      }
      ++since_filter;

      // shape step: normal speed = residual, converted to a radial perturbation
      std::vector<double> drho(q.residual.size());
      for (size_t k = 0; k < drho.size(); ++k) drho[k] = q.residual[k] / q.align[k];
      std::vector<double> dcoeff;
      grid.analysis(drho, dcoeff);
      const double predicted = 0.5 * q.el_l2 * q.el_l2;  // -dW/dtau along the speed field

      bool accepted = false;
      bool floor_reached = false;
      while (true) {
        if (!residual_phase && params.armijo_c * tau * predicted < 5e-15 * std::abs(q.willmore)) {
          residual_phase = true;
          w_guard = q.willmore + 1e-10 * std::abs(q.willmore);
          tau = tau_ref;
        }
        if (residual_phase && tau < 1e-8 * tau_ref) {
          floor_reached = true;  // residual no longer improves at any usable step size
          break;
        }
        Surface trial = out.surface;
        for (int n = 0; n < grid.n_coeff(); ++n) trial.coeffs[n] += tau * dcoeff[n];
        StepQuantities qt;
        try {
          restore_area(chart, trial, grid, params.target_area, params.area_newton_tol);
          qt = step_quantities(chart, trial, grid);
        } catch (const Error&) {
          tau *= params.step_shrink;
          continue;
        }
        const bool ok = residual_phase
                            ? (qt.el_l2 < q.el_l2 && qt.willmore <= w_guard)
                            : (qt.willmore <= q.willmore - params.armijo_c * tau * predicted);
        if (ok) {
          out.surface = trial;
          q = qt;
          accepted = true;
          trace.steps.push_back({step, 's', q.willmore, q.area, q.lambda, q.el_l2 * scale3, tau});
          if (!residual_phase) tau_ref = 0.8 * tau_ref + 0.2 * tau;
          tau = std::min(tau * params.step_grow, tau_max);
          break;
        }
        tau *= params.step_shrink;
      }
      if (!accepted) {
        out.surface = best_res < q.el_l2 ? best : out.surface;
        const double final_scaled = std::min(best_res, q.el_l2) * scale3;
        if (final_scaled <= params.el_tol && (!params.center_correction || q.m.norm() <= center_tol_abs)) {
          trace.status = FlowStatus::converged;
        } else {
          trace.status = FlowStatus::max_steps;
          trace.message = floor_reached ? "residual reached the discretization floor at step " + std::to_string(step)
                                        : "line search stalled at step " + std::to_string(step);
        }
        return out;
      }
    }
    out.surface = best_res < q.el_l2 ? best : out.surface;
    trace.status = FlowStatus::max_steps;
    trace.message = "maximum step count reached";
  } catch (const Error& e) {
    if (e.code() == ErrorCode::degenerate) {
      trace.status = FlowStatus::degenerate;
      trace.message = e.what();
    } else {
      throw;
    }
  }
  return out;
}

}  // namespace wlm

#include "suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "calculus.hpp"

namespace wlm {

namespace {
constexpr double pi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept,
                        double* residual_rms) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double icept = (sy - slope * sx) / n;
  if (intercept) *intercept = icept;
  if (residual_rms) {
    double r2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = y[i] - slope * x[i] - icept;
      r2 += r * r;
    }
    *residual_rms = std::sqrt(r2 / n);
  }
  return slope;
}

}  // namespace

Vec3 find_sc_critical_point(const Chart& chart, const Vec3& start) {
  Vec3 z = start;
  const double cap = 0.1 * chart.valid_radius();
  for (int it = 0; it < 80; ++it) {
    const CurvatureAtPoint cv = chart.curvature(z);
    const double scale = 1.0 + std::abs(cv.sc);
    if (cv.grad_sc.norm() <= 1e-13 * scale) {
      // nondegeneracy check through the covariant Hessian
      if (std::abs(cv.hess_sc.determinant()) < 1e-12 * scale)
        fail(ErrorCode::solver, "critical point of Sc is degenerate");
      return z;
    }
    // Newton on the coordinate partials: J_ab = d_b d_a Sc = Hess_ab + Gamma^c_ab d_c Sc
    Mat3 jac = cv.hess_sc;
    const auto gamma = chart.christoffel(z);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) jac(a, b) += gamma[c](a, b) * cv.grad_sc[c];
    Vec3 step = jac.partialPivLu().solve(-cv.grad_sc);
    if (!step.allFinite()) fail(ErrorCode::solver, "no critical point found (singular Newton step)");
    if (step.norm() > cap) step *= cap / step.norm();
    z += step;
    if (z.norm() >= 0.9 * chart.valid_radius())
      fail(ErrorCode::solver, "no critical point found inside the chart ball");
  }
  fail(ErrorCode::solver, "no critical point found (Newton did not converge)");
}

EnclosureResult enclosed_critical_point(const Chart& chart, const Surface& surface, const SphericalGrid& grid) {
  EnclosureResult out;
  out.critical_point = find_sc_critical_point(chart, Vec3::Zero());
  const Vec3 d = out.critical_point - surface.center;
  const double dist = d.norm();
  if (dist == 0.0) {
    // center coincides with the critical point: margin is the smallest radius
    double rmin = std::numeric_limits<double>::infinity();
    std::vector<double> rho;
    grid.synthesis(surface.coeffs, rho);
    for (double r : rho) rmin = std::min(rmin, r);
    out.inside = true;
    out.margin = rmin;
    return out;
  }
  const double theta = std::acos(std::clamp(d[2] / dist, -1.0, 1.0));
  const double phi = std::atan2(d[1], d[0]);
  const double rho_star = surface.radius_at(theta, phi);
  out.margin = rho_star - dist;
  out.inside = out.margin > 0.0;
  return out;
}

std::string EstimateRecord::csv_header() {
  return "level,area,R,W,gb_residual,lambda,el_scaled,sup_h_minus_2r,sup_h2_combo,grad_h_omega_l2,"
         "aring_l2,aring_linf,aring_corr_l2,lap_s_combo_l2,lambda_combo,grad_sc_p0,simons,diam_ratio,"
         "p0_x,p0_y,p0_z,sc_p0,moment_g_max,moment_e_norm,dist_band,deg1_moment_max,deg3_moment_max,"
         "ric_consistency,enclosed,enclosed_margin,flow_status,flow_steps";
}

std::string EstimateRecord::csv_row() const {
  std::string s = std::to_string(level);
  for (double v : {area, area_radius, willmore, gb_residual, lambda, el_scaled, sup_h_minus_2r, sup_h2_combo,
                   grad_h_omega_l2, aring_l2, aring_linf, aring_corr_l2, lap_s_combo_l2, lambda_combo, grad_sc_p0,
                   simons, diam_ratio, p0[0], p0[1], p0[2], sc_p0, moment_g_max, moment_e_norm, dist_band,
                   deg1_moment_max, deg3_moment_max, ric_consistency})
    s += "," + fmt17(v);
  s += std::string(",") + (enclosed ? "1" : "0") + "," + fmt17(enclosed_margin) + "," + std::to_string(flow_status) +
       "," + std::to_string(flow_steps);
  return s;
}

EstimateRecord evaluate_record(const Chart& chart, const Surface& surface, const SphericalGrid& grid,
                               const CenterParams& center_params, const GeodesicSolverParams& geo) {
  EstimateRecord rec;
  const GeometryFields F = geometry(chart, surface, grid);
  const double R = F.area_radius;
  rec.area = F.area;
  rec.area_radius = R;

  // functionals and multiplier
  {
    const FunctionalReport rep = evaluate_functionals(chart, surface, grid);
    rec.willmore = rep.willmore;
    rec.gb_residual = rep.gauss_bonnet_residual;
    rec.lambda = rep.lambda_opt;
    rec.el_scaled = rep.el_residual_l2 * R * R * R;
  }

  // geometric center, recentered moments, distance band
  CenteredGeometry cg;
  const CenterReport crep = geometric_center(chart, surface, grid, center_params, geo, &cg);
  rec.p0 = crep.p0;
  rec.moment_g_max = crep.moment_g.cwiseAbs().maxCoeff();
  rec.moment_e_norm = crep.moment_e.norm();
  rec.dist_band = crep.dist_band;
  {
    const auto deg1 = odd_moments(cg, grid, 0);
    const auto deg3 = odd_moments(cg, grid, 1);
    rec.deg1_moment_max = *std::max_element(deg1.begin(), deg1.end());
    rec.deg3_moment_max = *std::max_element(deg3.begin(), deg3.end());
  }

  // ambient curvature at the center
  const CurvatureAtPoint cv = chart.curvature(rec.p0);
  rec.sc_p0 = cv.sc;
  const Mat3 ginv_p0 = chart.metric(rec.p0).inverse();
  rec.grad_sc_p0 = std::sqrt(cv.grad_sc.dot(ginv_p0 * cv.grad_sc));
  rec.lambda_combo = std::abs(rec.lambda + cv.sc / 3.0);

  // pointwise estimate left-hand sides
  double sup_h = 0.0, sup_combo = 0.0, sup_aring = 0.0;
  std::vector<double> aring2(F.n_nodes()), ric_nn(F.n_nodes());
  std::vector<Mat2> S(F.n_nodes());
  for (int k = 0; k < F.n_nodes(); ++k) {
    sup_h = std::max(sup_h, std::abs(F.H[k] - 2.0 / R));
    sup_combo = std::max(sup_combo, std::abs(0.5 * F.H[k] * F.H[k] - 8.0 * pi / F.area -
                                             (2.0 / 3.0) * F.ric_nn[k] + (5.0 / 9.0) * rec.sc_p0));
    aring2[k] = F.tensor_norm2(k, F.Aring[k]);
    sup_aring = std::max(sup_aring, std::sqrt(aring2[k]));
    ric_nn[k] = F.ric_nn[k];
    S[k] = F.Aring[k] + (4.0 / 3.0) / F.H[k] * F.Tring[k];
  }
  rec.sup_h_minus_2r = sup_h;
  rec.sup_h2_combo = sup_combo;
  rec.aring_linf = sup_aring;
  rec.aring_l2 = std::sqrt(integrate(F, grid, aring2));
  rec.ric_consistency = std::abs(integrate(F, grid, ric_nn) - F.area * rec.sc_p0 / 3.0);

  // || grad H - 2/3 omega ||_L2
  {
    const auto gradH = scalar_gradient(F, grid, F.H);
    std::vector<double> n2(F.n_nodes());
    for (int k = 0; k < F.n_nodes(); ++k) {
      const Vec2 d = gradH[k] - (2.0 / 3.0) * F.w1form[k];
      n2[k] = d.dot(F.gamma_inv[k] * d);
    }
    rec.grad_h_omega_l2 = std::sqrt(integrate(F, grid, n2));
  }

  // || Aring + 4/3 H^-1 Tring ||_L2 and || Lap S - H^2 S / 2 ||_L2
  {
    std::vector<double> n2(F.n_nodes());
    for (int k = 0; k < F.n_nodes(); ++k) n2[k] = F.tensor_norm2(k, S[k]);
    rec.aring_corr_l2 = std::sqrt(integrate(F, grid, n2));

    const auto lapS = tensor_laplacian(F, grid, S);
    for (int k = 0; k < F.n_nodes(); ++k) {
      const Mat2 d = lapS[k] - 0.5 * F.H[k] * F.H[k] * S[k];
      n2[k] = F.tensor_norm2(k, d);
    }
    rec.lap_s_combo_l2 = std::sqrt(integrate(F, grid, n2));
  }

  rec.simons = [&] {
    const auto defect = simons_defect(chart, F, grid);
    std::vector<double> n2(F.n_nodes());
    for (int k = 0; k < F.n_nodes(); ++k) n2[k] = F.tensor_norm2(k, defect[k]);
    return std::sqrt(integrate(F, grid, n2));
  }();

  // extrinsic diameter from antipodal node pairs (subsampled)
  {
    double diam = 0.0;
    const int stride_t = std::max(1, grid.n_theta() / 12);
    const int stride_p = std::max(1, grid.n_phi() / 16);
    for (int i = 0; i < grid.n_theta() / 2; i += stride_t)
      for (int j = 0; j < grid.n_phi(); j += stride_p) {
        const int k = i * grid.n_phi() + j;
        const int a = grid.antipode(k);
        diam = std::max(diam, distance(chart, F.y[k], F.y[a], geo));
      }
    rec.diam_ratio = diam / R;
  }

  // enclosed critical point (skipped quietly when Sc has none, e.g. flat space)
  try {
    const EnclosureResult enc = enclosed_critical_point(chart, surface, grid);
    rec.enclosed = enc.inside;
    rec.enclosed_margin = enc.margin;
  } catch (const Error&) {
    rec.enclosed = false;
    rec.enclosed_margin = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

std::vector<double> SuiteParams::default_areas() {
  std::vector<double> areas;
  for (int k = 0; k <= 7; ++k) {
    const double R = 0.08 * std::pow(2.0, -0.5 * k);
    areas.push_back(4.0 * pi * R * R);
  }
  return areas;
}

namespace {

struct LevelOutcome {
  EstimateRecord record;
  Surface surface;
  std::string error;
  bool ok = false;
};

LevelOutcome run_level(const Chart& chart, const SuiteParams& params, const std::vector<double>& areas, int level) {
  LevelOutcome out;
  try {
    const double area = areas[level];
    const double R = std::sqrt(area / (4.0 * pi));
    const bool fine = level >= static_cast<int>(areas.size()) - params.fine_levels;

    Vec3 seed;
    if (params.center_seed) {
      seed = *params.center_seed;
    } else {
      try {
        seed = find_sc_critical_point(chart, Vec3::Zero());
      } catch (const Error&) {
        seed = Vec3::Zero();  // flat or homogeneous: no critical point to chase
      }
    }

    SphericalGrid base(params.n_theta, params.n_phi, params.degree);
    FlowParams fp = params.flow;
    fp.target_area = area;

    Surface current = geodesic_sphere(chart, seed, R, base, params.geodesic, nullptr);
    FlowResult res = minimize(chart, current, fp, base, params.geodesic);
    if (res.trace.status == FlowStatus::degenerate)
      fail(ErrorCode::degenerate, "flow degenerated: " + res.trace.message);
    int steps = static_cast<int>(res.trace.steps.size());

    const SphericalGrid* grid = &base;
    std::unique_ptr<SphericalGrid> fine_grid;
    if (fine) {
      // refine the converged coarse solution on the finer grid class
      fine_grid = std::make_unique<SphericalGrid>(params.fine_n_theta, params.fine_n_phi, params.fine_degree);
      grid = fine_grid.get();
      res = minimize(chart, res.surface.resized(params.fine_degree), fp, *fine_grid, params.geodesic);
      if (res.trace.status == FlowStatus::degenerate)
        fail(ErrorCode::degenerate, "fine-grid flow degenerated: " + res.trace.message);
      steps += static_cast<int>(res.trace.steps.size());
    }

    out.record = evaluate_record(chart, res.surface, *grid, params.center, params.geodesic);
    out.record.level = level;
    out.record.flow_status = static_cast<int>(res.trace.status);
    out.record.flow_steps = steps;
    out.surface = res.surface;
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

LadderResult run_ladder(const Chart& chart, const SuiteParams& params) {
  const std::vector<double> areas = params.areas.empty() ? SuiteParams::default_areas() : params.areas;
  for (size_t i = 1; i < areas.size(); ++i)
    if (areas[i] >= areas[i - 1]) fail(ErrorCode::config, "ladder areas must be strictly decreasing");
  const double R0 = std::sqrt(areas.front() / (4.0 * pi));
  if (R0 > chart.valid_radius() / 8.0)
    fail(ErrorCode::config, "largest ladder radius exceeds valid_radius/8");

  const int n = static_cast<int>(areas.size());
  std::vector<LevelOutcome> outcomes(n);
  const int jobs = std::max(1, params.jobs);
  if (jobs == 1) {
    for (int level = 0; level < n; ++level) outcomes[level] = run_level(chart, params, areas, level);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < std::min(jobs, n); ++t)
      pool.emplace_back([&] {
        for (int level = next.fetch_add(1); level < n; level = next.fetch_add(1))
          outcomes[level] = run_level(chart, params, areas, level);
      });
    for (auto& th : pool) th.join();
  }

  LadderResult out;
  out.level_errors.resize(n);
  for (int level = 0; level < n; ++level) {
    out.level_errors[level] = outcomes[level].error;
    if (outcomes[level].ok) {
      out.records.push_back(outcomes[level].record);
      out.surfaces.push_back(outcomes[level].surface);
    }
  }
  return out;
}

namespace {

struct FitSpec {
  const char* name;
  double exponent;
  bool required;
  double (*value)(const EstimateRecord&);
};

const FitSpec kFitSpecs[] = {
    {"sup_h_minus_2r", 1.0, true, [](const EstimateRecord& r) { return r.sup_h_minus_2r; }},
    {"aring_linf", 1.0, true, [](const EstimateRecord& r) { return r.aring_linf; }},
    {"aring_l2", 2.0, true, [](const EstimateRecord& r) { return r.aring_l2; }},
    {"sup_h2_combo", 1.0, true, [](const EstimateRecord& r) { return r.sup_h2_combo; }},
    {"grad_h_omega_l2", 2.0, true, [](const EstimateRecord& r) { return r.grad_h_omega_l2; }},
    {"aring_corr_l2", 3.0, true, [](const EstimateRecord& r) { return r.aring_corr_l2; }},
    {"lambda_combo", 1.0, true, [](const EstimateRecord& r) { return r.lambda_combo; }},
    {"grad_sc_p0", 2.0, true, [](const EstimateRecord& r) { return r.grad_sc_p0; }},
    {"dist_band", 3.0, true, [](const EstimateRecord& r) { return r.dist_band; }},
    {"dist_band_over_bound", 0.0, false,
     [](const EstimateRecord& r) { return r.dist_band / (std::pow(r.area_radius, 3) + r.area_radius * r.aring_l2); }},
    {"deg3_moment_over_bound", 0.0, true,
     [](const EstimateRecord& r) {
       return r.deg3_moment_max / (std::pow(r.area_radius, 3) + r.area_radius * r.aring_l2);
     }},
    {"lap_s_combo_l2", 1.0, false, [](const EstimateRecord& r) { return r.lap_s_combo_l2; }},
    {"moment_e_norm", 5.0, false, [](const EstimateRecord& r) { return r.moment_e_norm; }},
};

}  // namespace

std::vector<RateFit> fit_rates(const std::vector<EstimateRecord>& records) {
  std::vector<const EstimateRecord*> ok;
  for (const auto& r : records)
    if (r.flow_status == 0) ok.push_back(&r);
  if (ok.size() < 3) fail(ErrorCode::config, "rate fitting requires at least 3 successful levels");

  std::vector<RateFit> fits;
  for (const FitSpec& spec : kFitSpecs) {
    RateFit f;
    f.name = spec.name;
    f.expected_exponent = spec.exponent;
    f.required = spec.required;
    std::vector<double> lx, ly;
    for (const EstimateRecord* r : ok) {
      const double v = spec.value(*r);
      if (v > 0.0 && std::isfinite(v)) {
        lx.push_back(std::log(r->area_radius));
        ly.push_back(std::log(v));
      }
    }
    f.levels_used = static_cast<int>(lx.size());
    if (f.levels_used >= 3) {
      double icept = 0.0, res = 0.0;
      f.slope = fit_loglog_slope(lx, ly, &icept, &res);
      f.constant = std::exp(icept);
      f.fit_residual = res;
      f.pass = f.slope >= spec.exponent - 0.3;
    }
    fits.push_back(std::move(f));
  }
  return fits;
}

std::string RateFit::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["expected_exponent"] = expected_exponent;
  j["required"] = required;
  j["slope"] = slope;
  j["constant"] = constant;
  j["fit_residual"] = fit_residual;
  j["levels_used"] = levels_used;
  j["pass"] = pass;
  return j.dump();
}

std::string records_to_csv(const std::vector<EstimateRecord>& records, const std::string& header_comment) {
  std::string out;
  std::istringstream comment(header_comment);
  std::string line;
  while (std::getline(comment, line)) out += "# " + line + "\n";
  out += EstimateRecord::csv_header() + "\n";
  for (const auto& r : records) out += r.csv_row() + "\n";
  return out;
}

std::vector<EstimateRecord> records_from_csv(const std::string& text) {
  std::vector<EstimateRecord> out;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != EstimateRecord::csv_header()) fail(ErrorCode::io, "records CSV: unexpected column header");
      header_seen = true;
      continue;
    }
    std::vector<double> v;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 32) fail(ErrorCode::io, "records CSV: wrong column count");
    EstimateRecord r;
    int i = 0;
    r.level = static_cast<int>(v[i++]);
    r.area = v[i++];
    r.area_radius = v[i++];
    r.willmore = v[i++];
    r.gb_residual = v[i++];
    r.lambda = v[i++];
    r.el_scaled = v[i++];
    r.sup_h_minus_2r = v[i++];
    r.sup_h2_combo = v[i++];
    r.grad_h_omega_l2 = v[i++];
    r.aring_l2 = v[i++];
    r.aring_linf = v[i++];
    r.aring_corr_l2 = v[i++];
    r.lap_s_combo_l2 = v[i++];
    r.lambda_combo = v[i++];
    r.grad_sc_p0 = v[i++];
    r.simons = v[i++];
    r.diam_ratio = v[i++];
    r.p0 = Vec3(v[i], v[i + 1], v[i + 2]);
    i += 3;
    r.sc_p0 = v[i++];
    r.moment_g_max = v[i++];
    r.moment_e_norm = v[i++];
    r.dist_band = v[i++];
    r.deg1_moment_max = v[i++];
    r.deg3_moment_max = v[i++];
    r.ric_consistency = v[i++];
    r.enclosed = v[i++] != 0.0;
    r.enclosed_margin = v[i++];
    r.flow_status = static_cast<int>(v[i++]);
    r.flow_steps = static_cast<int>(v[i++]);
    out.push_back(r);
  }
  if (!header_seen) fail(ErrorCode::io, "records CSV: no header found");
  return out;
}

std::string rates_to_json(const std::vector<RateFit>& fits) {
  nlohmann::json arr = nlohmann::json::array();
  bool all_required_pass = true;
  for (const RateFit& f : fits) {
    arr.push_back(nlohmann::json::parse(f.to_json()));
    if (f.required && !f.pass) all_required_pass = false;
  }
  nlohmann::json j;
  j["fits"] = arr;
  j["all_required_pass"] = all_required_pass;
  return j.dump(2);
}

std::string error_budget_csv(const std::vector<EstimateRecord>& records) {
  std::string out = "level,R,gb_residual,simons,el_scaled,moment_g_max,flow_status,flow_steps\n";
  for (const auto& r : records) {
    out += std::to_string(r.level) + "," + fmt17(r.area_radius) + "," + fmt17(r.gb_residual) + "," +
           fmt17(r.simons) + "," + fmt17(r.el_scaled) + "," + fmt17(r.moment_g_max) + "," +
           std::to_string(r.flow_status) + "," + std::to_string(r.flow_steps) + "\n";
  }
  return out;
}

void run_suite_to_directory(const Chart& chart, const SuiteParams& params, const std::string& out_dir,
                            const std::string& config_echo) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "surfaces", ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory " + out_dir);

  const LadderResult ladder = run_ladder(chart, params);

  auto write_file = [](const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorCode::io, "cannot write " + p.string());
    f << content;
  };

  write_file(fs::path(out_dir) / "records.csv", records_to_csv(ladder.records, config_echo));
  write_file(fs::path(out_dir) / "error_budget.csv", error_budget_csv(ladder.records));
  for (size_t i = 0; i < ladder.records.size(); ++i) {
    write_file(fs::path(out_dir) / "surfaces" / ("level_" + std::to_string(ladder.records[i].level) + ".json"),
               ladder.surfaces[i].to_json());
  }
  // plot-ready two-column files per estimate
  for (const FitSpec& spec : kFitSpecs) {
    std::string dat;
    for (const auto& r : ladder.records)
      if (r.flow_status == 0) dat += fmt17(r.area_radius) + " " + fmt17(spec.value(r)) + "\n";
    write_file(fs::path(out_dir) / (std::string(spec.name) + ".dat"), dat);
  }
  if (!ladder.records.empty()) {
    try {
      write_file(fs::path(out_dir) / "rates.json", rates_to_json(fit_rates(ladder.records)));
    } catch (const Error&) {
      write_file(fs::path(out_dir) / "rates.json", "{\"fits\":[],\"all_required_pass\":false}");
    }
  }
  // level failures, if any
  std::string errs;
  for (size_t i = 0; i < ladder.level_errors.size(); ++i)
    if (!ladder.level_errors[i].empty()) errs += "level " + std::to_string(i) + ": " + ladder.level_errors[i] + "\n";
  if (!errs.empty()) write_file(fs::path(out_dir) / "level_errors.txt", errs);
}

}  // namespace wlm

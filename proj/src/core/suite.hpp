#pragma once

#include <optional>
#include <string>
#include <vector>

#include "barycenter.hpp"
#include "flow.hpp"
#include "functionals.hpp"

namespace wlm {

/// Newton search for a critical point of the ambient scalar curvature, started
/// from the given point. Fails (solver error) when no nondegenerate critical
/// point is reachable, e.g. in flat space.
Vec3 find_sc_critical_point(const Chart& chart, const Vec3& start);

/// Star-shape containment test of the Sc-critical point: inside iff the ray
/// distance from the surface center is below the radial field; signed margin.
struct EnclosureResult {
  bool inside = false;
  double margin = 0.0;  // rho(omega_*) - |z* - c|
  Vec3 critical_point = Vec3::Zero();
};
EnclosureResult enclosed_critical_point(const Chart& chart, const Surface& surface, const SphericalGrid& grid);

/// One ladder level: every left-hand side of the verified estimates, evaluated
/// on the flow-converged surface in the chart recentered at its geometric center.
struct EstimateRecord {
  int level = 0;
  double area = 0.0;
  double area_radius = 0.0;
  double willmore = 0.0;
  double gb_residual = 0.0;
  double lambda = 0.0;
  double el_scaled = 0.0;

  double sup_h_minus_2r = 0.0;   // sup |H - 2/R|
  double sup_h2_combo = 0.0;     // sup |H^2/2 - 8 pi/|S| - 2/3 Ric(nu,nu) + 5/9 Sc(p0)|
  double grad_h_omega_l2 = 0.0;  // || grad H - 2/3 omega ||_L2
  double aring_l2 = 0.0;
  double aring_linf = 0.0;
  double aring_corr_l2 = 0.0;    // || Aring + 4/3 H^-1 Tring ||_L2
  double lap_s_combo_l2 = 0.0;   // || Lap S - 1/2 H^2 S ||_L2
  double lambda_combo = 0.0;     // | lambda + Sc(p0)/3 |
  double grad_sc_p0 = 0.0;       // | grad Sc (p0) |_g
  double simons = 0.0;
  double diam_ratio = 0.0;       // diam / R

  Vec3 p0 = Vec3::Zero();
  double sc_p0 = 0.0;
  double moment_g_max = 0.0;     // max_a | int z^a dmu_g |
  double moment_e_norm = 0.0;
  double dist_band = 0.0;
  double deg1_moment_max = 0.0;
  double deg3_moment_max = 0.0;
  double ric_consistency = 0.0;  // | int Ric(nu,nu) dmu - |S| Sc(p0)/3 |
  bool enclosed = false;
  double enclosed_margin = 0.0;

  int flow_status = 0;  // FlowStatus as int
  int flow_steps = 0;

  static std::string csv_header();
  std::string csv_row() const;
};

/// Evaluate a full record for an existing surface (no flow); used by the ladder
/// and by the serialization-fidelity checks.
EstimateRecord evaluate_record(const Chart& chart, const Surface& surface, const SphericalGrid& grid,
                               const CenterParams& center_params, const GeodesicSolverParams& geo);

struct SuiteParams {
  std::vector<double> areas;  // strictly decreasing; empty selects the default dyadic ladder
  int n_theta = 32, n_phi = 64, degree = 16;
  int fine_n_theta = 48, fine_n_phi = 96, fine_degree = 24;
  int fine_levels = 2;  // smallest levels computed on the finer grid class
  FlowParams flow;      // target_area is set per level
  CenterParams center;
  GeodesicSolverParams geodesic;
  std::optional<Vec3> center_seed;  // default: Newton-located Sc-critical point (origin in flat space)
  int jobs = 1;

  static std::vector<double> default_areas();
};

struct LadderResult {
  std::vector<EstimateRecord> records;
  std::vector<Surface> surfaces;
  std::vector<std::string> level_errors;  // empty string when the level succeeded
};

LadderResult run_ladder(const Chart& chart, const SuiteParams& params);

struct RateFit {
  std::string name;
  double expected_exponent = 0.0;
  bool required = true;  // participates in the acceptance PASS table
  double slope = 0.0;
  double constant = 0.0;      // exp(intercept) of the log-log fit
  double fit_residual = 0.0;  // rms of log residuals
  int levels_used = 0;
  bool pass = false;  // slope >= expected - 0.3

  std::string to_json() const;
};

std::vector<RateFit> fit_rates(const std::vector<EstimateRecord>& records);

/// Artifact writers (deterministic byte output).
std::string records_to_csv(const std::vector<EstimateRecord>& records, const std::string& header_comment);
std::vector<EstimateRecord> records_from_csv(const std::string& text);
std::string rates_to_json(const std::vector<RateFit>& fits);
std::string error_budget_csv(const std::vector<EstimateRecord>& records);

/// Run the ladder and write records.csv, rates.json, error_budget.csv,
/// surfaces/level_k.json and per-estimate .dat files under out_dir.
void run_suite_to_directory(const Chart& chart, const SuiteParams& params, const std::string& out_dir,
                            const std::string& config_echo);

}  // namespace wlm

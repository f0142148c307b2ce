#pragma once

// Batch driver: each subcommand runs one module's checks and renders a
// report as JSON or CSV. Reports carry no timestamps, so identical
// configurations give identical bytes.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hrl/emden_fowler.hpp"
#include "hrl/extremals.hpp"
#include "hrl/parallel.hpp"
#include "hrl/params.hpp"
#include "hrl/quadrature.hpp"
#include "hrl/spectrum.hpp"
#include "hrl/stability.hpp"

namespace hrl::cli {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { json, csv };

inline std::string to_string(Format f) { return f == Format::json ? "json" : "csv"; }
inline Format parse_format(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw UsageError("output format must be json or csv, got '" + s + "'");
}

struct RunConfig {
  int N = 5;
  double mu = 0.5;
  int grid_size = 800;
  double rel_tol = 1e-10;
  std::vector<int> sectors{0, 1, 2, 3};
  int sample_count = 50;
  std::uint64_t seed = 1;
  Format output_format = Format::json;
  std::string output_path;  // empty: stdout

  /// Throws DomainError for (N, mu) outside the admissible range and
  /// UsageError for other bad fields.
  void validate() const {
    check_admissible(N, mu);
    if (grid_size < 12 || grid_size > 4000) throw UsageError("grid_size must lie in [12, 4000]");
    if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) throw UsageError("rel_tol must lie in (0, 1e-3]");
    if (sectors.empty()) throw UsageError("sectors must not be empty");
    for (int k : sectors)
      if (k < 0 || k > 50) throw UsageError("sector indices must lie in [0, 50]");
    if (sample_count < 1 || sample_count > 10000) throw UsageError("sample_count must lie in [1, 10000]");
  }

  QuadratureConfig quadrature(const ParameterSet& p) const { return matched_config(p, grid_size, rel_tol); }
  GridSpec grid() const { return GridSpec{grid_size}; }
};

inline json to_json(const RunConfig& c) {
  return json{{"N", c.N},
              {"mu", c.mu},
              {"grid_size", c.grid_size},
              {"rel_tol", c.rel_tol},
              {"sectors", c.sectors},
              {"sample_count", c.sample_count},
              {"seed", c.seed},
              {"output_format", to_string(c.output_format)},
              {"output_path", c.output_path}};
}

/// Overlays the keys of a flat JSON object onto `c`.
inline void apply_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw UsageError("config file must hold a flat JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "N") c.N = value.get<int>();
      else if (key == "mu") c.mu = value.get<double>();
      else if (key == "grid_size") c.grid_size = value.get<int>();
      else if (key == "rel_tol") c.rel_tol = value.get<double>();
      else if (key == "sectors") c.sectors = value.get<std::vector<int>>();
      else if (key == "sample_count") c.sample_count = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "output_format") c.output_format = parse_format(value.get<std::string>());
      else if (key == "output_path") c.output_path = value.get<std::string>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  apply_json(base, j);
  return base;
}

// ---------------------------------------------------------------------------
// Check rows and reports
// ---------------------------------------------------------------------------

struct CheckRow {
  std::string check;
  std::string anchor;    // the statement being verified
  std::string relation;  // how got is compared with expected
  double expected = 0.0;
  double got = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline json to_json(const CheckRow& r) {
  return json{{"check", r.check},     {"anchor", r.anchor},       {"relation", r.relation},
              {"expected", r.expected}, {"got", r.got}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

struct Report {
  std::string subcommand;
  RunConfig config;
  json results = json::object();
  std::vector<CheckRow> checks;
  std::vector<DeficitSample> samples;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRow& r) { return r.pass; });
  }

  /// |got - expected| <= tol * |expected|.
  void relative(std::string check, std::string anchor, double expected, double got, double tol) {
    const double err = std::abs(got - expected);
    checks.push_back({std::move(check), std::move(anchor), "relative error", expected, got, tol,
                      err <= tol * std::abs(expected)});
  }
  /// |got - expected| <= tol.
  void absolute(std::string check, std::string anchor, double expected, double got, double tol) {
    checks.push_back({std::move(check), std::move(anchor), "absolute error", expected, got, tol,
                      std::abs(got - expected) <= tol});
  }
  /// got <= limit.
  void at_most(std::string check, std::string anchor, double got, double limit) {
    checks.push_back({std::move(check), std::move(anchor), "at most", limit, got, 0.0, got <= limit});
  }
  /// got >= limit.
  void at_least(std::string check, std::string anchor, double got, double limit) {
    checks.push_back({std::move(check), std::move(anchor), "at least", limit, got, 0.0, got >= limit});
  }

  void merge(const Report& other) {
    results[other.subcommand] = other.results;
    for (CheckRow r : other.checks) {
      r.check = other.subcommand + "/" + r.check;
      checks.push_back(std::move(r));
    }
    samples.insert(samples.end(), other.samples.begin(), other.samples.end());
  }
};

inline std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline Report run_constants(const RunConfig& cfg) {
  const ParameterSet p = derive_constants(cfg.N, cfg.mu);
  Report rep{"constants", cfg};
  rep.results = json{{"N", p.N},
                     {"mu", p.mu},
                     {"a", p.a},
                     {"b", p.b},
                     {"two_crit", p.two_crit},
                     {"c1", p.c1},
                     {"c2", p.c2},
                     {"s0", p.s0},
                     {"s_mu", p.s_mu},
                     {"k_coeff", p.k_coeff},
                     {"gamma_N", gamma_product(p.N)},
                     {"sphere_area", sphere_area(p.N)},
                     {"s0_radial", radial_s0(p)},
                     {"s_mu_radial", radial_s_mu(p)}};
  const double gamma = static_cast<double>(gamma_product(p.N));
  rep.relative("amplitude", "K^{8/(N-4)} equals b^4 Gamma_N", std::pow(p.b, 4) * gamma,
               std::pow(p.k_coeff, 8.0 / (p.N - 4)), 1e-12);
  rep.relative("constant_ratio", "S_mu / S_0 equals b^{4-4/N}", std::pow(p.b, 4.0 - 4.0 / p.N), p.s_mu / p.s0,
               1e-12);
  rep.at_least("hardy_coefficient_positive", "C1 > 0 on the admissible range", p.c1, 0.0);
  rep.at_least("transform_exponent", "b = 1 - mu/(N-4) lies in (0, 1)", std::min(p.b, 1.0 - p.b), 0.0);
  return rep;
}

inline Report run_extremal_check(const RunConfig& cfg) {
  const ParameterSet p = derive_constants(cfg.N, cfg.mu);
  const QuadratureConfig q = cfg.quadrature(p);
  Report rep{"extremal-check", cfg};

  const ExtremalBubble bub = make_bubble(p);
  const ExtremalBubble scaled = make_bubble(p, 2.5);
  double worst = 0.0, worst_scaled = 0.0;
  for (double r : log_spaced(1e-3, 1e3, 50)) {
    worst = std::max(worst, el_relative_residual(bub.profile, p, r));
    worst_scaled = std::max(worst_scaled, el_relative_residual(scaled.profile, p, r));
  }
  rep.at_most("el_residual", "the extremal profile solves the radial Euler-Lagrange equation", worst, 1e-6);
  rep.at_most("el_residual_scaled", "every dilate U_{mu,lam} solves the same equation", worst_scaled, 1e-6);

  const EqualityCase eq = equality_case_check(p, q);
  rep.at_most("equality_gap", "U_mu attains equality in the weighted inequality", std::abs(eq.relative_gap()), 1e-6);

  const SharpConstantIdentity id = sharp_constant_identity(p, q);
  const double id_tol = p.b < 0.2 ? 1e-4 : 1e-6;
  rep.relative("sharp_constant_identity", "S_mu = ||U_mu||^{2-4/2**}", id.from_formula, id.from_norm, id_tol);

  double lo = 1e300, hi = 0.0;
  for (double lam : {0.25, 1.0, 4.0}) {
    const double n = inner_product_mu(make_bubble(p, lam).profile, make_bubble(p, lam).profile, p, q);
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  rep.at_most("dilation_invariance", "||U_{mu,lam}||_mu does not depend on lam", (hi - lo) / hi, 1e-7);

  // G against a centered difference in lam.
  const RadialProfile g = scaling_generator(bub);
  const double h = 1e-4;
  double fd_err = 0.0;
  for (double r : log_spaced(1e-2, 1e2, 9)) {
    const double fd = (make_bubble(p, 1.0 + h).value(r) - make_bubble(p, 1.0 - h).value(r)) / (2.0 * h);
    fd_err = std::max(fd_err, std::abs(fd - g.value(r)) / std::abs(bub.value(r)));
  }
  rep.at_most("scaling_generator", "G = (N-4)/2 U + r U' is the lam-derivative of U_{mu,lam}", fd_err, 1e-6);

  rep.results = json{{"max_el_relative_residual", worst},
                     {"norm_sq", eq.lhs},
                     {"critical_integral", eq.critical},
                     {"equality_relative_gap", eq.relative_gap()},
                     {"s_mu_from_norm", id.from_norm},
                     {"s_mu_radial", id.from_formula}};
  return rep;
}

inline Report run_transform_check(const RunConfig& cfg) {
  const ParameterSet p = derive_constants(cfg.N, cfg.mu);
  const QuadratureConfig q = cfg.quadrature(p);
  Report rep{"transform-check", cfg};

  auto coefficient_error = [](const ParameterSet& ps) {
    const CoefficientSet raw = raw_coefficients(ps);
    const CoefficientSet col = collapsed_coefficients(ps.N);
    return std::max({std::abs(raw.A - col.A), std::abs(raw.B - col.B), std::abs(raw.C - col.C),
                     std::abs(raw.D - col.D)});
  };
  const double own = coefficient_error(p);
  rep.at_most("coefficient_collapse", "A = 2(N-1), B = C = (N-1)(N-3), D = 0", own, 1e-9);
  double sweep = 0.0;
  {
    std::mt19937_64 rng = sample_rng(cfg.seed, 0xc0ef);
    std::uniform_int_distribution<int> dim(5, 12);
    std::uniform_real_distribution<double> frac(0.01, 0.99);
    for (int i = 0; i < 50; ++i) {
      const int n = dim(rng);
      sweep = std::max(sweep, coefficient_error(derive_constants(n, frac(rng) * (n - 4))));
    }
  }
  rep.at_most("coefficient_collapse_sweep", "coefficient collapse on 50 random admissible (N, mu)", sweep, 1e-9);

  const ExtremalBubble bub = make_bubble(p);
  const RadialProfile v = push_forward(bub.profile, p);
  const RadialProfile v_exact = transformed_bubble(p);
  const CoefficientSet col = collapsed_coefficients(p.N);
  double img = 0.0, res = 0.0;
  for (double s : log_spaced(1e-2, 1e2, 50)) {
    img = std::max(img, std::abs(v.value(s) - v_exact.value(s)) / v_exact.value(s));
    res = std::max(res, std::abs(transformed_residual(v, p, col, s)) /
                            (std::pow(p.b, -4.0) * std::pow(v_exact.value(s), p.nonlinear_exponent())));
  }
  rep.at_most("bubble_image", "U_mu maps to K (1+s^2)^{-(N-4)/2}", img, 1e-9);
  rep.at_most("transformed_equation", "the image solves the collapsed unweighted equation", res, 1e-6);

  const QuadratureConfig vq = transformed_config(q, p);
  const double crit_u = power_integral(bub.profile, p.two_crit, p.N, q);
  const double crit_v = power_integral(v_exact, p.two_crit, p.N, vq);
  const double form_u = inner_product_mu(bub.profile, bub.profile, p, q);
  const double form_v = quadratic_form(v_exact, v_exact, FormCoefficients::bilaplacian(p.N), vq);
  rep.relative("critical_norm_jacobian", "int |u|^{2**} = b^{-1} int |v|^{2**}", critical_norm_jacobian(p) * crit_v,
               crit_u, 1e-8);
  rep.relative("form_jacobian", "||u||_mu^2 = b^3 int (Lap v)^2", form_jacobian(p) * form_v, form_u, 1e-8);

  // Deficit comparison on perturbed bubbles and far profiles.
  const int count = std::min(cfg.sample_count, 20);
  std::vector<DeficitComparison> cmp(count);
  parallel_for(count, [&](int i) {
    RadialProfile u;
    if (i % 2 == 0) {
      std::mt19937_64 rng = sample_rng(cfg.seed, 0xdef0 + i);
      std::uniform_real_distribution<double> amp(0.02, 0.5);
      std::uniform_real_distribution<double> ctr(-1.5, 1.5);
      u = bub.profile + log_bump(p.N, amp(rng), ctr(rng) / p.b, 0.8 / p.b);
    } else {
      u = random_far_profile(p, cfg.seed, 1000 + i);
    }
    cmp[i] = deficit_comparison(u, p, q);
  });
  double worst_slack = -1e300;
  json rows = json::array();
  for (const DeficitComparison& c : cmp) {
    worst_slack = std::max(worst_slack, c.deficit_unweighted - c.bound_factor * c.deficit_weighted);
    rows.push_back({{"deficit_unweighted", c.deficit_unweighted}, {"deficit_weighted", c.deficit_weighted}});
  }
  rep.at_most("deficit_comparison", "deficit of v is at most (1-mu/(N-4))^{-3} times the deficit of u", worst_slack,
              1e-8);

  const CoefficientSet raw = raw_coefficients(p);
  rep.results = json{{"raw_coefficients", {raw.A, raw.B, raw.C, raw.D}},
                     {"collapsed_coefficients", {col.A, col.B, col.C, col.D}},
                     {"critical_integral_u", crit_u},
                     {"critical_integral_v", crit_v},
                     {"form_u", form_u},
                     {"form_v", form_v},
                     {"bound_factor", std::pow(p.b, -3.0)},
                     {"deficit_pairs", rows}};
  return rep;
}

/// 100 (k, N, mu) points: k in 1..4, N in 5..9, mu at five fractions of N-4.
inline std::vector<LiftConditions> lift_sweep() {
  std::vector<LiftConditions> out;
  for (int k = 1; k <= 4; ++k)
    for (int n = 5; n <= 9; ++n)
      for (double f : {0.05, 0.25, 0.5, 0.75, 0.95}) out.push_back(lift_conditions(k, derive_constants(n, f * (n - 4))));
  return out;
}

inline Report run_spectrum(const RunConfig& cfg) {
  const ParameterSet p = derive_constants(cfg.N, cfg.mu);
  const QuadratureConfig q = cfg.quadrature(p);
  Report rep{"spectrum", cfg};
  const double nu2_expected = p.nonlinear_exponent();

  std::vector<int> sectors = cfg.sectors;
  std::sort(sectors.begin(), sectors.end());
  sectors.erase(std::unique(sectors.begin(), sectors.end()), sectors.end());
  std::vector<SpectrumResult> res(sectors.size());
  std::vector<double> sym(sectors.size());
  parallel_for(static_cast<int>(sectors.size()), [&](int i) {
    const SectorOperator op = assemble_sector(sectors[i], p, cfg.grid());
    sym[i] = std::max(symmetry_defect(op.stiffness), symmetry_defect(op.mass));
    res[i] = solve_generalized(op, sectors[i] == 0 ? 4 : 3);
  });

  json out = json::array();
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    const int k = sectors[i];
    const SpectrumResult& r = res[i];
    const std::string tag = "k" + std::to_string(k) + "_";
    const double max_res = *std::max_element(r.residuals.begin(), r.residuals.end());
    const double max_rq = *std::max_element(r.rayleigh_errors.begin(), r.rayleigh_errors.end());
    rep.at_most(tag + "symmetry", "stiffness and mass are symmetric", sym[i], 1e-12);
    rep.at_most(tag + "residual", "|K x - nu M x| / |M x| for every returned pair", max_res, 1e-8);
    rep.at_most(tag + "rayleigh", "Rayleigh quotient of each eigenvector equals its eigenvalue", max_rq, 1e-8);
    json rec{{"k", k}, {"eigenvalues", r.eigenvalues}, {"residuals", r.residuals}, {"grid_size", r.grid_size()}};

    if (k == 0) {
      rep.relative("nu1", "nu_1 = 1, eigenfunction U_mu", 1.0, r.eigenvalues[0], 1e-3);
      rep.relative("nu2", "nu_2 = 2** - 1", nu2_expected, r.eigenvalues[1], 1e-3);
      rep.at_least("nu2_simple", "nu_2 is simple in the radial sector: nu_3 - nu_2 > 0.1 nu_2",
                   r.eigenvalues[2] - r.eigenvalues[1], 0.1 * r.eigenvalues[1]);
      rep.relative("nu3_radial", "radial nu_3 matches the conjugate unweighted eigenvalue",
                   radial_eigenvalue_closed_form(p.N, 3), r.eigenvalues[2], 1e-3);
      const EigenAlignment al = eigenfunction_alignment(r, q);
      rep.at_least("ground_alignment", "e_1 is parallel to U_mu", al.ground, 0.999);
      rep.at_least("scaling_alignment", "the nu_2 eigenspace is spanned by G", al.scaling, 0.999);
      rep.at_most("orthogonality", "<e_1, e_2>_mu = 0", std::abs(al.cross), 1e-6);
      const RefinementShift shift = refinement_shift(0, p, 3, cfg.grid(), 2 * cfg.grid_size);
      rep.at_most("refinement", "nu_1..nu_3 move less than 1e-4 when the grid is doubled", shift.max_shift(), 1e-4);
      rec["alignment"] = {{"ground", al.ground}, {"scaling", al.scaling}, {"cross", al.cross}};
      rec["refined_eigenvalues"] = shift.fine;
      rec["refinement_shift"] = shift.relative_shift;
      rec["local_bound"] = 1.0 - r.eigenvalues[1] / r.eigenvalues[2];
    } else {
      double margin = 1e300;
      for (double nu : r.eigenvalues) margin = std::min(margin, std::abs(nu / nu2_expected - 1.0));
      rep.at_least(tag + "nondegeneracy", "no eigenvalue of a k >= 1 sector within 1e-2 of 2** - 1", margin, 1e-2);
      const LiftConditions lc = lift_conditions(k, p);
      rep.at_most(tag + "lift_gamma", "(2**-1) Gamma_N <= Gamma_{N+2k}", lc.lhs_gamma - lc.rhs_gamma, 0.0);
      rep.at_least(tag + "lift_positivity", "positivity factor of the lifted equation", lc.positivity_factor, 0.0);
      rec["margin"] = margin;
      rec["lift"] = {{"lhs_gamma", lc.lhs_gamma}, {"rhs_gamma", lc.rhs_gamma}, {"positivity_factor", lc.positivity_factor}};
    }
    out.push_back(std::move(rec));
  }

  int sweep_fail = 0;
  double min_factor = 1e300;
  for (const LiftConditions& lc : lift_sweep()) {
    if (!lc.holds()) ++sweep_fail;
    min_factor = std::min(min_factor, lc.positivity_factor);
  }
  rep.absolute("lift_sweep", "lift conditions on 100 (k, N, mu) points", 0.0, sweep_fail, 0.0);
  const LiftConditions edge = lift_conditions(1, derive_constants(5, 0.5));
  rep.absolute("lift_boundary", "N = 5, k = 1 is the equality case 945 = 945", edge.rhs_gamma, edge.lhs_gamma, 0.0);

  rep.results = json{{"sectors", out}, {"lift_sweep_min_positivity", min_factor}};
  return rep;
}

inline Report run_stability(const RunConfig& cfg) {
  const ParameterSet p = derive_constants(cfg.N, cfg.mu);
  const QuadratureConfig q = cfg.quadrature(p);
  Report rep{"stability", cfg};

  const SpectrumResult radial = sector_spectrum(0, p, 12, cfg.grid());
  const RatioStudy study = local_ratio_study(p, q, cfg.sample_count, cfg.seed, radial);
  rep.samples = study.samples;

  double min_deficit = 1e300;
  for (const DeficitSample& s : study.samples) min_deficit = std::min(min_deficit, s.deficit);
  rep.at_least("deficit_nonnegative", "deficit >= 0 on every sample", min_deficit, -1e-9);
  rep.at_least("local_ratio", "deficit / dist^2 >= (1 - nu_2/nu_3)(1 - 0.05) at eps = 0.005", study.min_ratio,
               study.bound * 0.95);
  rep.relative("eigen_direction", "along e_3 the ratio approaches 1 - nu_2/nu_3", study.bound,
               study.eigen_direction_ratio, 0.05);

  // Taylor remainder along e_3.
  const TangentFrame frame = tangent_frame(p, q);
  const RadialProfile w = orthonormalize(radial.eigenfunction(2), frame, p, q);
  const TaylorCheck tc = taylor_check(w, {0.02, 0.01, 0.005}, p, q);
  double worst_drop = 1e300;
  for (std::size_t i = 1; i < tc.records.size(); ++i)
    worst_drop = std::min(worst_drop, std::abs(tc.records[i - 1].scaled) / std::abs(tc.records[i].scaled));
  rep.at_least("taylor_remainder", "R(eps)/eps^2 drops by at least 1.8 per halving of eps", worst_drop, 1.8);

  // Projection of a manifold point.
  const ManifoldProjection self = project_to_manifold(2.0 * make_bubble(p, 3.0).profile, p, q);
  rep.at_most("projection_fixed_point", "2 U_{mu,3} projects to itself", self.distance, 1e-7);
  rep.relative("projection_c", "c* = 2 for u = 2 U_{mu,3}", 2.0, self.c_star, 1e-7);
  rep.relative("projection_lam", "lam* = 3 for u = 2 U_{mu,3}", 3.0, self.lam_star, 1e-7);

  // Far profiles: the global ratio is positive.
  const GlobalStudy far = global_ratio_study(p, q, std::min(cfg.sample_count, 20), cfg.seed);
  rep.at_least("global_ratio", "deficit / dist^2 > 0 on profiles far from the manifold", far.min_ratio, 1e-12);

  // Spectral gap on orthogonalized profiles.
  double gap_worst = -1e300;
  const int gap_count = std::min(cfg.sample_count, 5);
  for (int i = 0; i < gap_count; ++i) {
    const SpectralGapCheck g = spectral_gap_check(random_far_profile(p, cfg.seed, 5000 + i), radial.eigenvalues[2], p, q);
    gap_worst = std::max(gap_worst, g.lhs / g.rhs);
  }
  rep.at_most("spectral_gap", "nu_3 int U^{2**-2} w^2 <= ||w||_mu^2 for w orthogonal to U and G", gap_worst,
              1.0 + 1e-3);

  json taylor = json::array();
  for (const TaylorRecord& r : tc.records)
    taylor.push_back({{"epsilon", r.epsilon}, {"remainder", r.remainder}, {"scaled", r.scaled}});
  rep.results = json{{"nu2", study.nu2},
                     {"nu3", study.nu3},
                     {"bound", study.bound},
                     {"min_ratio", study.min_ratio},
                     {"eigen_direction_ratio", study.eigen_direction_ratio},
                     {"taylor_coefficient", tc.second_order_coefficient},
                     {"taylor", taylor},
                     {"global_min_ratio", far.min_ratio},
                     {"spectral_gap_worst", gap_worst},
                     {"sample_count", study.samples.size()}};
  return rep;
}

inline Report run_report_all(const RunConfig& cfg) {
  Report rep{"report-all", cfg};
  for (const auto& run : {run_constants, run_extremal_check, run_transform_check, run_spectrum, run_stability})
    rep.merge(run(cfg));
  return rep;
}

inline const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"constants", "extremal-check", "transform-check",
                                              "spectrum",  "stability",      "report-all"};
  return names;
}

inline Report run_subcommand(std::string_view name, const RunConfig& cfg) {
  cfg.validate();
  if (name == "constants") return run_constants(cfg);
  if (name == "extremal-check") return run_extremal_check(cfg);
  if (name == "transform-check") return run_transform_check(cfg);
  if (name == "spectrum") return run_spectrum(cfg);
  if (name == "stability") return run_stability(cfg);
  if (name == "report-all") return run_report_all(cfg);
  throw UsageError("unknown subcommand '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string render(const Report& rep) {
  std::ostringstream os;
  if (rep.config.output_format == Format::json) {
    json checks = json::array();
    for (const CheckRow& r : rep.checks) checks.push_back(to_json(r));
    json doc{{"subcommand", rep.subcommand},
             {"config", to_json(rep.config)},
             {"results", rep.results},
             {"checks", checks},
             {"passed", rep.passed()}};
    if (!rep.samples.empty()) {
      json rows = json::array();
      for (const DeficitSample& s : rep.samples)
        rows.push_back({{"seed", rep.config.seed},
                        {"direction_id", s.direction_id},
                        {"epsilon", s.epsilon},
                        {"deficit", s.deficit},
                        {"distance", s.distance},
                        {"ratio", s.ratio}});
      doc["samples"] = rows;
    }
    os << doc.dump(2) << '\n';
  } else if (rep.subcommand == "stability") {
    os << "seed,direction_id,epsilon,deficit,distance,ratio\n";
    for (const DeficitSample& s : rep.samples)
      os << rep.config.seed << ',' << s.direction_id << ',' << format_number(s.epsilon) << ','
         << format_number(s.deficit) << ',' << format_number(s.distance) << ',' << format_number(s.ratio) << '\n';
  } else {
    os << "check,anchor,relation,expected,got,tolerance,pass\n";
    for (const CheckRow& r : rep.checks)
      os << csv_field(r.check) << ',' << csv_field(r.anchor) << ',' << csv_field(r.relation) << ','
         << format_number(r.expected) << ',' << format_number(r.got) << ',' << format_number(r.tolerance) << ','
         << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

inline void report_failures(const Report& rep, std::ostream& err) {
  for (const CheckRow& r : rep.checks) {
    if (r.pass) continue;
    err << json{{"check", r.check}, {"anchor", r.anchor}, {"relation", r.relation}, {"expected", r.expected},
                {"got", r.got},     {"tolerance", r.tolerance}}
               .dump()
        << '\n';
  }
}

/// Entry point of the hrl_verify tool. Exit codes: 0 all checks pass,
/// 1 a check failed or a computation did not converge, 2 usage or domain error.
inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical checks for a weighted biharmonic Sobolev inequality with Hardy terms"};
  app.require_subcommand(1, 1);
  for (const std::string& name : subcommand_names()) app.add_subcommand(name)->fallthrough();

  RunConfig flags;
  std::string format = "json";
  std::string config_path;
  auto* o_n = app.add_option("--N", flags.N, "dimension, N >= 5");
  auto* o_mu = app.add_option("--mu", flags.mu, "Hardy parameter, 0 < mu < N - 4");
  auto* o_grid = app.add_option("--grid-size", flags.grid_size, "spectral elements (also sets quadrature panels)");
  auto* o_tol = app.add_option("--rel-tol", flags.rel_tol, "relative quadrature tolerance");
  auto* o_sec = app.add_option("--sectors", flags.sectors, "spherical-harmonic sectors, e.g. 0,1,2")->delimiter(',');
  auto* o_samples = app.add_option("--samples", flags.sample_count, "directions in the ratio study");
  auto* o_seed = app.add_option("--seed", flags.seed, "random seed");
  auto* o_fmt = app.add_option("--format", format, "json or csv");
  auto* o_out = app.add_option("--out", flags.output_path, "report file (default: stdout)");
  app.add_option("--config", config_path, "flat JSON object with RunConfig fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  Report rep;
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    if (o_n->count()) cfg.N = flags.N;
    if (o_mu->count()) cfg.mu = flags.mu;
    if (o_grid->count()) cfg.grid_size = flags.grid_size;
    if (o_tol->count()) cfg.rel_tol = flags.rel_tol;
    if (o_sec->count()) cfg.sectors = flags.sectors;
    if (o_samples->count()) cfg.sample_count = flags.sample_count;
    if (o_seed->count()) cfg.seed = flags.seed;
    if (o_fmt->count()) cfg.output_format = parse_format(format);
    if (o_out->count()) cfg.output_path = flags.output_path;

    rep = run_subcommand(app.get_subcommands().front()->get_name(), cfg);
  } catch (const DomainError& e) {
    err << json{{"error", "domain"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << json{{"error", "computation"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }

  const std::string body = render(rep);
  if (rep.config.output_path.empty()) {
    out << body;
  } else {
    std::ofstream f(rep.config.output_path, std::ios::binary);
    if (!f) {
      err << json{{"error", "usage"}, {"message", "cannot write '" + rep.config.output_path + "'"}}.dump() << '\n';
      return 2;
    }
    f << body;
  }
  report_failures(rep, err);
  return rep.passed() ? 0 : 1;
}

}  // namespace hrl::cli

// Runs the ten acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "../oracles.hpp"
#include "hrl/cli.hpp"
#include "hrl/hrl.hpp"

using namespace hrl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

Outcome coefficient_collapse() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(5, 16);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = dim(rng);
    double f = frac(rng);
    while (f == 0.0) f = frac(rng);
    const CoefficientSet raw = raw_coefficients(derive_constants(n, f * (n - 4)));
    const CoefficientSet col = collapsed_coefficients(n);
    worst = std::max({worst, std::abs(raw.A - col.A), std::abs(raw.B - col.B), std::abs(raw.C - col.C),
                      std::abs(raw.D - col.D)});
  }
  return {worst < 1e-9, fmt("max |raw - collapsed| = %.3e over 50 pairs", worst)};
}

Outcome extremal_exactness() {
  double worst = 0.0;
  for (int n : {5, 6, 7})
    for (double f : {0.25, 0.5, 0.75}) {
      const ParameterSet p = derive_constants(n, f * (n - 4));
      const ExtremalBubble u = make_bubble(p);
      for (double r : cli::log_spaced(1e-3, 1e3, 50)) worst = std::max(worst, el_relative_residual(u.profile, p, r));
    }
  return {worst < 1e-6, fmt("max relative residual = %.3e", worst)};
}

Outcome equality_case() {
  const ParameterSet p = derive_constants(5, 0.5);
  const QuadratureConfig c = matched_config(p, 800);
  const double gap = std::abs(equality_case_check(p, c).relative_gap());
  const double ident = sharp_constant_identity(p, c).relative_error();
  return {gap < 1e-6 && ident < 1e-6, fmt("relative gap = %.3e, constant identity error = %.3e", gap, ident)};
}

Outcome spectrum() {
  const ParameterSet p = derive_constants(5, 0.5);
  const SpectrumResult r = sector_spectrum(0, p, 3, GridSpec{800});
  const double e1 = std::abs(r.eigenvalues[0] - 1.0);
  const double e2 = std::abs(r.eigenvalues[1] / p.nonlinear_exponent() - 1.0);
  const bool gap = r.eigenvalues[2] > r.eigenvalues[1];
  const double shift = refinement_shift(0, p, 3, GridSpec{800}, 1600).max_shift();
  const EigenAlignment al = eigenfunction_alignment(r, matched_config(p, 800));
  const bool ok = e1 < 1e-3 && e2 < 1e-3 && gap && shift < 1e-4 && al.ground > 0.999 && al.scaling > 0.999;
  return {ok, fmt("nu = (%.8f, %.8f, %.8f), refinement shift %.2e, alignments %.9f / %.9f", r.eigenvalues[0],
                  r.eigenvalues[1], r.eigenvalues[2], shift, al.ground, al.scaling)};
}

Outcome sector_exclusion() {
  const ParameterSet p = derive_constants(5, 0.5);
  const double target = p.nonlinear_exponent();
  double margin = 1e300;
  for (int k = 1; k <= 3; ++k)
    for (double nu : sector_spectrum(k, p, 4, GridSpec{800}).eigenvalues)
      margin = std::min(margin, std::abs(nu / target - 1.0));
  int bad = 0;
  const auto sweep = cli::lift_sweep();
  for (const LiftConditions& l : sweep)
    if (!l.holds()) ++bad;
  const LiftConditions edge = lift_conditions(1, p);
  const bool ok = margin > 1e-2 && bad == 0 && sweep.size() == 100 && edge.lhs_gamma == 945.0 &&
                  edge.rhs_gamma == 945.0;
  return {ok, fmt("closest relative distance to 2**-1 = %.4f, lift failures %d/%zu, boundary %g = %g", margin, bad,
                  sweep.size(), edge.lhs_gamma, edge.rhs_gamma)};
}

Outcome local_stability() {
  const ParameterSet p = derive_constants(5, 0.5);
  const QuadratureConfig c = matched_config(p, 800);
  const SpectrumResult radial = sector_spectrum(0, p, 12, GridSpec{800});
  RatioStudyOptions opt;
  opt.epsilons = {0.005};
  const RatioStudy s = local_ratio_study(p, c, 50, 1, radial, opt);
  const double dev = std::abs(s.eigen_direction_ratio / s.bound - 1.0);
  return {s.min_ratio >= s.bound * 0.95 && dev < 0.05,
          fmt("bound %.6f, min ratio %.6f, e_3 ratio %.6f (%.2f%% off)", s.bound, s.min_ratio,
              s.eigen_direction_ratio, 100.0 * dev)};
}

Outcome taylor() {
  const ParameterSet p = derive_constants(5, 0.5);
  const QuadratureConfig c = matched_config(p, 800);
  const SpectrumResult radial = sector_spectrum(0, p, 3, GridSpec{800});
  const RadialProfile w = orthonormalize(radial.eigenfunction(2), tangent_frame(p, c), p, c);
  const TaylorCheck t = taylor_check(w, {0.02, 0.01, 0.005}, p, c);
  const double d1 = std::abs(t.records[0].scaled / t.records[1].scaled);
  const double d2 = std::abs(t.records[1].scaled / t.records[2].scaled);
  return {d1 >= 1.8 && d2 >= 1.8, fmt("drop factors %.4f, %.4f", d1, d2)};
}

Outcome deficit_comparison_check() {
  const ParameterSet p = derive_constants(5, 0.5);
  const QuadratureConfig c = matched_config(p, 800);
  const RadialProfile u = make_bubble(p).profile;
  int bad = 0;
  double worst = -1e300;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const RadialProfile v = i < 10 ? u + 0.05 * static_cast<double>(i + 1) * random_far_profile(p, 8, i)
                                   : random_far_profile(p, 8, i);
    const DeficitComparison d = deficit_comparison(v, p, c);
    if (!d.ratio_bound_ok) ++bad;
    worst = std::max(worst, d.deficit_unweighted - d.bound_factor * d.deficit_weighted);
  }
  return {bad == 0, fmt("violations %d/20, max (unweighted - bound) = %.3e", bad, worst)};
}

Outcome projection() {
  const ParameterSet p = derive_constants(5, 0.5);
  const QuadratureConfig c = matched_config(p, 800);
  const RadialProfile U = make_bubble(p).profile;
  const double unorm2 = inner_product_mu(U, U, p, c);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> amp(0.5, 2.0), loglam(-1.5, 1.5), mix(0.1, 1.0);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const RadialProfile u =
        amp(rng) * make_bubble(p, std::exp(loglam(rng))).profile + mix(rng) * random_far_profile(p, 12, i);
    const double uu = inner_product_mu(u, u, p, c);
    const auto pairing = [&](double lam) { return inner_product_mu(u, make_bubble(p, lam).profile, p, c); };
    const oracle::GridProjection g = oracle::grid_projection(uu, unorm2, pairing, -4.0, 4.0, 1e-3, 1e3);
    worst = std::max(worst, std::abs(project_to_manifold(u, p, c).distance - g.distance));
  }
  const double self = project_to_manifold(2.0 * make_bubble(p, 3.0).profile, p, c).distance;
  return {worst < 1e-3 && self < 1e-7, fmt("max |line search - grid| = %.3e, manifold point distance %.3e", worst, self)};
}

Outcome determinism() {
  cli::RunConfig cfg;
  cfg.grid_size = 200;
  cfg.sample_count = 6;
  cfg.sectors = {0, 1};
  const std::string a = cli::render(cli::run_subcommand("report-all", cfg));
  const std::string b = cli::render(cli::run_subcommand("report-all", cfg));
  return {a == b, fmt("two report-all bodies of %zu bytes are %s (grid 200, 6 samples, sectors 0,1)", a.size(),
                      a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"coefficient collapse", coefficient_collapse},
      {"extremal exactness", extremal_exactness},
      {"equality case", equality_case},
      {"radial spectrum", spectrum},
      {"sector exclusion", sector_exclusion},
      {"local stability bound", local_stability},
      {"taylor remainder", taylor},
      {"deficit comparison", deficit_comparison_check},
      {"projection", projection},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %2d %-22s %s  %s  [%.1fs]\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed;
}

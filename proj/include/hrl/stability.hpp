#pragma once

// Deficit functional, distance to the extremal manifold
//   M_mu = { c U_{mu,lam} : c != 0, lam > 0 },
// and the sampled checks of the local ratio bound
//   deficit(u) / dist(u, M_mu)^2 >= 1 - nu_2/nu_3   (u near M_mu).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hrl/extremals.hpp"
#include "hrl/parallel.hpp"
#include "hrl/params.hpp"
#include "hrl/profile.hpp"
#include "hrl/quadrature.hpp"
#include "hrl/spectrum.hpp"

namespace hrl {

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ||u||_mu^2 - S_mu (int |u|^{2**})^{2/2**}, radial normalization.
inline double deficit(const RadialProfile& u, const ParameterSet& p, const QuadratureConfig& cfg) {
  const double form = inner_product_mu(u, u, p, cfg);
  const double crit = power_integral(u, p.two_crit, p.N, cfg);
  return form - radial_s_mu(p) * std::pow(crit, 2.0 / p.two_crit);
}

/// Independent stream for sample `stream` of a run seeded with `seed`.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Tangent frame at U_mu
// ---------------------------------------------------------------------------

/// cu U + cg G + scale * rest, evaluating the bubble once per point.
inline RadialProfile tangent_combination(const ExtremalBubble& bub, double cu, double cg,
                                         const RadialProfile& rest, double scale) {
  const double m = bub.params.scaling_exponent();
  return RadialProfile(
      [bub, m, cu, cg, rest, scale](double r) {
        const Jet5 u = bub.eval5(r);
        Jet out = scale == 0.0 ? Jet{} : scale * rest(r);
        for (std::size_t n = 0; n < 5; ++n) out.d[n] += cu * u[n] + cg * ((m + n) * u[n] + r * u[n + 1]);
        return out;
      },
      bub.profile.support_hint());
}

struct TangentFrame {
  ExtremalBubble bubble;
  RadialProfile generator;  // G = (N-4)/2 U + r U'
  double uu = 0.0;          // <U, U>_mu
  double ug = 0.0;          // <U, G>_mu, zero in exact arithmetic
  double gg = 0.0;          // <G, G>_mu
};

inline TangentFrame tangent_frame(const ParameterSet& p, const QuadratureConfig& cfg, double lam = 1.0) {
  TangentFrame f;
  f.bubble = make_bubble(p, lam);
  f.generator = scaling_generator(f.bubble);
  f.uu = inner_product_mu(f.bubble.profile, f.bubble.profile, p, cfg);
  f.ug = inner_product_mu(f.bubble.profile, f.generator, p, cfg);
  f.gg = inner_product_mu(f.generator, f.generator, p, cfg);
  return f;
}

/// (v - alpha U - beta G) / norm with <., U>_mu = <., G>_mu = 0 and unit mu-norm.
/// Throws SamplingError when v lies (numerically) in the tangent plane.
inline RadialProfile orthonormalize(const RadialProfile& v, const TangentFrame& f, const ParameterSet& p,
                                    const QuadratureConfig& cfg) {
  const double vu = inner_product_mu(v, f.bubble.profile, p, cfg);
  const double vg = inner_product_mu(v, f.generator, p, cfg);
  const double vv = inner_product_mu(v, v, p, cfg);
  const double det = f.uu * f.gg - f.ug * f.ug;
  const double alpha = (vu * f.gg - vg * f.ug) / det;
  const double beta = (vg * f.uu - vu * f.ug) / det;
  // |v - alpha U - beta G|^2 = |v|^2 - (alpha <v,U> + beta <v,G>)
  const double rest2 = vv - alpha * vu - beta * vg;
  if (!(rest2 > 1e-10 * vv)) {
    throw SamplingError("direction collapses under orthogonalization against span{U, G} (residual norm^2 " +
                        std::to_string(rest2) + " of " + std::to_string(vv) + ")");
  }
  const RadialProfile w = tangent_combination(f.bubble, -alpha, -beta, v, 1.0);
  const double n = norm_mu(w, p, cfg);
  return tangent_combination(f.bubble, -alpha / n, -beta / n, v, 1.0 / n);
}

// ---------------------------------------------------------------------------
// Projection onto M_mu
// ---------------------------------------------------------------------------

struct ManifoldProjection {
  double c_star = 0.0;
  double lam_star = 1.0;
  double distance = 0.0;           // |u - c* U_{lam*}|_mu
  double orth_residual_c = 0.0;    // <u - c* U, U>_mu
  double orth_residual_lam = 0.0;  // <u - c* U, G>_mu
  bool at_bracket_boundary = false;
};

struct ProjectionOptions {
  double lam_lo = 1e-3;
  double lam_hi = 1e3;
  std::vector<double> starts{0.1, 1.0, 10.0};
  double log_tol = 1e-8;
};

namespace detail {

/// <u, U_lam>_mu and <u, G_lam>_mu as functions of t = ln lam, from samples
/// of u on a fixed rule. Uses the weak Euler-Lagrange identities
///   <u, U>_mu = int U^{2**-1} u,   <u, G>_mu = (2**-1) int U^{2**-2} G u,
/// which need only values of u.
class BubblePairing {
 public:
  BubblePairing(const RadialProfile& u, const ParameterSet& p, const QuadratureConfig& cfg) : p_(p) {
    const NodeRule rule = make_rule(cfg, cfg.node_count);
    x_ = rule.x;
    a_.resize(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double r = std::exp(x_[i]);
      const double v = u.value(r);
      a_[i] = v == 0.0 ? 0.0 : rule.w[i] * v * std::exp(p.N * x_[i]);
    }
  }

  /// Returns (<u, U_lam>, <u, G_lam>).
  std::pair<double, double> at(double t) const {
    const double m = p_.scaling_exponent();
    const double e = p_.nonlinear_exponent();
    const double log_k = std::log(p_.k_coeff);
    double su = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (a_[i] == 0.0) continue;
      const double y = x_[i] + t;  // ln(lam r)
      const double z = 2.0 * p_.b * y;
      const double log_u = log_k + m * t + p_.a * y - m * softplus(z);
      const double q = 1.0 / (1.0 + std::exp(-z));
      const double up = std::exp(e * log_u);  // U^{2**-1}
      su += a_[i] * up;
      sg += a_[i] * up * (m + p_.a - 2.0 * p_.b * m * q);  // G/U = m + r U'/U
    }
    return {su, e * sg};
  }

 private:
  ParameterSet p_;
  std::vector<double> x_;
  std::vector<double> a_;
};

}  // namespace detail

/// Nearest point c* U_{lam*} to u in the mu-norm.
///
/// For fixed lam the best c is <u, U_lam>/|U|^2 and the squared distance is
/// |u|^2 - <u, U_lam>^2 / |U|^2, so the search maximizes <u, U_lam>^2 over
/// ln lam: golden section from each start, then secant steps on the tangency
/// condition <u, G_lam> = 0.
inline ManifoldProjection project_to_manifold(const RadialProfile& u, const ParameterSet& p,
                                              const QuadratureConfig& cfg, const ProjectionOptions& opt = {}) {
  if (!(opt.lam_lo > 0.0 && opt.lam_lo < opt.lam_hi)) throw DomainError("project_to_manifold: bad lambda bracket");
  const double uu = inner_product_mu(u, u, p, cfg);
  if (!(uu > 0.0)) throw DomainError("project_to_manifold: u must have positive mu-norm");

  const detail::BubblePairing pair(u, p, cfg);
  auto score = [&](double t) {
    const double s = pair.at(t).first;
    return s * s;
  };
  const double t_lo = std::log(opt.lam_lo);
  const double t_hi = std::log(opt.lam_hi);
  constexpr double kInvPhi = 0.6180339887498949;

  double best_t = 0.0;
  double best_f = -1.0;
  for (double start : opt.starts) {
    // Bracket a local maximum by walking uphill from the start.
    double step = 0.5;
    double t0 = std::clamp(std::log(start), t_lo, t_hi);
    double f0 = score(t0);
    const double dir = score(std::min(t0 + step, t_hi)) >= score(std::max(t0 - step, t_lo)) ? 1.0 : -1.0;
    double prev = t0 - dir * step;
    double t1 = t0;
    for (int it = 0; it < 60; ++it) {
      t1 = std::clamp(t0 + dir * step, t_lo, t_hi);
      const double f1 = score(t1);
      if (f1 <= f0 || t1 == t0) break;
      prev = t0;
      t0 = t1;
      f0 = f1;
      step *= 1.6;
    }
    double lo = std::max(std::min(prev, t1), t_lo);
    double hi = std::min(std::max(prev, t1), t_hi);
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = score(x1), f2 = score(x2);
    while (hi - lo > opt.log_tol) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = score(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = score(x1);
      }
    }
    const double t = 0.5 * (lo + hi);
    const double f = score(t);
    if (f > best_f) {
      best_f = f;
      best_t = t;
    }
  }

  // Secant polish on the tangency condition, kept close to the golden-section optimum.
  double t = best_t;
  {
    double ta = t - 1e-4, tb = t;
    double ha = pair.at(ta).second, hb = pair.at(tb).second;
    for (int it = 0; it < 30 && hb != ha; ++it) {
      const double tc = tb - hb * (tb - ta) / (hb - ha);
      if (!std::isfinite(tc) || std::abs(tc - best_t) > 1e-3) break;
      ta = tb;
      ha = hb;
      tb = tc;
      hb = pair.at(tb).second;
      if (std::abs(tb - ta) < 1e-15) break;
    }
    if (std::abs(tb - best_t) <= 1e-3 && score(tb) >= best_f * (1.0 - 1e-14)) t = tb;
  }
  t = std::clamp(t, t_lo, t_hi);

  ManifoldProjection out;
  out.lam_star = std::exp(t);
  out.at_bracket_boundary = (t - t_lo < 1e-6) || (t_hi - t < 1e-6);

  const TangentFrame f = tangent_frame(p, cfg, out.lam_star);
  out.c_star = pair.at(t).first / f.uu;
  const RadialProfile diff = tangent_combination(f.bubble, -out.c_star, 0.0, u, 1.0);
  QuadratureConfig dcfg = cfg;
  dcfg.abs_tol = std::max(cfg.abs_tol, 1e-18 * uu);  // resolves distances down to ~1e-9 |u|
  out.distance = std::sqrt(std::max(0.0, inner_product_mu(diff, diff, p, dcfg)));
  // The residuals vanish at the optimum, so only an absolute floor is meaningful.
  dcfg.abs_tol = std::max(cfg.abs_tol, 1e-12 * std::sqrt(uu * f.uu));
  out.orth_residual_c = inner_product_mu(diff, f.bubble.profile, p, dcfg);
  out.orth_residual_lam = inner_product_mu(diff, f.generator, p, dcfg);
  return out;
}

/// int U_{lam}^{2**-1} (u - c U_{lam}) r^{N-1} dr, the Euler-Lagrange form of tangency.
inline double tangency_moment(const RadialProfile& u, const ManifoldProjection& proj, const ParameterSet& p,
                              const QuadratureConfig& cfg) {
  const ExtremalBubble bub = make_bubble(p, proj.lam_star);
  const double e = p.nonlinear_exponent();
  return integrate_log(
             [&](double r) {
               const double ub = bub.value(r);
               const double v = u.value(r) - proj.c_star * ub;
               return v == 0.0 ? 0.0 : std::pow(ub, e) * v * std::pow(r, p.N);
             },
             cfg)
      .value;
}

// ---------------------------------------------------------------------------
// Second-order expansion of the critical integral
// ---------------------------------------------------------------------------

struct TaylorRecord {
  double epsilon = 0.0;
  double remainder = 0.0;  // R(eps)
  double scaled = 0.0;     // R(eps) / eps^2
};

struct TaylorCheck {
  double second_order_coefficient = 0.0;  // 2**(2**-1)/2
  double linear_moment = 0.0;             // int U^{2**-1} w, zero for admissible w
  std::vector<TaylorRecord> records;
};

inline double taylor_coefficient(const ParameterSet& p) { return 0.5 * p.two_crit * p.nonlinear_exponent(); }

/// R(eps) = int |U+eps w|^{2**} - int U^{2**} - eps^2 2**(2**-1)/2 int U^{2**-2} w^2.
///
/// The first-order term 2** eps int U^{2**-1} w vanishes for admissible w and
/// is subtracted pointwise so the integrand does not carry an O(eps) part
/// that cancels only after integration.
inline TaylorCheck taylor_check(const RadialProfile& w, const std::vector<double>& eps_list, const ParameterSet& p,
                                const QuadratureConfig& cfg, double tol = 1e-6) {
  const ExtremalBubble bub = make_bubble(p);
  const double pc = p.two_crit;
  const double norm = norm_mu(w, p, cfg);
  TaylorCheck out;
  out.second_order_coefficient = taylor_coefficient(p);
  out.linear_moment = integrate_log(
                          [&](double r) {
                            const double v = w.value(r);
                            return v == 0.0 ? 0.0 : std::pow(bub.value(r), pc - 1.0) * v * std::pow(r, p.N);
                          },
                          cfg)
                          .value;
  if (std::abs(norm - 1.0) > tol) throw DomainError("taylor_check: w must have unit mu-norm");
  if (std::abs(out.linear_moment) > tol * std::sqrt(inner_product_mu(bub.profile, bub.profile, p, cfg)))
    throw DomainError("taylor_check: w must satisfy int U^{2**-1} w = 0");

  const double c2 = out.second_order_coefficient;
  for (double eps : eps_list) {
    TaylorRecord rec;
    rec.epsilon = eps;
    if (eps != 0.0) {
      QuadratureConfig rcfg = cfg;
      rcfg.abs_tol = std::max(cfg.abs_tol, 1e-30);
      rec.remainder = integrate_log(
                          [&](double r) {
                            const double ub = bub.value(r);
                            const double wv = w.value(r);
                            if (ub == 0.0 || wv == 0.0) return 0.0;
                            const double x = eps * wv / ub;
                            // (1+x)^{2**} - 1 - 2** x - c2 x^2, times U^{2**}
                            const double full = x > -0.5 ? std::expm1(pc * std::log1p(x))
                                                         : std::pow(std::abs(1.0 + x), pc) - 1.0;
                            const double bracket = full - pc * x - c2 * x * x;
                            return bracket == 0.0 ? 0.0 : bracket * std::exp(pc * std::log(ub) + p.N * std::log(r));
                          },
                          rcfg)
                          .value;
      rec.scaled = rec.remainder / (eps * eps);
    }
    out.records.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampled ratio studies
// ---------------------------------------------------------------------------

struct DeficitSample {
  double epsilon = 0.0;
  int direction_id = 0;
  double deficit = 0.0;
  double distance = 0.0;
  double ratio = 0.0;  // deficit / distance^2
  double c_star = 0.0;
  double lam_star = 0.0;
};

inline DeficitSample measure_sample(const RadialProfile& u, const ParameterSet& p, const QuadratureConfig& cfg,
                                    double epsilon, int direction_id) {
  DeficitSample s;
  s.epsilon = epsilon;
  s.direction_id = direction_id;
  s.deficit = deficit(u, p, cfg);
  const ManifoldProjection proj = project_to_manifold(u, p, cfg);
  if (!(proj.distance > 0.0)) throw DomainError("ratio sample lies on the extremal manifold (distance 0)");
  s.distance = proj.distance;
  s.ratio = s.deficit / (s.distance * s.distance);
  s.c_star = proj.c_star;
  s.lam_star = proj.lam_star;
  return s;
}

struct RatioStudy {
  double nu2 = 0.0;
  double nu3 = 0.0;
  double bound = 0.0;            // 1 - nu2/nu3
  double min_ratio = 0.0;        // over the smallest-epsilon cohort
  double eigen_direction_ratio = 0.0;  // direction 0 (= e_3) at the smallest epsilon
  std::vector<DeficitSample> samples;
};

struct RatioStudyOptions {
  std::vector<double> epsilons{0.02, 0.01, 0.005};
  int pure_directions = 5;  // e_3, e_4, ... before the random combinations
  int mixing_pool = 10;     // random combinations draw from e_3 .. e_{2+pool}
};

/// Perturbations U + eps w along sample_count directions w, where w ranges
/// over k = 0 eigenfunctions of index >= 3 and random combinations of them,
/// orthonormalized against span{U, G}.
inline RatioStudy local_ratio_study(const ParameterSet& p, const QuadratureConfig& cfg, int sample_count,
                                    std::uint64_t seed, const SpectrumResult& radial,
                                    const RatioStudyOptions& opt = {}) {
  if (sample_count < 1) throw DomainError("local_ratio_study: sample_count must be >= 1");
  if (opt.epsilons.empty()) throw DomainError("local_ratio_study: empty epsilon list");
  for (double e : opt.epsilons)
    if (!(e > 0.0)) throw DomainError("local_ratio_study: epsilons must be > 0 (eps = 0 lies on the manifold)");
  const int needed = 2 + std::max(opt.pure_directions, opt.mixing_pool);
  if (radial.sector_k != 0 || static_cast<int>(radial.eigenvectors.size()) < needed)
    throw DomainError("local_ratio_study: needs " + std::to_string(needed) + " k = 0 eigenvectors");

  RatioStudy out;
  out.nu2 = radial.eigenvalues[1];
  out.nu3 = radial.eigenvalues[2];
  out.bound = 1.0 - out.nu2 / out.nu3;

  const TangentFrame frame = tangent_frame(p, cfg);
  const int n_eps = static_cast<int>(opt.epsilons.size());
  out.samples.resize(static_cast<std::size_t>(sample_count) * n_eps);

  parallel_for(sample_count, [&](int d) {
    Eigen::VectorXd coef;
    if (d < opt.pure_directions) {
      coef = radial.eigenvectors[2 + d];
    } else {
      std::mt19937_64 rng = sample_rng(seed, static_cast<std::uint64_t>(d));
      std::normal_distribution<double> normal;
      coef = Eigen::VectorXd::Zero(radial.eigenvectors[0].size());
      for (int j = 0; j < opt.mixing_pool; ++j) coef += normal(rng) * radial.eigenvectors[2 + j];
    }
    const RadialProfile v = spline_profile(radial.space, p, std::vector<double>(coef.data(), coef.data() + coef.size()));
    const RadialProfile w = orthonormalize(v, frame, p, cfg);
    for (int e = 0; e < n_eps; ++e) {
      const double eps = opt.epsilons[e];
      const RadialProfile u = tangent_combination(frame.bubble, 1.0, 0.0, w, eps);
      out.samples[static_cast<std::size_t>(d) * n_eps + e] = measure_sample(u, p, cfg, eps, d);
    }
  });

  const double eps_min = *std::min_element(opt.epsilons.begin(), opt.epsilons.end());
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (const DeficitSample& s : out.samples) {
    if (s.epsilon != eps_min) continue;
    out.min_ratio = std::min(out.min_ratio, s.ratio);
    if (s.direction_id == 0) out.eigen_direction_ratio = s.ratio;
  }
  return out;
}

/// Sum of two or three log-bumps with random centers, widths and signed
/// amplitudes; typically far from M_mu.
inline RadialProfile random_far_profile(const ParameterSet& p, std::uint64_t seed, std::uint64_t index) {
  std::mt19937_64 rng = sample_rng(seed, 0x9e3779b97f4a7c15ULL ^ index);
  std::uniform_real_distribution<double> center(-2.0 / p.b, 2.0 / p.b);
  std::uniform_real_distribution<double> width(0.4, 1.5);
  std::uniform_real_distribution<double> amp(0.3, 1.5);
  std::uniform_int_distribution<int> count(2, 3);
  std::bernoulli_distribution flip(0.5);
  const int n = count(rng);
  RadialProfile u = RadialProfile::zero();
  for (int i = 0; i < n; ++i) {
    const double a = amp(rng) * (flip(rng) ? -1.0 : 1.0);
    const double c = center(rng);
    const double w = width(rng) / p.b;
    u = i == 0 ? log_bump(p.N, a, c, w) : u + log_bump(p.N, a, c, w);
  }
  return u;
}

struct GlobalStudy {
  std::vector<DeficitSample> samples;  // direction_id is the profile index
  std::vector<double> relative_distance;  // distance / |u|_mu
  double min_ratio = 0.0;
};

/// Deficit / distance^2 on profiles with distance / |u|_mu > 0.5.
inline GlobalStudy global_ratio_study(const ParameterSet& p, const QuadratureConfig& cfg, int count,
                                      std::uint64_t seed) {
  GlobalStudy out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
  for (int accepted = 0; accepted < count; ++index) {
    if (index > static_cast<std::uint64_t>(50 * count)) throw SamplingError("could not draw enough far profiles");
    const RadialProfile u = random_far_profile(p, seed, index);
    const double norm = norm_mu(u, p, cfg);
    DeficitSample s = measure_sample(u, p, cfg, 0.0, static_cast<int>(index));
    if (s.distance / norm <= 0.5) continue;
    out.relative_distance.push_back(s.distance / norm);
    out.min_ratio = std::min(out.min_ratio, s.ratio);
    out.samples.push_back(s);
    ++accepted;
  }
  return out;
}

struct SpectralGapCheck {
  double lhs = 0.0;  // nu_3 int U^{2**-2} w^2
  double rhs = 0.0;  // |w|_mu^2
};

/// nu_3 int U^{2**-2} w^2 <= |w|_mu^2 for w orthogonal to span{U, G}.
inline SpectralGapCheck spectral_gap_check(const RadialProfile& v, double nu3, const ParameterSet& p,
                                           const QuadratureConfig& cfg) {
  const TangentFrame frame = tangent_frame(p, cfg);
  const RadialProfile w = orthonormalize(v, frame, p, cfg);
  return {nu3 * mass_form(w, w, p, cfg), inner_product_mu(w, w, p, cfg)};
}

}  // namespace hrl

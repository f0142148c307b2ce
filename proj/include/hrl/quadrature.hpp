#pragma once

// Weighted radial integrals int_0^inf f(r) r^{N-1-p} dr and the Rellich
// quadratic form. All integrals are bare radial integrals: the area of the
// unit sphere is never applied (see radial_constant in params.hpp).
//
// Integration runs in x = ln r on [ln r_min, ln r_max]. Accuracy is verified
// by node doubling; power-law tails beyond the window are added from the
// local logarithmic slope at each end.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrl/params.hpp"
#include "hrl/profile.hpp"

namespace hrl {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NonConvergenceError : public QuadratureError {
 public:
  using QuadratureError::QuadratureError;
};
class DivergenceError : public QuadratureError {
 public:
  using QuadratureError::QuadratureError;
};

enum class Mapping { log_uniform, double_exponential };

struct QuadratureConfig {
  int node_count = 2048;
  double rel_tol = 1e-10;
  double r_min = 1e-6;
  double r_max = 1e6;
  Mapping mapping = Mapping::log_uniform;
  int max_doublings = 3;
  double abs_tol = 0.0;  // accept when the doubling change is below this, whatever the scale

  void validate() const {
    if (node_count < 16) throw DomainError("QuadratureConfig: node_count must be >= 16");
    if (!(r_min > 0.0 && r_min < 1.0 && r_max > 1.0))
      throw DomainError("QuadratureConfig: need 0 < r_min < 1 < r_max");
    if (!(rel_tol > 0.0)) throw DomainError("QuadratureConfig: rel_tol must be > 0");
    if (!(abs_tol >= 0.0)) throw DomainError("QuadratureConfig: abs_tol must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Window matched to a parameter set.
//
// Extremal-type integrands decay like exp(-(N-4)|tau|) in tau = b ln r, so a
// half width L in tau leaves a relative tail of about e^{-(N-4)L}. The window
// is capped so r^{N+4} stays representable.
// ---------------------------------------------------------------------------

inline double log_r_cap(int N) { return 600.0 / (N + 4); }

/// Half width of the truncation window in tau = b ln r.
inline double tau_half_width(const ParameterSet& p) {
  const double wanted = std::max(8.0, 30.0 / (p.N - 4));
  return std::min(wanted, p.b * log_r_cap(p.N));
}

/// Quadrature window with one 16-point panel per spectral element, so panel
/// edges coincide with spline knots (see spectrum.hpp).
inline QuadratureConfig matched_config(const ParameterSet& p, int elements = 800,
                                       double rel_tol = 1e-10) {
  QuadratureConfig cfg;
  const double half = tau_half_width(p) / p.b;
  cfg.r_min = std::exp(-half);
  cfg.r_max = std::exp(half);
  cfg.node_count = 16 * elements;
  cfg.rel_tol = rel_tol;
  return cfg;
}

// ---------------------------------------------------------------------------
// Node rules
// ---------------------------------------------------------------------------

struct GaussRule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.x[i] = -z;
    g.x[n - 1 - i] = z;
    g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

inline const GaussRule& gauss16() {
  static const GaussRule rule = gauss_legendre(16);
  return rule;
}

/// Nodes x_i = ln r_i and weights for integration in d(ln r).
struct NodeRule {
  std::vector<double> x;
  std::vector<double> w;
  double x_lo = 0.0;
  double x_hi = 0.0;
};

inline NodeRule make_rule(const QuadratureConfig& cfg, int nodes) {
  NodeRule rule;
  rule.x_lo = std::log(cfg.r_min);
  rule.x_hi = std::log(cfg.r_max);
  const double span = rule.x_hi - rule.x_lo;
  if (cfg.mapping == Mapping::log_uniform) {
    const GaussRule& g = gauss16();
    const int panels = std::max(1, nodes / 16);
    const double h = span / panels;
    rule.x.reserve(panels * 16);
    rule.w.reserve(panels * 16);
    for (int p = 0; p < panels; ++p) {
      const double mid = rule.x_lo + (p + 0.5) * h;
      for (int i = 0; i < 16; ++i) {
        rule.x.push_back(mid + 0.5 * h * g.x[i]);
        rule.w.push_back(0.5 * h * g.w[i]);
      }
    }
  } else {
    // x = mid + alpha sinh(t), t uniform (trapezoid); the window edges map to
    // t = +-T. alpha is a quarter of the half span so the interior is dense.
    const double mid = 0.5 * (rule.x_lo + rule.x_hi);
    const double half = 0.5 * span;
    const double alpha = 0.25 * half;
    const double t_max = std::asinh(half / alpha);
    const int m = std::max(2, nodes);
    const double ht = 2.0 * t_max / (m - 1);
    rule.x.reserve(m);
    rule.w.reserve(m);
    for (int i = 0; i < m; ++i) {
      const double t = -t_max + i * ht;
      const double trap = (i == 0 || i == m - 1) ? 0.5 : 1.0;
      rule.x.push_back(mid + alpha * std::sinh(t));
      rule.w.push_back(trap * ht * alpha * std::cosh(t));
    }
  }
  return rule;
}

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double abs_integral = 0.0;  // int |g|, the scale used for relative tolerances
  int nodes = 0;
};

namespace detail {

struct RuleSum {
  double value = 0.0;
  double abs_value = 0.0;
};

/// Estimates int beyond an endpoint from the two outermost samples, assuming
/// exponential decay in x. Returns 0 when the samples show no clean decay.
inline double tail_estimate(double x_end, double x_a, double g_a, double x_b, double g_b,
                            double abs_scale, double tol, bool& diverging) {
  if (g_a == 0.0 || g_b == 0.0 || (g_a > 0.0) != (g_b > 0.0)) return 0.0;
  const double dx = std::abs(x_b - x_a);
  if (dx <= 0.0) return 0.0;
  const double kappa = std::log(g_b / g_a) / dx;
  if (!(kappa > 0.0)) {
    if (std::abs(g_a) > tol * std::max(abs_scale, 1e-300)) diverging = true;
    return 0.0;
  }
  return g_a * std::exp(-kappa * std::abs(x_end - x_a)) / kappa;
}

template <class G>
RuleSum apply_rule(const NodeRule& rule, G&& g, double tol, bool tails, bool& diverging) {
  RuleSum s;
  const std::size_t n = rule.x.size();
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = g(std::exp(rule.x[i]));
    if (!std::isfinite(v)) {
      throw QuadratureError("integrand is not finite at r = " + std::to_string(std::exp(rule.x[i])));
    }
    vals[i] = v;
    s.value += rule.w[i] * v;
    s.abs_value += rule.w[i] * std::abs(v);
  }
  if (tails && n >= 2) {
    s.value += tail_estimate(rule.x_lo, rule.x[0], vals[0], rule.x[1], vals[1], s.abs_value, tol,
                             diverging);
    s.value += tail_estimate(rule.x_hi, rule.x[n - 1], vals[n - 1], rule.x[n - 2], vals[n - 2],
                             s.abs_value, tol, diverging);
  }
  return s;
}

}  // namespace detail

/// Integrates g(r) d(ln r) = int g(r)/r dr over (0, inf).
template <class G>
QuadResult integrate_log(G&& g, const QuadratureConfig& cfg) {
  cfg.validate();
  int n = cfg.node_count;
  bool diverging = false;
  detail::RuleSum coarse = detail::apply_rule(make_rule(cfg, n), g, cfg.rel_tol, true, diverging);
  for (int d = 0; d <= cfg.max_doublings; ++d) {
    const int n2 = 2 * n;
    bool div2 = false;
    const detail::RuleSum fine = detail::apply_rule(make_rule(cfg, n2), g, cfg.rel_tol, true, div2);
    if (div2) {
      throw DivergenceError("integrand grows toward the edge of the window [" +
                            std::to_string(cfg.r_min) + ", " + std::to_string(cfg.r_max) + "]");
    }
    const double err = std::abs(fine.value - coarse.value);
    const double scale = std::max(fine.abs_value, 1e-300);
    const bool last = (d == cfg.max_doublings);
    if (err <= cfg.rel_tol * scale || err <= cfg.abs_tol || (last && err <= 10.0 * cfg.rel_tol * scale)) {
      return QuadResult{fine.value, err, fine.abs_value, n2};
    }
    if (last) {
      throw NonConvergenceError("node doubling changed the integral by " + std::to_string(err / scale) +
                                " (relative), tolerance " + std::to_string(cfg.rel_tol));
    }
    coarse = fine;
    n = n2;
  }
  throw NonConvergenceError("unreachable");
}

/// int_0^inf f(r) r^{N-1-p} dr.
template <class F>
double integrate_radial(F&& f, int N, int p, const QuadratureConfig& cfg) {
  const double power = N - p;
  return integrate_log(
             [&](double r) {
               const double v = f(r);
               return v == 0.0 ? 0.0 : v * std::pow(r, power);
             },
             cfg)
      .value;
}

/// Coefficients of the quadratic form
///   int Lap u Lap v r^{N-1} - c1 int u'v' r^{N-3} + c2 int u v r^{N-5}.
struct FormCoefficients {
  int N = 5;
  double c1 = 0.0;
  double c2 = 0.0;

  static FormCoefficients of(const ParameterSet& p) { return {p.N, p.c1, p.c2}; }
  static FormCoefficients bilaplacian(int N) { return {N, 0.0, 0.0}; }
};

/// Integrand of the form with respect to d(ln r), evaluated from two jets.
inline double form_density(const Jet& u, const Jet& v, double r, const FormCoefficients& f) {
  const double lu = u[2] + (f.N - 1) * u[1] / r;
  const double lv = v[2] + (f.N - 1) * v[1] / r;
  const double r2 = r * r;
  const double bulk = lu * lv - f.c1 * u[1] * v[1] / r2 + f.c2 * u[0] * v[0] / (r2 * r2);
  return bulk == 0.0 ? 0.0 : bulk * std::pow(r, f.N);
}

inline QuadResult quadratic_form_detailed(const RadialProfile& u, const RadialProfile& v,
                                          const FormCoefficients& f, const QuadratureConfig& cfg) {
  return integrate_log([&](double r) { return form_density(u(r), v(r), r, f); }, cfg);
}

inline double quadratic_form(const RadialProfile& u, const RadialProfile& v, const FormCoefficients& f,
                             const QuadratureConfig& cfg) {
  return quadratic_form_detailed(u, v, f, cfg).value;
}

/// <u, v>_mu as a bare radial integral.
inline double inner_product_mu(const RadialProfile& u, const RadialProfile& v, const ParameterSet& p,
                               const QuadratureConfig& cfg) {
  return quadratic_form(u, v, FormCoefficients::of(p), cfg);
}

inline double norm_mu(const RadialProfile& u, const ParameterSet& p, const QuadratureConfig& cfg) {
  return std::sqrt(std::max(0.0, inner_product_mu(u, u, p, cfg)));
}

/// int |u|^exponent r^{N-1} dr.
inline double power_integral(const RadialProfile& u, double exponent, int N, const QuadratureConfig& cfg) {
  return integrate_log(
             [&](double r) {
               const double v = std::abs(u.value(r));
               return v == 0.0 ? 0.0 : std::exp(exponent * std::log(v) + N * std::log(r));
             },
             cfg)
      .value;
}

/// (int |u|^exponent r^{N-1} dr)^{1/exponent}.
inline double lp_norm(const RadialProfile& u, double exponent, int N, const QuadratureConfig& cfg) {
  if (!(exponent >= 1.0)) throw DomainError("lp_norm: exponent must be >= 1");
  const double i = power_integral(u, exponent, N, cfg);
  return i <= 0.0 ? 0.0 : std::pow(i, 1.0 / exponent);
}

}  // namespace hrl

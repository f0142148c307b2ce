#pragma once

// The change of variables u(r) = r^a v(r^b), a = -mu/2, b = 1 - mu/(N-4),
// which maps the weighted radial problem onto the unweighted one.
//
// Norm relations (radial, bare integrals), obtained by substituting s = r^b,
// ds = b r^{b-1} dr, and using N - mu N/(N-4) = N b:
//
//   int |u|^{2**} r^{N-1} dr = b^{-1} int |v|^{2**} s^{N-1} ds
//   ||u||_mu^2               = b^3    int (Lap_s v)^2 s^{N-1} ds
//
// The second identity is where the coefficient collapse below does its work;
// together they give S_mu = b^{4-4/N} S_0 and
//   deficit_unweighted(v) = b^{-3} deficit_weighted(u).

#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hrl/extremals.hpp"
#include "hrl/params.hpp"
#include "hrl/profile.hpp"
#include "hrl/quadrature.hpp"

namespace hrl {

/// Transformed ODE v'''' + A v'''/s + B v''/s^2 - C v'/s^3 + D v/s^4 = b^{-4} v^{2**-1}.
struct CoefficientSet {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
};

namespace detail {

template <class T>
CoefficientSet raw_brackets(int N, double mu_in) {
  const T mu = mu_in;
  const T n4 = N - 4;
  const T a = -mu / 2;
  const T b = 1 - mu / n4;
  const T t = mu * (2 * n4 - mu);
  const T c1 = T(N * N - 4 * N + 8) / (2 * n4 * n4) * t;
  const T c2 = T(N * N) / (16 * n4 * n4) * t * t - T(N - 2) / 2 * t;
  const T n1 = N - 1;
  const T n3 = N - 3;
  const T second = n1 * n3 + c1;  // coefficient of u''/r^2
  const T first = n3 * (n1 - c1);  // coefficient of -u'/r^3
  const T pab = a * (a - 1) + (2 * a + b - 1) * (a + b - 2);

  const T A = ((3 * a + 3 * b - 3) + (a + 3 * b - 3) + 2 * n1) / b;
  const T B = ((pab + (3 * a + 3 * b - 3) * (a + 2 * b - 3)) + 2 * n1 * (3 * a + 3 * b - 3) + second) / (b * b);
  const T C = -((pab * (a + b - 3) + a * (a - 1) * (a - 2)) + 2 * n1 * pab + second * (2 * a + b - 1) - first) /
              (b * b * b);
  const T D = (a * (a - 1) * (a - 2) * (a - 3) + 2 * n1 * a * (a - 1) * (a - 2) + second * a * (a - 1) - first * a +
               c2) /
              (b * b * b * b);
  return {static_cast<double>(A), static_cast<double>(B), static_cast<double>(C), static_cast<double>(D)};
}

}  // namespace detail

/// The four coefficients evaluated from the unsimplified chain-rule brackets.
///
/// The bracket multiplying v'/s^3 comes out of the chain rule with a plus
/// sign; C is its negative so that the equation reads "- C v'/s^3".
/// The brackets cancel to O(1) from terms of size N^4 and are then divided by
/// b^4, so they are evaluated in 113-bit arithmetic from (N, mu) directly.
inline CoefficientSet raw_coefficients(const ParameterSet& p) {
  return detail::raw_brackets<boost::multiprecision::cpp_bin_float_quad>(p.N, p.mu);
}

/// A = 2(N-1), B = C = (N-1)(N-3), D = 0.
inline CoefficientSet collapsed_coefficients(int N) {
  return {2.0 * (N - 1), (N - 1.0) * (N - 3.0), (N - 1.0) * (N - 3.0), 0.0};
}

/// Residual of the transformed equation at s, using the coefficients `c`.
inline double transformed_residual(const RadialProfile& v, const ParameterSet& p, const CoefficientSet& c,
                                   double s) {
  if (!(s > 0.0)) throw DomainError("transformed_residual: s must be > 0");
  const Jet j = v(s);
  const double s2 = s * s;
  const double lin = j[4] + c.A * j[3] / s + c.B * j[2] / s2 - c.C * j[1] / (s2 * s) + c.D * j[0] / (s2 * s2);
  return lin - std::pow(p.b, -4.0) * signed_power(j[0], p.nonlinear_exponent());
}

/// K (1 + s^2)^{-(N-4)/2}, the image of U_mu under push_forward.
inline RadialProfile transformed_bubble(const ParameterSet& p) {
  const double m = p.scaling_exponent();
  const double k = p.k_coeff;
  // (1+s^2)^{-m} = s^{-m} (2 cosh tau)^{-m} with tau = ln s.
  return log_power_profile(-m, 1.0, [m, k](double tau) {
    // g = k (2 cosh tau)^{-m}, differentiated with t = tanh tau: g' = -m t g, t' = 1 - t^2.
    const double t = std::tanh(tau);
    const double g = k * std::exp(-m * (std::abs(tau) + std::log1p(std::exp(-2.0 * std::abs(tau)))));
    const double t2 = t * t;
    const double s1 = 1.0 - t2;
    LogJet out{};
    out[0] = g;
    out[1] = -m * t * g;
    out[2] = g * (m * m * t2 - m * s1);
    out[3] = g * (-m * m * m * t2 * t + 3.0 * m * m * t * s1 + 2.0 * m * t * s1);
    out[4] = g * (m * m * m * m * t2 * t2 - 6.0 * m * m * m * t2 * s1 - 8.0 * m * m * t2 * s1 +
                  3.0 * m * m * s1 * s1 + 2.0 * m * s1 * s1 - 4.0 * m * t2 * s1);
    return out;
  });
}

/// int |u|^{2**} r^{N-1} dr / int |v|^{2**} s^{N-1} ds.
inline double critical_norm_jacobian(const ParameterSet& p) { return 1.0 / p.b; }
/// ||u||_mu^2 / int (Lap_s v)^2 s^{N-1} ds.
inline double form_jacobian(const ParameterSet& p) { return p.b * p.b * p.b; }

/// v(s) = s^{-a/b} u(s^{1/b}).
inline RadialProfile push_forward(const RadialProfile& u, const ParameterSet& p) {
  const double gamma = -p.a / p.b;
  if (!(p.b > 0.0 && p.b < 1.0 + 1e-15)) throw DomainError("push_forward: transform exponent b out of range");
  std::optional<DecayHint> hint;
  if (u.support_hint()) {
    // r^alpha = s^{alpha/b}; the extra s^gamma shifts both exponents.
    hint = DecayHint{u.support_hint()->at_zero / p.b + gamma, u.support_hint()->at_infinity / p.b - gamma};
  }
  const double inv_b = 1.0 / p.b;
  return RadialProfile(
      [u, gamma, inv_b](double s) {
        const double r = std::exp(std::log(s) * inv_b);
        ThetaMoments t = theta_moments(u(r), r);
        // theta_s = theta_r / b
        double f = 1.0;
        for (double& x : t) {
          x *= f;
          f *= inv_b;
        }
        return jet_of_power_product(gamma, t, s);
      },
      hint);
}

/// u(r) = r^a v(r^b).
inline RadialProfile pull_back(const RadialProfile& v, const ParameterSet& p) {
  const double a = p.a;
  const double b = p.b;
  std::optional<DecayHint> hint;
  if (v.support_hint()) {
    hint = DecayHint{v.support_hint()->at_zero * b + a, v.support_hint()->at_infinity * b - a};
  }
  return RadialProfile(
      [v, a, b](double r) {
        const double s = std::exp(b * std::log(r));
        ThetaMoments t = theta_moments(v(s), s);
        double f = 1.0;
        for (double& x : t) {
          x *= f;
          f *= b;
        }
        return jet_of_power_product(a, t, r);
      },
      hint);
}

/// Quadrature window in s = r^b matching a window in r.
inline QuadratureConfig transformed_config(const QuadratureConfig& cfg, const ParameterSet& p) {
  QuadratureConfig out = cfg;
  out.r_min = std::pow(cfg.r_min, p.b);
  out.r_max = std::pow(cfg.r_max, p.b);
  return out;
}

struct DeficitComparison {
  double deficit_unweighted = 0.0;  // int (Lap v)^2 - S_0 (int |v|^{2**})^{2/2**}
  double deficit_weighted = 0.0;    // ||u||_mu^2 - S_mu (int |u|^{2**})^{2/2**}
  double bound_factor = 0.0;        // (1 - mu/(N-4))^{-3}
  bool ratio_bound_ok = false;
};

/// Compares the unweighted deficit of v = push_forward(u) with the weighted
/// deficit of u. `tol` is the absolute slack in the bound.
inline DeficitComparison deficit_comparison(const RadialProfile& u, const ParameterSet& p,
                                            const QuadratureConfig& cfg, double tol = 1e-8) {
  const RadialProfile v = push_forward(u, p);
  const QuadratureConfig vcfg = transformed_config(cfg, p);
  const double pc = p.two_crit;

  DeficitComparison out;
  const double form_v = quadratic_form(v, v, FormCoefficients::bilaplacian(p.N), vcfg);
  const double crit_v = power_integral(v, pc, p.N, vcfg);
  out.deficit_unweighted = form_v - radial_s0(p) * std::pow(crit_v, 2.0 / pc);

  const double form_u = inner_product_mu(u, u, p, cfg);
  const double crit_u = power_integral(u, pc, p.N, cfg);
  out.deficit_weighted = form_u - radial_s_mu(p) * std::pow(crit_u, 2.0 / pc);

  out.bound_factor = std::pow(p.b, -3.0);
  out.ratio_bound_ok = out.deficit_unweighted <= out.bound_factor * out.deficit_weighted + tol;
  return out;
}

}  // namespace hrl

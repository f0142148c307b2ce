#pragma once

// The extremal family
//
//   U_{mu,lam}(r) = lam^{(N-4)/2} U_mu(lam r),
//   U_mu(r)       = K r^{-mu/2} (1 + r^{2b})^{-(N-4)/2},
//
// its derivatives in closed form, the radial Euler-Lagrange residual, and the
// equality-case checks.

#include <array>
#include <cmath>
#include <memory>

#include "hrl/params.hpp"
#include "hrl/profile.hpp"
#include "hrl/quadrature.hpp"

namespace hrl {

/// Value and first five derivatives; the fifth feeds the scaling generator.
using Jet5 = std::array<double, 6>;

namespace detail {

inline double falling(double x, int n) {
  double out = 1.0;
  for (int i = 0; i < n; ++i) out *= (x - i);
  return out;
}

/// Partial Bell polynomials B_{j,i}(x_1, ..., x_{j-i+1}) for j <= 5.
inline double bell(int j, int i, const std::array<double, 6>& x) {
  if (j == 0 && i == 0) return 1.0;
  if (i == 0 || i > j) return 0.0;
  switch (j) {
    case 1:
      return x[1];
    case 2:
      return i == 1 ? x[2] : x[1] * x[1];
    case 3:
      if (i == 1) return x[3];
      if (i == 2) return 3.0 * x[1] * x[2];
      return x[1] * x[1] * x[1];
    case 4:
      if (i == 1) return x[4];
      if (i == 2) return 4.0 * x[1] * x[3] + 3.0 * x[2] * x[2];
      if (i == 3) return 6.0 * x[1] * x[1] * x[2];
      return x[1] * x[1] * x[1] * x[1];
    case 5:
      if (i == 1) return x[5];
      if (i == 2) return 5.0 * x[1] * x[4] + 10.0 * x[2] * x[3];
      if (i == 3) return 10.0 * x[1] * x[1] * x[3] + 15.0 * x[1] * x[2] * x[2];
      if (i == 4) return 10.0 * x[1] * x[1] * x[1] * x[2];
      return x[1] * x[1] * x[1] * x[1] * x[1];
    default:
      return 0.0;
  }
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace detail

/// Closed-form U_mu with derivatives through order five.
///
/// With q = r^{2b} / (1 + r^{2b}), the Leibniz ladder over the power factor
/// r^a and the binomial factor h = (1 + r^{2b})^{-m} gives
///   r^n U^(n) / U = sum_j C(n,j) (a)_{n-j} r^j h^(j) / h,
/// and Faa di Bruno on h(w), w = r^{2b}, gives
///   r^j h^(j) / h = sum_i (-m)_i q^i B_{j,i}((2b)_1, (2b)_2, ...),
/// where (x)_n is the falling factorial. Each ratio is a polynomial in q.
class BubbleKernel {
 public:
  explicit BubbleKernel(const ParameterSet& p) : log_k_(std::log(p.k_coeff)), a_(p.a), b_(p.b) {
    const double m = p.scaling_exponent();
    std::array<double, 6> f{};
    for (int l = 1; l <= 5; ++l) f[l] = detail::falling(2.0 * b_, l);
    // binomial factor: coefficient of q^i in r^j h^(j)/h
    std::array<std::array<double, 6>, 6> h{};
    for (int j = 0; j <= 5; ++j)
      for (int i = 0; i <= j; ++i) h[j][i] = detail::falling(-m, i) * detail::bell(j, i, f);
    for (int n = 0; n <= 5; ++n) {
      double binom = 1.0;
      for (int j = 0; j <= n; ++j) {
        if (j > 0) binom = binom * (n - j + 1) / j;
        const double pf = detail::falling(a_, n - j);
        for (int i = 0; i <= j; ++i) coeff_[n][i] += binom * pf * h[j][i];
      }
    }
    m_ = m;
  }

  /// U_mu and its first five derivatives at r > 0.
  Jet5 eval(double r) const {
    const double lr = std::log(r);
    const double x = 2.0 * b_ * lr;
    const double q = 1.0 / (1.0 + std::exp(-x));
    const double u = std::exp(log_k_ + a_ * lr - m_ * detail::softplus(x));
    Jet5 out{};
    double rn = 1.0;
    for (int n = 0; n <= 5; ++n) {
      double poly = 0.0;
      for (int i = n; i >= 0; --i) poly = poly * q + coeff_[n][i];
      out[n] = u * poly / rn;
      rn *= r;
    }
    return out;
  }

 private:
  double log_k_;
  double a_;
  double b_;
  double m_ = 0.0;
  std::array<std::array<double, 6>, 6> coeff_{};
};

struct ExtremalBubble {
  ParameterSet params;
  double lam = 1.0;
  std::shared_ptr<const BubbleKernel> kernel;
  RadialProfile profile;

  /// U_{mu,lam} and five derivatives at r.
  Jet5 eval5(double r) const {
    const double m = params.scaling_exponent();
    Jet5 base = kernel->eval(lam * r);
    double scale = std::pow(lam, m);
    for (double& d : base) {
      d *= scale;
      scale *= lam;
    }
    return base;
  }
  double value(double r) const { return eval5(r)[0]; }
};

inline ExtremalBubble make_bubble(const ParameterSet& p, double lam = 1.0) {
  if (!(lam > 0.0) || !std::isfinite(lam)) throw DomainError("make_bubble: lambda must be > 0");
  ExtremalBubble bub;
  bub.params = p;
  bub.lam = lam;
  bub.kernel = std::make_shared<const BubbleKernel>(p);
  const double m = p.scaling_exponent();
  const double nb = p.N - 4.0;
  // U ~ r^{-mu/2} at 0 and U ~ r^{-(N-4) + mu/2} at infinity.
  const DecayHint hint{p.a, nb * p.b - p.a};
  bub.profile = RadialProfile(
      [kernel = bub.kernel, lam, m](double r) {
        const Jet5 j = kernel->eval(lam * r);
        Jet out;
        double scale = std::pow(lam, m);
        for (std::size_t n = 0; n < 5; ++n) {
          out.d[n] = scale * j[n];
          scale *= lam;
        }
        return out;
      },
      hint);
  return bub;
}

/// G = (N-4)/2 U_{mu,lam} + r U_{mu,lam}', equal to lam d/dlam U_{mu,lam}.
inline RadialProfile scaling_generator(const ExtremalBubble& bub) {
  const double m = bub.params.scaling_exponent();
  return RadialProfile([bub, m](double r) {
    const Jet5 u = bub.eval5(r);
    Jet g;
    // (r u')^(n) = n u^(n) + r u^(n+1)
    for (std::size_t n = 0; n < 5; ++n) g.d[n] = (m + n) * u[n] + r * u[n + 1];
    return g;
  });
}

/// Sign-preserving |u|^{p-1} sign(u).
inline double signed_power(double u, double p) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), p), u);
}

/// Radial Euler-Lagrange residual
///   u'''' + 2(N-1)u'''/r + [(N-1)(N-3)+C1] u''/r^2 - (N-3)(N-1-C1) u'/r^3
///   + C2 u/r^4 - u^{(N+4)/(N-4)}.
inline double el_residual(const RadialProfile& u, const ParameterSet& p, double r) {
  if (!(r > 0.0)) throw DomainError("el_residual: r must be > 0 (operator is singular at the origin)");
  const Jet j = u(r);
  const int N = p.N;
  const double r2 = r * r;
  const double lin = j[4] + 2.0 * (N - 1) * j[3] / r + ((N - 1.0) * (N - 3.0) + p.c1) * j[2] / r2 -
                     (N - 3.0) * (N - 1.0 - p.c1) * j[1] / (r2 * r) + p.c2 * j[0] / (r2 * r2);
  return lin - signed_power(j[0], p.nonlinear_exponent());
}

/// |residual| / |u|^{2**-1}, invariant under the lambda scaling.
inline double el_relative_residual(const RadialProfile& u, const ParameterSet& p, double r) {
  const double res = el_residual(u, p, r);
  const double nl = std::pow(std::abs(u.value(r)), p.nonlinear_exponent());
  return nl == 0.0 ? std::abs(res) : std::abs(res) / nl;
}

struct EqualityCase {
  double lhs = 0.0;        // ||U||_mu^2
  double rhs = 0.0;        // S_mu (int U^{2**})^{2/2**}
  double gap = 0.0;        // lhs - rhs
  double critical = 0.0;   // int U^{2**}
  double relative_gap() const { return gap / lhs; }
};

inline EqualityCase equality_case_check(const ParameterSet& p, const QuadratureConfig& cfg,
                                        double lam = 1.0) {
  const ExtremalBubble bub = make_bubble(p, lam);
  EqualityCase out;
  out.lhs = inner_product_mu(bub.profile, bub.profile, p, cfg);
  out.critical = power_integral(bub.profile, p.two_crit, p.N, cfg);
  out.rhs = radial_s_mu(p) * std::pow(out.critical, 2.0 / p.two_crit);
  out.gap = out.lhs - out.rhs;
  return out;
}

struct SharpConstantIdentity {
  double from_norm = 0.0;     // ||U||_mu^{2 - 4/2**}
  double from_formula = 0.0;  // closed-form S_mu, radial normalization
  double relative_error() const { return std::abs(from_norm - from_formula) / from_formula; }
};

/// Recovers S_mu from the extremal alone: ||U||^2 = int U^{2**} and equality
/// in the inequality give S_mu = ||U||_mu^{2 - 4/2**}.
inline SharpConstantIdentity sharp_constant_identity(const ParameterSet& p, const QuadratureConfig& cfg) {
  const ExtremalBubble bub = make_bubble(p);
  const double norm2 = inner_product_mu(bub.profile, bub.profile, p, cfg);
  return {std::pow(norm2, 1.0 - 2.0 / p.two_crit), radial_s_mu(p)};
}

}  // namespace hrl

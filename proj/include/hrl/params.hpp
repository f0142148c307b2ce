#pragma once

// Admissible parameter range and closed-form constants of the weighted
// biharmonic Sobolev inequality with Hardy terms
//
//   int |Lap u|^2 - C1 int |grad u|^2/|x|^2 + C2 int u^2/|x|^4
//       >= S_mu (int |u|^{2**})^{2/2**},      2** = 2N/(N-4),
//
// for N >= 5 and 0 < mu < N-4.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hrl {

/// Raised when (N, mu) or another argument leaves the admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ParameterSet {
  int N = 5;
  double mu = 0.5;
  double a = 0.0;         // power of the singular factor, -mu/2
  double b = 1.0;         // radial exponent of the transform, 1 - mu/(N-4)
  double two_crit = 0.0;  // 2** = 2N/(N-4)
  double c1 = 0.0;        // Hardy coefficient of int |grad u|^2 / |x|^2
  double c2 = 0.0;        // coefficient of int u^2 / |x|^4
  double s0 = 0.0;        // unweighted sharp constant
  double s_mu = 0.0;      // weighted sharp constant
  double k_coeff = 0.0;   // amplitude of the extremal profile

  /// (N-4)/2, the critical scaling exponent.
  double scaling_exponent() const { return 0.5 * (N - 4); }
  /// 2** - 1, the exponent of the nonlinearity and the second eigenvalue.
  double nonlinear_exponent() const { return two_crit - 1.0; }

  bool operator==(const ParameterSet&) const = default;
};

/// Gamma_N = (N-4)(N-2)N(N+2). Exact for every N that fits in int64.
inline std::int64_t gamma_product(int N) {
  if (N < 5) {
    throw DomainError("gamma_product: N must be >= 5, got " + std::to_string(N));
  }
  const std::int64_t n = N;
  return (n - 4) * (n - 2) * n * (n + 2);
}

/// Surface area of the unit sphere S^{N-1}.
inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

struct SphereEigen {
  double lambda_k = 0.0;       // k(N-2+k)
  std::int64_t multiplicity = 0;
};

/// Eigenvalue of -Laplace-Beltrami on S^{N-1} for degree-k harmonics, and
/// the dimension of that eigenspace.
inline SphereEigen sphere_eigen(int k, int N) {
  if (k < 0) throw DomainError("sphere_eigen: k must be >= 0");
  if (N < 5) throw DomainError("sphere_eigen: N must be >= 5");
  SphereEigen out;
  out.lambda_k = static_cast<double>(k) * (N - 2 + k);
  // m_k = (N+2k-2)(N+k-3)! / ((N-2)! k!); the factorial ratio is the
  // binomial C(N+k-3, k), accumulated exactly.
  std::int64_t binom = 1;
  for (int i = 1; i <= k; ++i) {
    binom = binom * (N - 3 + i) / i;
  }
  const std::int64_t num = static_cast<std::int64_t>(N + 2 * k - 2) * binom;
  out.multiplicity = num / (N - 2);
  return out;
}

/// Sharp constant of int |Lap u|^2 >= S0 (int |u|^{2**})^{2/2**} on R^N.
inline double unweighted_sharp_constant(int N) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double ratio = std::exp(std::lgamma(0.5 * N) - std::lgamma(static_cast<double>(N)));
  return pi2 * static_cast<double>(gamma_product(N)) * std::pow(ratio, 4.0 / N);
}

inline void check_admissible(int N, double mu) {
  if (N < 5) {
    throw DomainError("dimension N must be >= 5, got " + std::to_string(N));
  }
  if (!(mu > 0.0) || !(mu < N - 4.0) || !std::isfinite(mu)) {
    std::ostringstream os;
    os.precision(17);
    os << "Hardy parameter mu must lie in (0, " << (N - 4) << "), got " << mu;
    throw DomainError(os.str());
  }
}

inline ParameterSet derive_constants(int N, double mu) {
  check_admissible(N, mu);
  ParameterSet p;
  p.N = N;
  p.mu = mu;
  const double n4 = N - 4.0;
  const double t = mu * (2.0 * n4 - mu);  // mu (2(N-4) - mu) > 0
  p.a = -0.5 * mu;
  p.b = 1.0 - mu / n4;
  p.two_crit = 2.0 * N / n4;
  p.c1 = (N * N - 4.0 * N + 8.0) / (2.0 * n4 * n4) * t;
  p.c2 = (static_cast<double>(N) * N) / (16.0 * n4 * n4) * t * t - 0.5 * (N - 2.0) * t;
  p.s0 = unweighted_sharp_constant(N);
  p.s_mu = std::pow(p.b, 4.0 - 4.0 / N) * p.s0;
  p.k_coeff = std::pow(std::pow(p.b, 4) * static_cast<double>(gamma_product(N)), n4 / 8.0);
  return p;
}

/// Converts a sharp constant stated for integrals over R^N into the constant
/// for the bare radial integrals int_0^inf ... r^{N-1} dr used by this library.
/// Both sides of the inequality carry one factor of |S^{N-1}| before the
/// 2/2** power is taken, hence the factor |S^{N-1}|^{2/2** - 1}.
inline double radial_constant(double full_space_constant, int N) {
  return full_space_constant * std::pow(sphere_area(N), -4.0 / N);
}

inline double radial_s_mu(const ParameterSet& p) { return radial_constant(p.s_mu, p.N); }
inline double radial_s0(const ParameterSet& p) { return radial_constant(p.s0, p.N); }

}  // namespace hrl

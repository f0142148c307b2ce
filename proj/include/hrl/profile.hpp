#pragma once

// Radial functions on (0, inf) carried together with their first four
// derivatives, plus the Euler-operator algebra used to build them.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace hrl {

/// Value and first four radial derivatives at one point.
struct Jet {
  std::array<double, 5> d{};

  double value() const { return d[0]; }
  double& operator[](std::size_t i) { return d[i]; }
  double operator[](std::size_t i) const { return d[i]; }

  Jet& operator+=(const Jet& o) {
    for (std::size_t i = 0; i < 5; ++i) d[i] += o.d[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& x : d) x *= s;
    return *this;
  }
  friend Jet operator+(Jet x, const Jet& y) { return x += y; }
  friend Jet operator*(double s, Jet x) { return x *= s; }

  bool finite() const {
    for (double x : d)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

/// u ~ r^{at_zero} as r -> 0 and u ~ r^{-at_infinity} as r -> inf.
struct DecayHint {
  double at_zero = 0.0;
  double at_infinity = 0.0;
};

/// Immutable, cheaply copyable radial profile.
class RadialProfile {
 public:
  using Eval = std::function<Jet(double)>;

  RadialProfile() : RadialProfile(zero()) {}
  explicit RadialProfile(Eval f, std::optional<DecayHint> hint = std::nullopt)
      : eval_(std::make_shared<const Eval>(std::move(f))), hint_(hint) {}

  static RadialProfile zero() {
    return RadialProfile(Eval([](double) { return Jet{}; }), std::nullopt);
  }

  Jet operator()(double r) const { return (*eval_)(r); }
  double value(double r) const { return (*eval_)(r).d[0]; }
  const std::optional<DecayHint>& support_hint() const { return hint_; }

  friend RadialProfile operator+(const RadialProfile& u, const RadialProfile& v) {
    return RadialProfile([u, v](double r) { return u(r) + v(r); }, weakest(u.hint_, v.hint_));
  }
  friend RadialProfile operator*(double s, const RadialProfile& u) {
    return RadialProfile([s, u](double r) { return s * u(r); }, u.hint_);
  }
  friend RadialProfile operator-(const RadialProfile& u, const RadialProfile& v) {
    return u + (-1.0) * v;
  }

 private:
  static std::optional<DecayHint> weakest(const std::optional<DecayHint>& x,
                                          const std::optional<DecayHint>& y) {
    if (!x) return y;
    if (!y) return x;
    return DecayHint{std::min(x->at_zero, y->at_zero), std::min(x->at_infinity, y->at_infinity)};
  }

  std::shared_ptr<const Eval> eval_;
  std::optional<DecayHint> hint_;
};

// ---------------------------------------------------------------------------
// Euler operator theta = r d/dr.
//
// r^n f^(n) = sum_k s(n,k) theta^k f   (signed Stirling numbers, first kind)
// theta^k f = sum_n S(k,n) r^n f^(n)   (Stirling numbers, second kind)
// theta^k (r^c w) = r^c (theta + c)^k w
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::array<std::array<double, 5>, 5> kStirling1{{
    {1, 0, 0, 0, 0},
    {0, 1, 0, 0, 0},
    {0, -1, 1, 0, 0},
    {0, 2, -3, 1, 0},
    {0, -6, 11, -6, 1},
}};

inline constexpr std::array<std::array<double, 5>, 5> kStirling2{{
    {1, 0, 0, 0, 0},
    {0, 1, 0, 0, 0},
    {0, 1, 1, 0, 0},
    {0, 1, 3, 1, 0},
    {0, 1, 7, 6, 1},
}};

inline constexpr std::array<std::array<double, 5>, 5> kBinomial{{
    {1, 0, 0, 0, 0},
    {1, 1, 0, 0, 0},
    {1, 2, 1, 0, 0},
    {1, 3, 3, 1, 0},
    {1, 4, 6, 4, 1},
}};

}  // namespace detail

using ThetaMoments = std::array<double, 5>;

/// theta^k f at r for k = 0..4.
inline ThetaMoments theta_moments(const Jet& f, double r) {
  ThetaMoments t{};
  std::array<double, 5> scaled{};
  double rn = 1.0;
  for (std::size_t n = 0; n < 5; ++n) {
    scaled[n] = rn * f.d[n];
    rn *= r;
  }
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t n = 0; n <= k; ++n) t[k] += detail::kStirling2[k][n] * scaled[n];
  return t;
}

/// Scaled derivatives r^n (r^c w)^(n) / r^c for n = 0..4, from theta^k w.
inline std::array<double, 5> scaled_derivatives_of_power_product(double c, const ThetaMoments& w) {
  // theta^k (r^c w) / r^c = sum_j C(k,j) c^{k-j} theta^j w
  ThetaMoments phi{};
  for (std::size_t k = 0; k < 5; ++k) {
    double cp = 1.0;
    for (std::size_t j = k + 1; j-- > 0;) {
      phi[k] += detail::kBinomial[k][j] * cp * w[j];
      cp *= c;
    }
  }
  std::array<double, 5> out{};
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t k = 0; k <= n; ++k) out[n] += detail::kStirling1[n][k] * phi[k];
  return out;
}

/// Jet of r^c w(r) at r, where w is described by its theta-moments.
inline Jet jet_of_power_product(double c, const ThetaMoments& w, double r) {
  const auto scaled = scaled_derivatives_of_power_product(c, w);
  const double lr = std::log(r);
  Jet j;
  for (std::size_t n = 0; n < 5; ++n) {
    j.d[n] = scaled[n] * std::exp((c - static_cast<double>(n)) * lr);
  }
  return j;
}

/// Derivatives of g(tau) up to order four.
using LogJet = std::array<double, 5>;

/// phi(r) = r^c g(beta ln r), with g supplied as tau -> (g, g', ..., g'''').
inline RadialProfile log_power_profile(double c, double beta, std::function<LogJet(double)> g,
                                       std::optional<DecayHint> hint = std::nullopt) {
  return RadialProfile(
      [c, beta, g = std::move(g)](double r) {
        const LogJet gj = g(beta * std::log(r));
        ThetaMoments w{};
        double bk = 1.0;
        for (std::size_t k = 0; k < 5; ++k) {
          w[k] = bk * gj[k];
          bk *= beta;
        }
        return jet_of_power_product(c, w, r);
      },
      hint);
}

/// A e^{-(r/width)^2}.
inline RadialProfile gaussian(double amplitude, double width) {
  return RadialProfile([amplitude, width](double r) {
    const double x = r / width;
    const double e = amplitude * std::exp(-x * x);
    // d^n/dx^n e^{-x^2} = (-1)^n H_n(x) e^{-x^2}
    const double x2 = x * x;
    const std::array<double, 5> hermite{1.0, 2.0 * x, 4.0 * x2 - 2.0, 8.0 * x2 * x - 12.0 * x,
                                        16.0 * x2 * x2 - 48.0 * x2 + 12.0};
    Jet j;
    double wn = 1.0;
    for (std::size_t n = 0; n < 5; ++n) {
      j.d[n] = ((n % 2 == 0) ? 1.0 : -1.0) * hermite[n] * e / wn;
      wn *= width;
    }
    return j;
  });
}

/// A r^{-(N-4)/2} exp(-(ln r - center)^2 / (2 width^2)): a bump that is
/// Gaussian in ln r and whose Rellich energy density is O(1) in ln r.
inline RadialProfile log_bump(int N, double amplitude, double center, double width) {
  const double c = -0.5 * (N - 4);
  return log_power_profile(c, 1.0, [amplitude, center, width](double tau) {
    const double z = (tau - center) / width;
    const double e = amplitude * std::exp(-0.5 * z * z);
    // d^n/dz^n e^{-z^2/2} = (-1)^n He_n(z) e^{-z^2/2}
    const double z2 = z * z;
    const std::array<double, 5> he{1.0, z, z2 - 1.0, z2 * z - 3.0 * z, z2 * z2 - 6.0 * z2 + 3.0};
    LogJet out{};
    double wn = 1.0;
    for (std::size_t n = 0; n < 5; ++n) {
      out[n] = ((n % 2 == 0) ? 1.0 : -1.0) * he[n] * e / wn;
      wn *= width;
    }
    return out;
  });
}

}  // namespace hrl

#pragma once

// Uniform quintic B-splines on a window [tau_min, tau_max]. Only splines whose
// support lies inside the window are kept, so every basis function vanishes
// at both ends together with its first four derivatives.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "hrl/profile.hpp"

namespace hrl {

namespace detail {

/// m-th derivative of the cardinal quintic B-spline supported on [0, 6].
inline double cardinal_quintic(double x, int m) {
  if (x <= 0.0 || x >= 6.0) return 0.0;
  double sign = 1.0;
  if (x > 3.0) {  // beta(x) = beta(6 - x); evaluate on the short side
    x = 6.0 - x;
    if (m % 2 == 1) sign = -1.0;
  }
  static constexpr std::array<double, 7> binom{1, 6, 15, 20, 15, 6, 1};
  static constexpr std::array<double, 6> inv_fact{1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0};
  const int pw = 5 - m;
  double s = 0.0;
  for (int j = 0; j <= 3; ++j) {
    const double t = x - j;
    if (t <= 0.0) break;
    double tp = 1.0;
    for (int i = 0; i < pw; ++i) tp *= t;
    s += ((j % 2 == 0) ? 1.0 : -1.0) * binom[j] * tp;
  }
  return sign * s * inv_fact[pw];
}

}  // namespace detail

struct SplineSpace {
  static constexpr int kDegree = 5;

  double tau_min = -1.0;
  double tau_max = 1.0;
  int elements = 16;

  double h() const { return (tau_max - tau_min) / elements; }
  int size() const { return elements - kDegree; }

  /// Element index holding tau, or -1 outside the window.
  int element_of(double tau) const {
    if (!(tau > tau_min && tau < tau_max)) return -1;
    const int e = static_cast<int>((tau - tau_min) / h());
    return std::clamp(e, 0, elements - 1);
  }

  /// Basis functions nonzero on element e are first_basis(e) .. e.
  static int first_basis(int e) { return std::max(0, e - kDegree); }
  int last_basis(int e) const { return std::min(e, size() - 1); }

  /// d^m/dtau^m B_j(tau).
  double basis(int j, double tau, int m) const {
    const double hh = h();
    return detail::cardinal_quintic((tau - tau_min) / hh - j, m) / std::pow(hh, m);
  }

  /// sum_j coef_j B_j and its first four tau-derivatives.
  LogJet combine(std::span<const double> coef, double tau) const {
    LogJet out{};
    const int e = element_of(tau);
    if (e < 0) return out;
    const double hh = h();
    const double x = (tau - tau_min) / hh;
    for (int j = first_basis(e); j <= last_basis(e); ++j) {
      const double c = coef[j];
      if (c == 0.0) continue;
      double scale = 1.0;
      for (int m = 0; m < 5; ++m) {
        out[m] += c * detail::cardinal_quintic(x - j, m) * scale;
        scale /= hh;
      }
    }
    return out;
  }
};

}  // namespace hrl

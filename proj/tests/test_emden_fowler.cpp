#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hrl/emden_fowler.hpp"
#include "oracles.hpp"

using namespace hrl;

TEST(Coefficients, CollapseAtHandPoints) {
  struct Case {
    int n;
    double mu;
    double a, b, c, d;
  };
  for (const Case& k : {Case{5, 0.5, 8, 8, 8, 0}, Case{6, 1.0, 10, 15, 15, 0}, Case{9, 2.5, 16, 48, 48, 0}}) {
    const CoefficientSet raw = raw_coefficients(derive_constants(k.n, k.mu));
    EXPECT_NEAR(raw.A, k.a, 1e-10);
    EXPECT_NEAR(raw.B, k.b, 1e-10);
    EXPECT_NEAR(raw.C, k.c, 1e-10);
    EXPECT_NEAR(raw.D, k.d, 1e-10);
  }
}

TEST(Coefficients, CollapseSurvivesSmallTransformExponent) {
  for (int n : {5, 9, 16}) {
    for (double f : {0.97, 0.999, 0.99999}) {
      const CoefficientSet raw = raw_coefficients(derive_constants(n, f * (n - 4)));
      const CoefficientSet col = collapsed_coefficients(n);
      EXPECT_NEAR(raw.A, col.A, 1e-9);
      EXPECT_NEAR(raw.B, col.B, 1e-9);
      EXPECT_NEAR(raw.C, col.C, 1e-9);
      EXPECT_NEAR(raw.D, col.D, 1e-9) << n << " " << f;
    }
  }
}

// The monomial oracle determines the coefficients from the weighted operator alone.
TEST(Coefficients, MonomialOracleAgrees) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(5, 12);
  std::uniform_real_distribution<double> frac(0.02, 0.98);
  for (int i = 0; i < 50; ++i) {
    const int n = dim(rng);
    const double mu = frac(rng) * (n - 4);
    const auto want = oracle::coefficients_by_monomials(n, mu);
    const CoefficientSet raw = raw_coefficients(derive_constants(n, mu));
    const CoefficientSet col = collapsed_coefficients(n);
    const double scale = (n - 1.0) * (n - 3.0);
    EXPECT_NEAR(raw.A, want[0], 1e-9 * scale);
    EXPECT_NEAR(raw.B, want[1], 1e-9 * scale);
    EXPECT_NEAR(raw.C, want[2], 1e-9 * scale);
    EXPECT_NEAR(raw.D, want[3], 1e-9 * scale);
    EXPECT_NEAR(col.A, want[0], 1e-9 * scale);
    EXPECT_NEAR(col.D, want[3], 1e-9 * scale);
  }
}

TEST(Transform, BubbleMapsToClassicalBubble) {
  const ParameterSet p = derive_constants(5, 0.5);
  const RadialProfile v = push_forward(make_bubble(p).profile, p);
  const double m = p.scaling_exponent();
  const double ref = v.value(1.0) * std::pow(2.0, m);
  for (int i = 0; i <= 40; ++i) {
    const double s = std::pow(10.0, -2.0 + 4.0 * i / 40.0);
    EXPECT_NEAR(v.value(s) * std::pow(1.0 + s * s, m) / ref, 1.0, 1e-8) << s;
  }
  EXPECT_NEAR(ref, p.k_coeff, 1e-12);
}

TEST(Transform, ImageSolvesCollapsedEquation) {
  for (auto [n, mu] : {std::pair{5, 0.5}, std::pair{7, 2.0}}) {
    const ParameterSet p = derive_constants(n, mu);
    const RadialProfile v = push_forward(make_bubble(p).profile, p);
    const RadialProfile exact = transformed_bubble(p);
    for (double s : {0.05, 0.5, 1.0, 4.0, 30.0}) {
      const double nl = std::pow(p.b, -4.0) * std::pow(exact.value(s), p.nonlinear_exponent());
      EXPECT_LT(std::abs(transformed_residual(v, p, collapsed_coefficients(n), s)) / nl, 1e-7) << s;
      const Jet e = exact(s);
      const CoefficientSet c = collapsed_coefficients(n);
      const double terms = std::abs(e[4]) + c.A * std::abs(e[3]) / s + c.B * std::abs(e[2]) / (s * s) +
                           c.C * std::abs(e[1]) / (s * s * s) + nl;
      EXPECT_LT(std::abs(transformed_residual(exact, p, c, s)) / terms, 1e-12) << s;
      for (int k = 0; k < 5; ++k) EXPECT_NEAR(v(s)[k], exact(s)[k], 1e-9 * std::abs(exact.value(s)) / std::pow(s, k) + 1e-14);
    }
  }
}

TEST(Transform, IdentityAtSmallMu) {
  const ParameterSet p = derive_constants(5, 1e-12);
  const RadialProfile u = gaussian(1.3, 0.8);
  const RadialProfile v = push_forward(u, p);
  for (double r : {0.1, 0.9, 2.0}) EXPECT_NEAR(v.value(r), u.value(r), 1e-10);
}

TEST(Transform, RoundTrip) {
  const ParameterSet p = derive_constants(6, 0.8);
  const RadialProfile u = gaussian(1.0, 1.5);
  const RadialProfile back = pull_back(push_forward(u, p), p);
  for (double r : {0.05, 0.4, 1.0, 2.5}) {
    const Jet a = u(r), b = back(r);
    for (int k = 0; k < 5; ++k)
      EXPECT_NEAR(b[k], a[k], 1e-12 * (std::abs(a[k]) + std::abs(a[0]) / std::pow(r, k))) << r << " " << k;
  }
}

TEST(Transform, NormJacobians) {
  const ParameterSet p = derive_constants(5, 0.5);
  const QuadratureConfig cu = matched_config(p, 400);
  const QuadratureConfig cv = transformed_config(cu, p);
  const RadialProfile u = make_bubble(p).profile + log_bump(5, 0.3, 0.5, 1.5);
  const RadialProfile v = push_forward(u, p);
  EXPECT_NEAR(power_integral(u, p.two_crit, 5, cu) / power_integral(v, p.two_crit, 5, cv), critical_norm_jacobian(p),
              1e-8);
  EXPECT_NEAR(inner_product_mu(u, u, p, cu) / quadratic_form(v, v, FormCoefficients::bilaplacian(5), cv),
              form_jacobian(p), 1e-8);
}

TEST(DeficitComparison, BubbleAndPerturbations) {
  const ParameterSet p = derive_constants(5, 0.5);
  const QuadratureConfig c = matched_config(p, 400);
  const RadialProfile u = make_bubble(p).profile;
  const DeficitComparison eq = deficit_comparison(u, p, c);
  EXPECT_NEAR(eq.deficit_weighted, 0.0, 1e-9);
  EXPECT_NEAR(eq.deficit_unweighted, 0.0, 1e-9);
  EXPECT_TRUE(eq.ratio_bound_ok);

  const DeficitComparison pert = deficit_comparison(u + log_bump(5, 0.1, 1.0, 1.6), p, c);
  EXPECT_GT(pert.deficit_weighted, 0.0);
  EXPECT_GT(pert.deficit_unweighted, 0.0);
  EXPECT_TRUE(pert.ratio_bound_ok);
  EXPECT_NEAR(pert.deficit_unweighted, pert.bound_factor * pert.deficit_weighted, 1e-8);

  const DeficitComparison twice = deficit_comparison(2.0 * u, p, c);
  EXPECT_TRUE(twice.ratio_bound_ok);
}

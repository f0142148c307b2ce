#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hrl/params.hpp"
#include "oracles.hpp"

using namespace hrl;

TEST(Params, HandEvaluatedConstantsAtFiveHalf) {
  const ParameterSet p = derive_constants(5, 0.5);
  EXPECT_DOUBLE_EQ(p.c1, 4.875);
  EXPECT_DOUBLE_EQ(p.c2, -0.24609375);
  EXPECT_DOUBLE_EQ(p.b, 0.5);
  EXPECT_DOUBLE_EQ(p.a, -0.25);
  EXPECT_DOUBLE_EQ(p.two_crit, 10.0);
  EXPECT_DOUBLE_EQ(p.nonlinear_exponent(), 9.0);
}

TEST(Params, HandEvaluatedConstantsAtSixOne) {
  const ParameterSet p = derive_constants(6, 1.0);
  EXPECT_DOUBLE_EQ(p.c1, 7.5);
  EXPECT_DOUBLE_EQ(p.c2, -0.9375);
  EXPECT_DOUBLE_EQ(p.b, 0.5);
}

TEST(Params, SmallMuApproachesUnweighted) {
  const ParameterSet p = derive_constants(5, 1e-12);
  EXPECT_NEAR(p.c1, 0.0, 1e-10);
  EXPECT_NEAR(p.c2, 0.0, 1e-10);
  EXPECT_NEAR(p.s_mu / p.s0, 1.0, 1e-10);
}

TEST(Params, RejectsInadmissibleParameters) {
  EXPECT_THROW(derive_constants(4, 0.5), DomainError);
  EXPECT_THROW(derive_constants(5, 0.0), DomainError);
  EXPECT_THROW(derive_constants(5, -0.1), DomainError);
  EXPECT_THROW(derive_constants(5, 1.0), DomainError);
  EXPECT_THROW(derive_constants(5, 1.5), DomainError);
  EXPECT_THROW(derive_constants(5, std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_NO_THROW(derive_constants(5, 0.999));
}

TEST(Params, GammaProduct) {
  EXPECT_EQ(gamma_product(5), 105);
  EXPECT_EQ(gamma_product(6), 384);  // 2*4*6*8
  EXPECT_EQ(gamma_product(7), 945);
  EXPECT_THROW(gamma_product(4), DomainError);
}

TEST(Params, SphereEigen) {
  EXPECT_EQ(sphere_eigen(0, 5).lambda_k, 0.0);
  EXPECT_EQ(sphere_eigen(0, 5).multiplicity, 1);
  EXPECT_EQ(sphere_eigen(1, 5).lambda_k, 4.0);
  EXPECT_EQ(sphere_eigen(1, 5).multiplicity, 5);
  EXPECT_EQ(sphere_eigen(2, 5).lambda_k, 10.0);
  EXPECT_EQ(sphere_eigen(2, 5).multiplicity, 14);
  EXPECT_EQ(sphere_eigen(3, 7).multiplicity, 77);  // C(9,3) - C(7,1) cubic harmonics in 7 variables
  EXPECT_THROW(sphere_eigen(-1, 5), DomainError);
}

TEST(Params, AmplitudeAndConstantRatio) {
  for (int n : {5, 6, 7, 9}) {
    for (double f : {0.1, 0.5, 0.9}) {
      const ParameterSet p = derive_constants(n, f * (n - 4));
      EXPECT_NEAR(std::pow(p.k_coeff, 8.0 / (n - 4)) / (std::pow(p.b, 4) * gamma_product(n)), 1.0, 1e-13);
      EXPECT_NEAR(p.s_mu / p.s0, std::pow(p.b, 4.0 - 4.0 / n), 1e-13);
    }
  }
}

// The sharp constants against the Beta-function value of the extremal's energy.
TEST(Params, SharpConstantsMatchBetaOracle) {
  for (int n : {5, 6, 7, 8, 11}) {
    for (double f : {1e-9, 0.3, 0.8}) {
      const double mu = f * (n - 4);
      const ParameterSet p = derive_constants(n, mu);
      EXPECT_NEAR(p.s_mu / oracle::sharp_constant_from_bubble(n, mu), 1.0, 1e-12) << n << " " << mu;
    }
  }
}

TEST(Params, RadialConstantConvertsSphereFactor) {
  const ParameterSet p = derive_constants(6, 1.0);
  const double radial = radial_s_mu(p);
  // S_radial = (int U^{2**} r^{N-1} dr)^{4/N}
  EXPECT_NEAR(radial / std::pow(oracle::bubble_critical_integral(6, 1.0), 4.0 / 6.0), 1.0, 1e-12);
  EXPECT_NEAR(sphere_area(3), 4.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(5), 8.0 * std::numbers::pi * std::numbers::pi / 3.0, 1e-13);
}

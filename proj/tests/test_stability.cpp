#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hrl/spectrum.hpp"
#include "hrl/stability.hpp"
#include "oracles.hpp"

using namespace hrl;

namespace {

struct Fixture {
  ParameterSet p = derive_constants(5, 0.5);
  QuadratureConfig cfg = matched_config(p, 400);
};

const SpectrumResult& radial() {
  static const SpectrumResult res = sector_spectrum(0, derive_constants(5, 0.5), 12, GridSpec{400});
  return res;
}

}  // namespace

TEST(Deficit, VanishesOnTheManifold) {
  Fixture f;
  for (double lam : {0.3, 1.0, 5.0}) {
    const RadialProfile u = make_bubble(f.p, lam).profile;
    EXPECT_LT(std::abs(deficit(u, f.p, f.cfg)), 1e-7 * inner_product_mu(u, u, f.p, f.cfg)) << lam;
  }
  EXPECT_LT(std::abs(deficit(3.0 * make_bubble(f.p).profile, f.p, f.cfg)), 1e-6);
  EXPECT_GT(deficit(random_far_profile(f.p, 1, 0), f.p, f.cfg), 0.0);
}

TEST(Projection, RecoversScaledBubble) {
  Fixture f;
  const ManifoldProjection pr = project_to_manifold(2.0 * make_bubble(f.p, 3.0).profile, f.p, f.cfg);
  EXPECT_NEAR(pr.c_star, 2.0, 1e-6);
  EXPECT_NEAR(pr.lam_star, 3.0, 1e-6);
  EXPECT_LT(pr.distance, 1e-7);
  EXPECT_FALSE(pr.at_bracket_boundary);
}

TEST(Projection, ManifoldPointsProjectToThemselves) {
  Fixture f;
  for (double c : {-1.5, 0.5, 4.0}) {
    for (double lam : {0.02, 1.0, 40.0}) {
      const ManifoldProjection pr = project_to_manifold(c * make_bubble(f.p, lam).profile, f.p, f.cfg);
      EXPECT_LT(pr.distance, 1e-7 * std::abs(c)) << c << " " << lam;
      EXPECT_NEAR(pr.lam_star / lam, 1.0, 1e-6);
    }
  }
}

// The oracle evaluates the pairing with the full form; the projector uses the
// Euler-Lagrange shortcut on sampled values.
TEST(Projection, AgreesWithGridOracle) {
  Fixture f;
  const double bubble_norm2 = inner_product_mu(make_bubble(f.p).profile, make_bubble(f.p).profile, f.p, f.cfg);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> amp(0.5, 2.0), loglam(-1.5, 1.5), mix(0.1, 1.0);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const RadialProfile u =
        amp(rng) * make_bubble(f.p, std::exp(loglam(rng))).profile + mix(rng) * random_far_profile(f.p, 9, i);
    const double uu = inner_product_mu(u, u, f.p, f.cfg);
    const auto pairing = [&](double lam) { return inner_product_mu(u, make_bubble(f.p, lam).profile, f.p, f.cfg); };
    const oracle::GridProjection g = oracle::grid_projection(uu, bubble_norm2, pairing, -4.0, 4.0, 1e-3, 1e3);
    const ManifoldProjection pr = project_to_manifold(u, f.p, f.cfg);
    EXPECT_LT(std::abs(pr.distance - g.distance), 1e-3 * std::sqrt(uu)) << i;
    EXPECT_LE(pr.distance, g.distance * (1.0 + 1e-9)) << i;
    EXPECT_LT(std::abs(pr.orth_residual_c), 1e-6 * uu) << i;
    EXPECT_LT(std::abs(pr.orth_residual_lam), 1e-6 * uu) << i;
    EXPECT_LT(std::abs(tangency_moment(u, pr, f.p, f.cfg)), 1e-6 * uu) << i;
  }
}

TEST(Projection, IsALocalMinimum) {
  Fixture f;
  const RadialProfile u = make_bubble(f.p, 1.7).profile + 0.4 * random_far_profile(f.p, 2, 1);
  const ManifoldProjection pr = project_to_manifold(u, f.p, f.cfg);
  const auto dist = [&](double c, double lam) {
    const RadialProfile d = u + (-c) * make_bubble(f.p, lam).profile;
    return norm_mu(d, f.p, f.cfg);
  };
  for (double dc : {-1e-3, 1e-3}) EXPECT_GE(dist(pr.c_star + dc, pr.lam_star), pr.distance);
  for (double dl : {-1e-3, 1e-3}) EXPECT_GE(dist(pr.c_star, pr.lam_star * std::exp(dl)), pr.distance);
}

TEST(Projection, FarProfileDistanceBoundedByNorm) {
  Fixture f;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const RadialProfile u = random_far_profile(f.p, 7, i);
    const ManifoldProjection pr = project_to_manifold(u, f.p, f.cfg);
    EXPECT_LE(pr.distance, norm_mu(u, f.p, f.cfg) * (1.0 + 1e-12));
  }
  EXPECT_THROW(project_to_manifold(RadialProfile::zero(), f.p, f.cfg), DomainError);
  ProjectionOptions bad;
  bad.lam_lo = 2.0;
  bad.lam_hi = 1.0;
  EXPECT_THROW(project_to_manifold(make_bubble(f.p).profile, f.p, f.cfg, bad), DomainError);
}

TEST(Taylor, CoefficientAndRemainderDecay) {
  Fixture f;
  EXPECT_DOUBLE_EQ(taylor_coefficient(f.p), 45.0);
  const TangentFrame frame = tangent_frame(f.p, f.cfg);
  const RadialProfile w = orthonormalize(radial().eigenfunction(2), frame, f.p, f.cfg);
  const TaylorCheck t = taylor_check(w, {0.0, 0.02, 0.01, 0.005}, f.p, f.cfg);
  EXPECT_EQ(t.records[0].remainder, 0.0);
  for (int i = 1; i + 1 < 4; ++i) {
    EXPECT_GE(std::abs(t.records[i].scaled) / std::abs(t.records[i + 1].scaled), 1.8) << i;
  }
  EXPECT_THROW(taylor_check(2.0 * w, {0.01}, f.p, f.cfg), DomainError);
}

TEST(Orthonormalize, RejectsTangentInput) {
  Fixture f;
  const TangentFrame frame = tangent_frame(f.p, f.cfg);
  EXPECT_THROW(orthonormalize(frame.bubble.profile, frame, f.p, f.cfg), SamplingError);
  const RadialProfile w = orthonormalize(random_far_profile(f.p, 3, 0), frame, f.p, f.cfg);
  const double uu = frame.uu, gg = frame.gg;
  EXPECT_LT(std::abs(inner_product_mu(w, frame.bubble.profile, f.p, f.cfg)), 1e-9 * std::sqrt(uu));
  EXPECT_LT(std::abs(inner_product_mu(w, frame.generator, f.p, f.cfg)), 1e-9 * std::sqrt(gg));
  EXPECT_NEAR(norm_mu(w, f.p, f.cfg), 1.0, 1e-10);
}

TEST(RatioStudy, EigenDirectionMeetsTheBound) {
  Fixture f;
  RatioStudyOptions opt;
  opt.epsilons = {0.005};
  opt.pure_directions = 2;
  const RatioStudy s = local_ratio_study(f.p, f.cfg, 4, 1, radial(), opt);
  EXPECT_NEAR(s.bound, 1.0 - 9.0 / 33.0, 1e-6);
  EXPECT_NEAR(s.eigen_direction_ratio / s.bound, 1.0, 0.05);
  EXPECT_GE(s.min_ratio, s.bound * 0.95);
  // The next eigendirection sees a larger local ratio.
  EXPECT_GT(s.samples[1].ratio, s.samples[0].ratio);
  for (const DeficitSample& d : s.samples) EXPECT_GT(d.ratio, 0.0);
}

TEST(RatioStudy, DeterministicForFixedSeed) {
  Fixture f;
  RatioStudyOptions opt;
  opt.epsilons = {0.01};
  opt.pure_directions = 0;
  const RatioStudy a = local_ratio_study(f.p, f.cfg, 2, 17, radial(), opt);
  const RatioStudy b = local_ratio_study(f.p, f.cfg, 2, 17, radial(), opt);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].ratio, b.samples[i].ratio);
  const RatioStudy c = local_ratio_study(f.p, f.cfg, 2, 18, radial(), opt);
  EXPECT_NE(a.samples[0].ratio, c.samples[0].ratio);
}

TEST(RatioStudy, RejectsBadInput) {
  Fixture f;
  EXPECT_THROW(local_ratio_study(f.p, f.cfg, 0, 1, radial()), DomainError);
  RatioStudyOptions zero;
  zero.epsilons = {0.0};
  EXPECT_THROW(local_ratio_study(f.p, f.cfg, 1, 1, radial(), zero), DomainError);
  const SpectrumResult few = sector_spectrum(0, f.p, 3, GridSpec{100});
  EXPECT_THROW(local_ratio_study(f.p, f.cfg, 1, 1, few), DomainError);
}

TEST(GlobalStudy, FarProfilesHavePositiveRatio) {
  Fixture f;
  const GlobalStudy g = global_ratio_study(f.p, f.cfg, 4, 3);
  ASSERT_EQ(g.samples.size(), 4u);
  for (std::size_t i = 0; i < g.samples.size(); ++i) {
    EXPECT_GT(g.relative_distance[i], 0.5);
    EXPECT_GT(g.samples[i].ratio, 0.0);
  }
  EXPECT_GT(g.min_ratio, 0.0);
}

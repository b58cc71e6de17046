#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace renormlab;

namespace {

const IntervalTower& g_tower(std::size_t K) {
  static std::map<std::size_t, IntervalTower> cache;
  auto it = cache.find(K);
  if (it == cache.end()) it = cache.emplace(K, tower(fixtures::feigenbaum().g, K)).first;
  return it->second;
}

// One child of the middle-thirds tower stretched to 0.999 of its parent.
IntervalTower stretched_tower() {
  std::vector<std::vector<Interval>> lv{{{0.0, 1.0}}, {{0.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0}}};
  lv.push_back({{0.0, 0.999 / 3.0}, {2.0 / 3.0, 7.0 / 9.0}, {8.0 / 9.0, 1.0}});
  lv.push_back({{0.0, 0.1}, {0.2, 0.3}, {2.0 / 3.0, 0.7}, {0.75, 7.0 / 9.0}, {8.0 / 9.0, 0.9}, {0.95, 1.0}});
  return tower_from_levels(std::move(lv));
}

}  // namespace

TEST(BoundedGeometry, MiddleThirds) {
  const auto r = bounded_geometry(middle_thirds_tower(6));
  EXPECT_NEAR(r.tau, 1.0 / 3.0, 1e-12);
  EXPECT_TRUE(r.all_interior);
  EXPECT_FALSE(r.near_degenerate);
  EXPECT_EQ(r.levels_checked, 5u);
}

TEST(BoundedGeometry, NearDegenerateChildFlagged) {
  const auto r = bounded_geometry(stretched_tower());
  EXPECT_LE(r.tau, 0.001 + 1e-12);
  EXPECT_TRUE(r.near_degenerate);
}

TEST(BoundedGeometry, FixedPointTower) {
  const auto r = bounded_geometry(g_tower(8));
  EXPECT_GE(r.tau, 0.1);
  EXPECT_TRUE(r.all_interior);
  EXPECT_EQ(r.levels_checked, 7u);
  for (const auto& lv : r.levels) {
    EXPECT_EQ(lv.child.size(), std::size_t{2} << lv.k);
    EXPECT_FALSE(lv.gap.empty());
  }
}

TEST(BoundedGeometry, EmptyLevel) {
  EXPECT_THROW(bounded_geometry(tower_from_levels({{{0.0, 1.0}}, {{0.0, 0.3}}, {}})), EmptyLevel);
  EXPECT_THROW(bounded_geometry(middle_thirds_tower(1)), DomainError);
}

TEST(BoundedGeometry, SelfSimilarityAtFixedPoint) {
  const auto& t = g_tower(8);
  const double lam = std::abs(fixtures::feigenbaum().lambda_star);
  for (std::size_t k = 2; k <= 6; ++k) {
    const double r = t.level(k).intervals[0].length() / t.level(k - 1).intervals[0].length();
    EXPECT_NEAR(r, lam, 1e-6) << k;
  }
}

TEST(BoundedGeometry, LargestIntervalConstantStable) {
  const auto c = largest_interval_constants(g_tower(8));
  ASSERT_EQ(c.size(), 9u);
  for (std::size_t k = 3; k < c.size(); ++k) EXPECT_NEAR(c[k] / c[k - 1], 1.0, 0.1) << k;
}

TEST(SpectralSum, ClosedFormOnSelfSimilarTower) {
  for (double r : {0.2, 0.3}) {
    for (double t : {1.5, 3.0}) {
      const auto fit = spectral_sum(self_similar_tower(3, r, 6), t);
      const double mu = 3.0 * std::pow(r, t - 1.0);
      EXPECT_NEAR(fit.mu / mu, 1.0, 1e-10);
      for (std::size_t k = 0; k < fit.sums.size(); ++k)
        EXPECT_NEAR(fit.sums[k] / std::pow(mu, static_cast<double>(k)), 1.0, 1e-10);
    }
  }
}

TEST(SpectralSum, DecayAtFixedPointCubic) {
  const auto fit = spectral_sum(g_tower(8), 3.0);
  EXPECT_LT(fit.mu, 1.0);
  for (std::size_t k = 2; k < fit.ratios.size(); ++k) EXPECT_LT(fit.ratios[k], 1.0) << k;
}

TEST(SpectralSum, SlowGrowthBelowQuadratic) {
  const auto fit = spectral_sum(g_tower(8), 1.9);
  EXPECT_LT(fit.mu, spectrum(fixtures::feigenbaum().g).delta);
}

TEST(SpectralSum, Preconditions) {
  EXPECT_THROW(spectral_sum(g_tower(8), 1.0), DomainError);
  EXPECT_THROW(spectral_sum(middle_thirds_tower(2), 2.0), DomainError);
}

TEST(PartitionSum, LebesgueMeasureDecreases) {
  const auto s = partition_sum(g_tower(8), 1.0);
  for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(s[k], s[k - 1]);
}

TEST(PartitionSum, RegimesAtFixedPoint) {
  const auto hi = partition_sum(g_tower(8), 0.9);
  const auto lo = partition_sum(g_tower(8), 0.3);
  for (std::size_t k = 3; k < hi.size(); ++k) {
    EXPECT_LT(hi[k] / hi[k - 1], 1.0);
    EXPECT_GT(lo[k] / lo[k - 1], 1.0);
  }
}

TEST(PartitionSum, StrictlyDecreasingInExponent) {
  const auto& t = g_tower(8);
  for (std::size_t k = 1; k <= 8; ++k) {
    double prev = std::numeric_limits<double>::infinity();
    for (double s = 0.1; s <= 1.0; s += 0.1) {
      const double v = partition_sum(t, s)[k];
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
  EXPECT_THROW(partition_sum(t, 0.0), DomainError);
  EXPECT_THROW(partition_sum(t, 1.5), DomainError);
}

TEST(Dimension, MiddleThirds) {
  const auto d = hausdorff_dimension(middle_thirds_tower(10));
  EXPECT_NEAR(d.s_estimate, std::log(2.0) / std::log(3.0), 1e-3);
  EXPECT_LE(d.bracket_lo, d.s_estimate);
  EXPECT_GE(d.bracket_hi, d.s_estimate);
}

TEST(Dimension, SelfSimilarClosedForm) {
  // n r^s = 1.
  const auto d = hausdorff_dimension(self_similar_tower(3, 0.2, 8));
  EXPECT_NEAR(d.s_estimate, std::log(3.0) / std::log(5.0), 1e-6);
}

TEST(Dimension, FixedPointAttractor) {
  const auto d = hausdorff_dimension(g_tower(9));
  EXPECT_GT(d.s_estimate, 0.4);
  EXPECT_LT(d.s_estimate, 0.7);
  EXPECT_LT(std::abs(d.s_early - d.s_estimate), 0.02);
  EXPECT_LT(std::abs(d.s_late - d.s_estimate), 0.02);
  EXPECT_LT(d.eta, 1.0);
}

TEST(Dimension, NoBracketForFatTower) {
  // Children cover 0.995 of each parent: the exponent sits above the scan range.
  EXPECT_THROW(hausdorff_dimension(self_similar_tower(2, 0.4975, 6)), NoBracket);
}

TEST(Dimension, DepthTooShallow) { EXPECT_THROW(hausdorff_dimension(middle_thirds_tower(4)), DomainError); }

TEST(Json, ReportsSerialize) {
  const auto j = to_json(bounded_geometry(middle_thirds_tower(4)));
  EXPECT_NEAR(j.at("tau").get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(sums_csv({1.0, 0.5}).substr(0, 8), "k,S_k\n0,");
}

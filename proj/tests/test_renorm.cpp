#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace renormlab;

namespace {
const QuadraticFamily kFam;
}

TEST(Detect, PeriodDoublingAtOnePointThree) {
  const auto st = detect(kFam.member(1.3));
  EXPECT_EQ(st.p, 2u);
  EXPECT_NEAR(st.lambda, 1.0 - 1.3, 1e-15);
  EXPECT_EQ(st.perm, period_doubling_permutation());
  ASSERT_EQ(st.intervals.size(), 2u);
  EXPECT_DOUBLE_EQ(st.intervals[0].lo, -0.3);
  EXPECT_DOUBLE_EQ(st.intervals[0].hi, 0.3);
  // f([-0.3, 0.3]) = [0.883, 1].
  EXPECT_NEAR(st.intervals[1].lo, oracle::quad(1.3, 0.3), 1e-15);
  EXPECT_EQ(st.intervals[1].hi, 1.0);
}

TEST(Detect, AttractingFixedPointIsNotRenormalizable) {
  EXPECT_THROW(detect(kFam.member(0.5)), NotRenormalizable);
  EXPECT_FALSE(oracle::brute_detect([](double x) { return oracle::quad(0.5, x); }));
}

TEST(Detect, SuperstableIsDegenerate) {
  EXPECT_THROW(detect(kFam.member(1.0)), DegenerateScaling);
  EXPECT_EQ(detect_status(kFam.member(1.0)).status, DetectStatus::DegenerateScaling);
}

TEST(Detect, AgreesWithFineGridOracle) {
  // Parameters away from window edges.
  for (double c : {0.9, 1.1, 1.3, 1.36, 1.395, 1.45, 1.5, 1.6, 1.77, 1.78, 1.95}) {
    const auto d = detect_status(kFam.member(c));
    const auto b = oracle::brute_detect([c](double x) { return oracle::quad(c, x); });
    ASSERT_EQ(static_cast<bool>(d), b.has_value()) << "c=" << c;
    if (!b) continue;
    EXPECT_EQ(static_cast<int>(d.step->p), b->p) << "c=" << c;
    EXPECT_EQ(d.step->perm.image, b->perm) << "c=" << c;
    EXPECT_NEAR(d.step->lambda, b->lambda, 1e-15);
  }
}

TEST(Detect, PeriodIsMinimal) {
  for (double c : {1.3, 1.77, 1.78, 1.63}) {
    const QuadraticMap f{c};
    const auto d = detect_status(f);
    ASSERT_TRUE(d) << c;
    for (std::size_t q = 2; q < d.step->p; ++q) {
      EXPECT_FALSE(test_period(f, q)) << "c=" << c << " q=" << q;
      EXPECT_FALSE(oracle::brute_period([c](double x) { return oracle::quad(c, x); }, static_cast<int>(q)));
    }
  }
}

TEST(Detect, IntervalsDisjointAndCentral) {
  for (double c : {1.3, 1.77, 1.63}) {
    const auto st = detect(kFam.member(c));
    EXPECT_EQ(st.intervals[0].lo, -std::abs(st.lambda));
    EXPECT_EQ(st.intervals[0].hi, std::abs(st.lambda));
    auto iv = st.intervals;
    std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < iv.size(); ++i) EXPECT_LT(iv[i - 1].hi, iv[i].lo);
    // Each next interval contains the image of the previous at endpoints and midpoint.
    const QuadraticMap f{c};
    for (std::size_t i = 0; i + 1 < st.p; ++i)
      for (double x : {st.intervals[i].lo, st.intervals[i].mid(), st.intervals[i].hi})
        EXPECT_TRUE(st.intervals[i + 1].contains(f.eval(x), 1e-15));
  }
}

TEST(Renormalize, ConjugationIdentity) {
  const auto f = kFam.member(1.3);
  const auto r = renormalize(f);
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_NEAR(r.map.eval(0.0), 1.0, 1e-12);
  EXPECT_TRUE(validate(r.map).ok());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double lam = r.step.lambda;
  for (int i = 0; i < 50; ++i) {
    const double x = U(rng);
    const double direct = oracle::quad_iter(1.3, lam * x, 2) / lam;
    EXPECT_NEAR(r.map.eval(x), direct, 1e-9);
  }
}

TEST(Renormalize, FixedPointIsFixed) {
  const auto& g = fixtures::feigenbaum().g;
  const auto r = renormalize(g);
  EXPECT_LT(sup_distance([&](double x) { return r.map.eval(x); }, [&](double x) { return g.eval(x); }, 200), 1e-10);
}

TEST(Renormalize, AccumulationParameterStaysRenormalizable) {
  const auto f = kFam.member(fixtures::cascade10().c_infinity);
  const auto r = renormalize(f);
  EXPECT_EQ(r.step.p, 2u);
  const auto again = detect(r.map);
  EXPECT_EQ(again.p, 2u);
  EXPECT_EQ(again.perm, period_doubling_permutation());
}

TEST(Renormalize, FullMapFails) {
  EXPECT_THROW(renormalize(kFam.member(2.0)), NotRenormalizable);
  EXPECT_FALSE(oracle::brute_detect([](double x) { return oracle::quad(2.0, x); }));
}

TEST(Renormalize, TruncationLossWhenDegreeTooLow) {
  // R f_{1.3} is a quartic in x^2; two coefficients cannot hold it.
  EXPECT_THROW(renormalize(kFam.member(1.3), 1), TruncationLoss);
  EXPECT_NO_THROW(renormalize(kFam.member(1.3), 2));
}

TEST(Tower, FixedPointScalesByLambda) {
  const auto& fp = fixtures::feigenbaum();
  const auto t = tower(fp.g, 5);
  ASSERT_EQ(t.depth(), 5u);
  EXPECT_FALSE(t.truncated);
  for (std::size_t k = 1; k <= 5; ++k) {
    EXPECT_EQ(t.level(k).period, std::size_t{1} << k);
    const double expect = 2.0 * std::pow(std::abs(fp.lambda_star), static_cast<double>(k));
    EXPECT_NEAR(t.level(k).intervals[0].length() / expect, 1.0, 1e-8);
  }
}

TEST(Tower, AccumulationParameterNestedAndDisjoint) {
  const auto t = tower(QuadraticMap{fixtures::cascade10().c_infinity}, 6);
  ASSERT_EQ(t.depth(), 6u);
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto& lv = t.level(k);
    EXPECT_LE(lv.nesting_defect, 1e-10);
    EXPECT_EQ(lv.intervals[0].hi, std::abs(lv.lambda));
    auto iv = lv.intervals;
    std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < iv.size(); ++i) EXPECT_LT(iv[i - 1].hi, iv[i].lo);
    // Every child inside some parent.
    for (const auto& c : lv.intervals) {
      bool inside = false;
      for (const auto& p : t.level(k - 1).intervals) inside |= p.contains(c, 1e-10);
      EXPECT_TRUE(inside);
    }
  }
}

TEST(Tower, GuckenheimerConstantRecorded) {
  const auto t = tower(fixtures::feigenbaum().g, 8);
  for (const auto& lv : t.levels) {
    const double c = lv.max_ratio_to_central();
    EXPECT_GE(c, 1.0);
    EXPECT_LT(c, 10.0);
  }
}

TEST(Tower, TruncationMarker) {
  const auto t = tower(kFam.member(0.5), 4);
  EXPECT_TRUE(t.truncated);
  EXPECT_EQ(t.depth(), 0u);
  EXPECT_FALSE(t.truncation_reason.empty());
  // f_{1.3} renormalizes once; R f_{1.3} has an attracting 2-cycle.
  const auto t2 = tower(kFam.member(1.3), 4);
  EXPECT_TRUE(t2.truncated);
  EXPECT_EQ(t2.depth(), 1u);
}

TEST(Tower, CsvAndHeader) {
  const auto t = tower(fixtures::feigenbaum().g, 3);
  const auto csv = tower_csv(t);
  EXPECT_EQ(csv.rfind("level,index,left,right,length\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1u + 1 + 2 + 4 + 8);
  const auto h = tower_header_json(t);
  EXPECT_EQ(h["levels"][3]["p_k"], 8);
}

TEST(Permutation, PeriodDoublingOrder) {
  const auto st = detect(kFam.member(1.3));
  EXPECT_EQ(permutation_of(st).image, (std::vector<int>{0, 1}));
  EXPECT_LT(st.intervals[0].hi, st.intervals[1].lo);
}

TEST(Permutation, PeriodThreeNearSuperstable) {
  // The superstable period-3 parameter is degenerate; step just inside the window.
  const double c3 = oracle::bisect([](double c) { return oracle::quad_iter(c, 0.0, 3); }, 1.7, 1.8);
  EXPECT_THROW(detect(kFam.member(c3)), DegenerateScaling);
  const auto st = detect(kFam.member(c3 + 1e-4));
  EXPECT_EQ(st.p, 3u);
  EXPECT_EQ(permutation_of(st).image, (std::vector<int>{1, 2, 0}));
}

TEST(Permutation, OverlapRejected) {
  RenormStep bad{2, 0.5, {}, {{-0.5, 0.5}, {0.4, 1.0}}};
  EXPECT_THROW(permutation_of(bad), OverlapError);
}

TEST(Permutation, InvariantUnderRefinement) {
  for (double c : {fixtures::cascade10().c_infinity, 1.78}) {
    const auto t = tower(QuadraticMap{c}, 2);
    ASSERT_EQ(t.depth(), 2u);
    const auto& theta = *t.level(1).perm;
    std::vector<Interval> centers;
    for (std::size_t i = 0; i < t.level(1).period; ++i) {
      const double m = t.level(2).intervals[i].mid();
      centers.push_back({m, m});
    }
    std::vector<std::size_t> order(centers.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return centers[a].lo < centers[b].lo; });
    std::vector<int> rank(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
    EXPECT_EQ(rank, theta.image);
    for (std::size_t i = 0; i < t.level(1).period; ++i)
      EXPECT_TRUE(t.level(1).intervals[i].contains(centers[i].lo));
  }
}

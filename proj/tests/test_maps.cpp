#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace renormlab;

namespace {

const QuadraticFamily kFam;

// A hand-made orthogonal-basis map: phi(u) = 1 - 1.3 u + 0.1 u^2 - 0.05 u^3
// converted exactly.
UnimodalMap cubic_map() { return to_basis(UnimodalMap(Basis::MonomialU, {1.0, -1.3, 0.1, -0.05}), Basis::OrthogonalU, 3); }

std::vector<UnimodalMap> corpus() {
  return {kFam.member(1.3), kFam.member(2.0), cubic_map(), fixtures::feigenbaum().g, fixtures::period3().g};
}

}  // namespace

TEST(Eval, QuadraticExamples) {
  EXPECT_EQ(eval(kFam.member(1.0), 0.0), 1.0);
  EXPECT_EQ(eval(kFam.member(1.0), 1.0), 0.0);
  EXPECT_NEAR(eval(kFam.member(1.3), 0.3), 1.0 - 1.3 * 0.09, 1e-15);
}

TEST(Eval, ClampsOutsideInterval) {
  const auto f = kFam.member(1.3);
  EXPECT_EQ(f.eval(1.0 + 1e-13), f.eval(1.0));
  EXPECT_EQ(f.eval(-3.0), f.eval(-1.0));
}

TEST(Eval, OrthogonalBasisMatchesTrigonometricChebyshev) {
  const auto& g = fixtures::feigenbaum().g;
  const std::vector<double> c(g.coeffs().begin(), g.coeffs().end());
  for (int k = 0; k <= 50; ++k) {
    const double x = -1.0 + 2.0 * k / 50.0;
    EXPECT_NEAR(g.eval(x), oracle::cheb_phi(c, x * x), 1e-14);
  }
}

TEST(Deriv, Examples) {
  EXPECT_EQ(deriv(kFam.member(1.0), 0.0, 1), 0.0);
  EXPECT_EQ(deriv(kFam.member(1.0), 0.0, 2), -2.0);
  EXPECT_NEAR(deriv(kFam.member(1.3), 0.5, 1), -2.0 * 1.3 * 0.5, 1e-15);
}

TEST(Deriv, RejectsHigherOrders) {
  EXPECT_THROW(deriv(kFam.member(1.0), 0.2, 3), UnsupportedOrder);
  EXPECT_THROW(deriv(kFam.member(1.0), 0.2, 0), UnsupportedOrder);
}

TEST(Deriv, CriticalPointAtZeroForCorpus) {
  for (const auto& f : corpus()) EXPECT_EQ(f.derivative(0.0), 0.0);
}

TEST(Deriv, MatchesCentralDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-0.99, 0.99);
  for (const auto& f : corpus()) {
    auto F = [&](double x) { return f.eval(x); };
    auto Fp = [&](double x) { return f.derivative(x); };
    for (int i = 0; i < 20; ++i) {
      const double x = U(rng);
      const double fd = oracle::central(F, x, 1e-6);
      const double an = f.derivative(x);
      EXPECT_LE(std::abs(fd - an), 1e-7 * std::max(1.0, std::abs(an))) << "x=" << x;
      const double fd2 = oracle::central(Fp, x, 1e-6);
      EXPECT_LE(std::abs(fd2 - f.second_derivative(x)), 1e-6 * std::max(1.0, std::abs(fd2)));
    }
  }
}

TEST(Orbit, Examples) {
  EXPECT_EQ(orbit(kFam.member(1.0), 0.0, 3).points, (std::vector<double>{0, 1, 0, 1}));
  EXPECT_EQ(orbit(kFam.member(2.0), 0.0, 2).points, (std::vector<double>{0, 1, -1}));
  const auto o = orbit(kFam.member(1.3), 0.0, 2).points;
  EXPECT_EQ(o[1], 1.0);
  EXPECT_NEAR(o[2], 1.0 - 1.3, 1e-15);
}

TEST(Orbit, RecordsClampedAmount) {
  const auto r = orbit(kFam.member(1.0), 1.25, 1);
  EXPECT_EQ(r.points.front(), 1.0);
  EXPECT_NEAR(r.clamp_total, 0.25, 1e-15);
  EXPECT_EQ(orbit(kFam.member(1.3), 0.1, 10).clamp_total, 0.0);
}

TEST(Member, Coefficients) {
  const auto f = member(kFam, 1.0);
  EXPECT_EQ(f.basis(), Basis::MonomialU);
  EXPECT_EQ(std::vector<double>(f.coeffs().begin(), f.coeffs().end()), (std::vector<double>{1.0, -1.0}));
}

TEST(Member, FirstBifurcationAtThreeQuarters) {
  // Fixed point x* = (-1 + sqrt(1 + 4c)) / (2c); f'(x*) = -1 at c = 3/4.
  const double c = 0.75;
  const double xs = (-1.0 + std::sqrt(1.0 + 4.0 * c)) / (2.0 * c);
  const auto f = member(kFam, c);
  EXPECT_NEAR(f.eval(xs), xs, 1e-15);
  EXPECT_NEAR(f.derivative(xs), -1.0, 1e-15);
}

TEST(Member, FullMap) { EXPECT_EQ(iterate(member(kFam, 2.0), 0.0, 2), -1.0); }

TEST(Member, DomainErrors) {
  EXPECT_THROW(member(kFam, 0.0), DomainError);
  EXPECT_THROW(member(kFam, -1.0), DomainError);
  EXPECT_THROW(member(kFam, 2.0001), DomainError);
}

TEST(Member, ReproducesQuadraticToMachinePrecision) {
  for (double c : {0.3, 1.0, 1.401155, 1.9}) {
    const auto f = member(kFam, c);
    for (int k = 0; k < 100; ++k) {
      const double x = -1.0 + 2.0 * k / 99.0;
      EXPECT_NEAR(f.eval(x), oracle::quad(c, x), 4.5e-16);
    }
  }
}

TEST(QuadraticMap, AgreesWithMember) {
  for (double c : {0.7, 1.3, 1.8}) {
    const auto f = member(kFam, c);
    const QuadraticMap q{c};
    for (int k = 0; k <= 40; ++k) {
      const double x = -1.0 + k / 20.0;
      EXPECT_EQ(q.eval(x), f.eval(x));
      EXPECT_EQ(q.derivative(x), f.derivative(x));
    }
  }
}

TEST(Validate, QuadraticPasses) {
  const auto d = validate(kFam.member(1.0));
  EXPECT_TRUE(d.ok());
  EXPECT_EQ(d.monotonicity_margin, 1.0);
}

TEST(Validate, IncreasingPhiFlagged) {
  const auto d = validate(UnimodalMap(Basis::MonomialU, {1.0, 1.0}));
  EXPECT_LT(d.monotonicity_margin, 0.0);
  EXPECT_FALSE(d.monotone());
  EXPECT_FALSE(d.ok());
}

TEST(Validate, FixedPointPasses) { EXPECT_TRUE(validate(fixtures::feigenbaum().g).ok()); }

TEST(Construction, EnforcesNormalization) {
  EXPECT_THROW(UnimodalMap(Basis::MonomialU, {1.0 + 1e-9, -1.0}), DomainError);
  EXPECT_NO_THROW(UnimodalMap(Basis::MonomialU, {1.0 + 1e-13, -1.0}));
  EXPECT_THROW(UnimodalMap(Basis::MonomialU, {}), DomainError);
  EXPECT_THROW(UnimodalMap(Basis::MonomialU, {1.0, NAN}), DomainError);
  EXPECT_THROW(UnimodalMap(Basis::MonomialU, std::vector<double>(22, 0.0)), DomainError);
}

TEST(Construction, NormalizedAndEvenForCorpus) {
  for (const auto& f : corpus()) {
    EXPECT_NEAR(f.eval(0.0), 1.0, 1e-12);
    for (int k = 0; k <= 64; ++k) {
      const double x = k / 64.0;
      EXPECT_EQ(f.eval(x), f.eval(-x));
    }
  }
}

TEST(Basis, ConversionRoundTrip) {
  const UnimodalMap m(Basis::MonomialU, {1.0, -1.3, 0.1, -0.05});
  const auto o = to_basis(m, Basis::OrthogonalU, 3);
  const auto back = to_basis(o, Basis::MonomialU, 3);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(back.coeffs()[j], m.coeffs()[j], 1e-15);
  for (int k = 0; k <= 20; ++k) EXPECT_NEAR(o.eval(k / 20.0), m.eval(k / 20.0), 1e-15);
}

TEST(Basis, PaddingAndTruncationLoss) {
  const auto f = to_basis(kFam.member(1.3), Basis::OrthogonalU, 24);
  EXPECT_EQ(f.degree(), 24u);
  EXPECT_NEAR(f.eval(0.4), oracle::quad(1.3, 0.4), 1e-15);
  EXPECT_THROW(to_basis(cubic_map(), Basis::OrthogonalU, 2), TruncationLoss);
}

TEST(Basis, StringNames) {
  EXPECT_EQ(basis_from_string(to_string(Basis::MonomialU)), Basis::MonomialU);
  EXPECT_EQ(basis_from_string(to_string(Basis::OrthogonalU)), Basis::OrthogonalU);
  EXPECT_THROW(basis_from_string("Legendre"), DomainError);
}

TEST(Projection, ExactForPolynomials) {
  const auto pr = project_even([](double x) { return 1.0 - 1.3 * x * x + 0.2 * std::pow(x, 6); }, 10);
  EXPECT_LT(pr.residual, 1e-14);
  const std::vector<double> c = pr.coeffs;
  for (int k = 0; k <= 20; ++k) {
    const double x = k / 20.0;
    EXPECT_NEAR(oracle::cheb_phi(c, x * x), 1.0 - 1.3 * x * x + 0.2 * std::pow(x, 6), 1e-14);
  }
  const auto mono = project_even([](double x) { return 1.0 - 1.3 * x * x; }, 4, Basis::MonomialU);
  EXPECT_NEAR(mono.coeffs[1], -1.3, 1e-13);
}

TEST(Json, RoundTripsBitExactly) {
  for (const auto& f : corpus()) {
    const nlohmann::json j = f;
    const auto text = j.dump();
    const auto back = map_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back, f);
    EXPECT_EQ(j.at("degree").get<std::size_t>(), f.degree());
  }
  EXPECT_THROW(map_from_json(nlohmann::json{{"basis", "MonomialU"}, {"degree", 3}, {"coeffs", {1.0, -1.0}}}),
               DomainError);
}

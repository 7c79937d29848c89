#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "snls/errors.hpp"
#include "snls/exponents.hpp"
#include "support.hpp"

using namespace snls;
using namespace snls::testing;

namespace {

Rational random_rational(RandomStream& rng, std::int64_t lo_num, std::int64_t range, std::int64_t max_den) {
  const auto den = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_den)) + 1;
  const auto num = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(range * den)) + lo_num * den;
  return Rational(num, den);
}

}  // namespace

TEST(Rational, NormalizesSignAndCommonFactors) {
  const Rational r(6, -8);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 4);
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_EQ(Rational(2, 3) / Rational(4, 9), Rational(3, 2));
  EXPECT_LT(Rational(-1, 2), Rational(1, 3));
  EXPECT_EQ(Rational(4, 3).str(), "4/3");
  EXPECT_THROW(Rational(1, 0), DomainError);
}

TEST(Rational, FieldAxiomsOnRandomValues) {
  RandomStream rng = RandomStream::derive(21, StreamRole::corpus_fit, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const Rational a = random_rational(rng, -5, 10, 40);
    const Rational b = random_rational(rng, -5, 10, 40);
    EXPECT_EQ(a + b - b, a);
    if (b != Rational(0)) EXPECT_EQ(a * b / b, a);
    EXPECT_EQ(std::gcd(a.num(), a.den()), a.num() == 0 ? a.den() : 1);
    EXPECT_EQ(a < b, a.value() < b.value());
  }
}

TEST(Exponent, ParsesRationalsAndInfinity) {
  EXPECT_EQ(Exponent::parse("6"), Exponent(6));
  EXPECT_EQ(Exponent::parse("4/3"), Exponent(Rational(4, 3)));
  EXPECT_TRUE(Exponent::parse("inf").is_infinite());
  EXPECT_EQ(Exponent::infinity().reciprocal(), Rational(0));
  EXPECT_THROW(Exponent::parse("abc"), DomainError);
  EXPECT_THROW(Exponent::parse("1/2"), DomainError);  // below 1
  EXPECT_THROW(Exponent::infinity().finite(), DomainError);
}

TEST(Exponent, ConjugateEndpoints) {
  EXPECT_TRUE(conjugate(Exponent(1)).is_infinite());
  EXPECT_EQ(conjugate(Exponent::infinity()), Exponent(1));
  EXPECT_EQ(conjugate(Exponent(2)), Exponent(2));
  EXPECT_EQ(conjugate(Exponent(Rational(4, 3))), Exponent(4));
}

TEST(Exponent, ConjugateIsAnInvolution) {
  RandomStream rng = RandomStream::derive(22, StreamRole::corpus_fit, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Rational g = random_rational(rng, 1, 20, 60);
    if (g == Rational(1)) continue;
    const Exponent gamma(g);
    const Exponent dual = conjugate(gamma);
    EXPECT_EQ(gamma.reciprocal() + dual.reciprocal(), Rational(1));
    EXPECT_EQ(conjugate(dual), gamma);
  }
}

// ---------------------------------------------------------------------------

TEST(Gate, FocusingTwoDimensionsHalf) {
  EXPECT_EQ(check_assumptions(2, 0.5, 1).outcome, GateOutcome::admissible);
}

TEST(Gate, FocusingTwoDimensionsAboveCritical) {
  const auto v = check_assumptions(2, 1.5, 1);
  EXPECT_EQ(v.outcome, GateOutcome::rejected);
  EXPECT_FALSE(v.permitted());
  EXPECT_FALSE(v.reason.empty());
}

TEST(Gate, DefocusingThreeDimensionsFlagsRegularity) {
  const auto v = check_assumptions(3, 1.5, -1);
  EXPECT_EQ(v.outcome, GateOutcome::admissible_with_flag);
  EXPECT_TRUE(v.permitted());
  EXPECT_NE(v.reason.find("L^inf"), std::string::npos);
  EXPECT_EQ(v.label(), "admissible-with-flag");
}

TEST(Gate, BoundariesAreExclusive) {
  EXPECT_EQ(check_assumptions(2, 1.0, 1).outcome, GateOutcome::rejected);
  EXPECT_EQ(check_assumptions(3, 2.0 / 3.0, 1).outcome, GateOutcome::rejected);
  EXPECT_EQ(check_assumptions(1, 1.999, 1).outcome, GateOutcome::admissible);
  EXPECT_EQ(check_assumptions(3, 2.0, -1).outcome, GateOutcome::rejected);
  EXPECT_EQ(check_assumptions(3, 1.28, -1).outcome, GateOutcome::admissible);
  EXPECT_EQ(check_assumptions(3, 1.281, -1).outcome, GateOutcome::admissible_with_flag);
  EXPECT_EQ(check_assumptions(2, 50.0, -1).outcome, GateOutcome::admissible);
  EXPECT_EQ(check_assumptions(1, 50.0, -1).outcome, GateOutcome::admissible);
}

TEST(Gate, OutsideCoveredDimensions) {
  EXPECT_THROW(check_assumptions(4, 0.1, -1), DomainError);
  EXPECT_THROW(check_assumptions(0, 0.1, -1), DomainError);
}

TEST(Gate, AgreesWithClosedFormOnRandomInputs) {
  RandomStream rng = RandomStream::derive(23, StreamRole::corpus_fit, 0);
  const double flag = (1.0 + std::sqrt(17.0)) / 4.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const int alpha = rng() % 2 == 0 ? 1 : -1;
    const double sigma = uniform(rng, 0.0, 3.0);
    GateOutcome expected = GateOutcome::admissible;
    if (alpha == 1 && sigma >= 2.0 / d) expected = GateOutcome::rejected;
    else if (alpha == -1 && d == 3 && sigma >= 2.0) expected = GateOutcome::rejected;
    else if (d == 3 && sigma >= flag) expected = GateOutcome::admissible_with_flag;
    EXPECT_EQ(check_assumptions(d, sigma, alpha).outcome, expected) << d << " " << sigma << " " << alpha;
  }
}

// ---------------------------------------------------------------------------

TEST(Strichartz, EndpointInThreeDimensions) { EXPECT_TRUE(is_admissible_pair(3, 2, 6)); }

TEST(Strichartz, ForbiddenEndpointInTwoDimensions) {
  EXPECT_FALSE(is_admissible_pair(2, 2, Exponent::infinity()));
}

TEST(Strichartz, DiagonalPairInTwoDimensions) { EXPECT_TRUE(is_admissible_pair(2, 4, 4)); }

TEST(Strichartz, MoreCases) {
  EXPECT_TRUE(is_admissible_pair(1, 4, Exponent::infinity()));
  EXPECT_TRUE(is_admissible_pair(3, Exponent::infinity(), 2));
  EXPECT_TRUE(is_admissible_pair(3, Exponent(Rational(8, 3)), 4));
  EXPECT_FALSE(is_admissible_pair(3, 2, 5));
  EXPECT_FALSE(is_admissible_pair(1, 2, Exponent::infinity()));
}

TEST(Strichartz, EveryScalingPairInRangeIsAdmissible) {
  // Generate r in range, solve 2/p = d/2 - d/r exactly, and perturb.
  RandomStream rng = RandomStream::derive(24, StreamRole::corpus_fit, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const Rational r = random_rational(rng, 2, d == 3 ? 4 : 30, 30);
    const bool in_range = d < 3 || r <= Rational(6);
    const Rational two_over_p = Rational(d, 2) - Rational(d) / r;
    if (two_over_p <= Rational(0) || two_over_p > Rational(2)) continue;
    const Exponent p(Rational(2) / two_over_p);
    EXPECT_EQ(is_admissible_pair(d, p, r), in_range && !(p == Exponent(2) && d == 2));
    EXPECT_FALSE(is_admissible_pair(d, p, Exponent(r + Rational(1, 97))));
  }
}

// ---------------------------------------------------------------------------

TEST(LemmaExponent, Examples) {
  EXPECT_EQ(lemma_c_exponent(2, Rational(1, 4)), Rational(4, 3));
  EXPECT_EQ(lemma_c_exponent(2, Rational(1)), Rational(4, 3));
  EXPECT_EQ(lemma_c_exponent(3, Rational(1)), Rational(6, 5));
  EXPECT_EQ(lemma_c_exponent(2, Rational(1, 10)), Rational(5, 3));
  EXPECT_EQ(lemma_c_exponent(3, Rational(3, 2)), Rational(1));
}

TEST(LemmaExponent, BranchesMeetTheEmbeddingConstraint) {
  // The lower branch tends to 1 as sigma -> 1/2 while the upper one is 4/3, so
  // the exponent jumps there. Both satisfy (2 sigma + 1) p >= 2.
  EXPECT_EQ(lemma_c_exponent(2, Rational(1, 2)), Rational(4, 3));
  EXPECT_EQ(lemma_c_exponent(2, Rational(499, 1000)), Rational(1000, 999));
  RandomStream rng = RandomStream::derive(27, StreamRole::corpus_fit, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const Rational sigma = random_rational(rng, 0, 2, 60) + Rational(1, 1000);
    EXPECT_GE((Rational(2) * sigma + Rational(1)) * lemma_c_exponent(2, sigma), Rational(2));
  }
}

TEST(LemmaExponent, RangeOnRandomSigma) {
  RandomStream rng = RandomStream::derive(25, StreamRole::corpus_fit, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const Rational s2 = random_rational(rng, 0, 5, 50) + Rational(1, 1000);
    const Rational p2 = lemma_c_exponent(2, s2);
    EXPECT_GT(p2, Rational(1));
    EXPECT_LT(p2, Rational(2));
    const Rational s3 = Rational(3, 2) * random_rational(rng, 0, 1, 50) + Rational(1, 1000);
    if (s3 > Rational(3, 2)) continue;
    const Rational p3 = lemma_c_exponent(3, s3);
    EXPECT_GE(p3, Rational(1));
    EXPECT_LT(p3, Rational(2));
  }
}

TEST(LemmaExponent, Errors) {
  EXPECT_THROW(lemma_c_exponent(3, Rational(8, 5)), DomainError);
  EXPECT_THROW(lemma_c_exponent(2, Rational(0)), DomainError);
  EXPECT_THROW(lemma_c_exponent(1, Rational(1)), DomainError);
}

// ---------------------------------------------------------------------------

TEST(NonlinearityQuotient, ZeroFieldIsSkipped) {
  EXPECT_THROW(nonlinearity_quotient(Field(Grid::make(2, 16, 4.0)), 1.0, 1.0, 4.0 / 3.0), DomainError);
}

TEST(NonlinearityQuotient, InvariantUnderScaling) {
  RandomStream rng = RandomStream::derive(26, StreamRole::corpus_fit, 0);
  const auto g = Grid::make(2, 32, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Field u = random_field(g, rng);
    const double sigma = uniform(rng, 0.1, 1.5);
    const double s = uniform(rng, 0.0, 2.0), p = uniform(rng, 1.0, 2.0);
    Field v = u;
    v *= 2.0;
    EXPECT_LT(rel_err(nonlinearity_quotient(v, sigma, s, p), nonlinearity_quotient(u, sigma, s, p)), 1e-8);
  }
}

TEST(NonlinearityQuotient, ConstantFieldClosedForm) {
  // F(c) = |c|^{2s} c is constant, so only the k = 0 multiplier (1) acts.
  const auto g = Grid::make(2, 16, 3.0);
  const double c = 0.8, sigma = 1.0, p = 4.0 / 3.0, vol = 9.0;
  const Field u = sample_field(g, [&](std::span<const double>) { return Complex(c); });
  const double expected = std::pow(c, 3) * std::pow(vol, 1.0 / p) / std::pow(c * c * vol, 1.5);
  EXPECT_LT(rel_err(nonlinearity_quotient(u, sigma, 1.0, p), expected), 1e-12);
}

TEST(NonlinearityEstimate, FitAndHoldOutAgreeInTwoDimensions) {
  const auto g = Grid::make(2, 32, 10.0);
  NonlinearityOptions opt;
  opt.seed = 5;
  const auto report = verify_nonlinearity_estimate(g, Rational(1), 200, opt);
  ASSERT_EQ(report.variants.size(), 1u);
  EXPECT_EQ(report.variants[0].label, "H^{1,4/3}");
  EXPECT_EQ(report.variants[0].skipped, 0u);
  EXPECT_GT(report.variants[0].corpus_max, 0.0);
  EXPECT_GE(report.variants[0].fit_max, report.variants[0].corpus_max);
  EXPECT_TRUE(report.passed()) << report.variants[0].holdout_max << " vs " << report.variants[0].fit_max;
}

TEST(NonlinearityEstimate, WithoutClimbTheConstantIsTheCorpusMaximum) {
  const auto g = Grid::make(2, 16, 6.0);
  NonlinearityOptions opt;
  opt.refine_steps = 0;
  const auto report = verify_nonlinearity_estimate(g, Rational(1, 2), 50, opt);
  EXPECT_EQ(report.variants[0].fit_max, report.variants[0].corpus_max);
  opt.refine_steps = 100;
  const auto climbed = verify_nonlinearity_estimate(g, Rational(1, 2), 50, opt);
  EXPECT_EQ(climbed.variants[0].corpus_max, report.variants[0].corpus_max);
  EXPECT_GT(climbed.variants[0].fit_max, report.variants[0].corpus_max);
}

TEST(NonlinearityEstimate, ThreeDimensionsCarriesFractionalVariant) {
  const auto g = Grid::make(3, 16, 8.0);
  const auto report = verify_nonlinearity_estimate(g, Rational(5, 4), 40);
  ASSERT_EQ(report.variants.size(), 2u);
  EXPECT_EQ(report.variants[0].integrability, Rational(12, 11));
  EXPECT_EQ(report.variants[1].label, "H^{3/4,6/5}");
  EXPECT_DOUBLE_EQ(report.variants[1].smoothness, 0.75);
  // at sigma = 1 the two estimates coincide
  EXPECT_EQ(verify_nonlinearity_estimate(g, Rational(1), 4).variants.size(), 1u);
  const auto half = verify_nonlinearity_estimate(g, Rational(1, 2), 4);
  EXPECT_EQ(half.variants.size(), 1u);
}

TEST(NonlinearityEstimate, Reproducible) {
  const auto g = Grid::make(2, 16, 6.0);
  NonlinearityOptions opt;
  opt.seed = 8;
  const auto a = verify_nonlinearity_estimate(g, Rational(1, 2), 30, opt);
  opt.workers = 4;
  const auto b = verify_nonlinearity_estimate(g, Rational(1, 2), 30, opt);
  EXPECT_EQ(a.variants[0].fit_max, b.variants[0].fit_max);
  EXPECT_EQ(a.variants[0].corpus_max, b.variants[0].corpus_max);
  EXPECT_EQ(a.variants[0].holdout_max, b.variants[0].holdout_max);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cyclegap/theory.hpp"

using namespace cyclegap;

namespace {

BoundParams params(int k, double L) { return BoundParams::defaults(k, L, 1.0); }

// Largest k with ln k below 10, i.e. round(e^10).
constexpr int kE10 = 22026;

ArcLengths arcmod_lengths_under_S(const BoundParams& p, Rng& rng) {
  for (;;) {
    std::vector<std::int64_t> lengths(static_cast<std::size_t>(p.k));
    for (auto& len : lengths) len = sample_geometric(p.L, rng);
    ArcLengths out(std::move(lengths));
    if (event_S(out, p)) return out;
  }
}

}  // namespace

TEST(EpsilonK, Examples) {
  // Frozen from a 30-digit evaluation of 12 (ln 22026)^-7.
  EXPECT_NEAR(epsilon_k(params(kE10, 1.0)), 1.2000177638613556e-6, 1e-18);
  BoundParams p = params(50, 1.0);
  p.M = 1.0;
  p.gamma = 1.0;
  EXPECT_DOUBLE_EQ(epsilon_k(p), 4.0);
  double last = INFINITY;
  for (int k = 3; k < 5000; k += 7) {
    const double e = epsilon_k(params(k, 1.0));
    EXPECT_LT(e, last);
    last = e;
  }
  try {
    epsilon_k(params(2, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Domain);
  }
}

TEST(DeltaK, Examples) {
  EXPECT_EQ(delta_from(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(*delta_from(0.5, 1.0), 1.0);
  // Frozen from a 30-digit evaluation composing epsilon_k.
  EXPECT_NEAR(*delta_k(params(kE10, 1.0)), 1.2000192039057172e-6, 1e-18);
  // Small k: epsilon_k exceeds the denominator, the bound says nothing.
  EXPECT_FALSE(delta_k(params(3, 1.0)).has_value());
  BoundParams weak = params(1000, 1.0);
  weak.cls.c = 1e-6;
  EXPECT_FALSE(delta_k(weak).has_value());
}

TEST(ClassifyAngle, Examples) {
  const auto p = params(64, 16.0);
  EXPECT_EQ(classify_angle(1.0, p), AngleRegion::Outside);
  EXPECT_EQ(classify_angle(-1.0, p), AngleRegion::LargeAngles);
  const double lnk = std::log(64.0);
  const cplx inside = std::polar(1.0 - 1.0 / (2.0 * 16.0 * std::pow(lnk, 8.0)),
                                 std::numbers::pi / (2.0 * p.M_phi * 16.0 * lnk));
  EXPECT_EQ(classify_angle(inside, p), AngleRegion::SmallAngles);
  EXPECT_EQ(classify_angle(1.0 + 1e-12, p), AngleRegion::Outside);
  EXPECT_EQ(classify_angle(0.5, p), AngleRegion::Outside);
  EXPECT_EQ(classify_angle(cplx(0.0, 1.0), p), AngleRegion::LargeAngles);
}

TEST(ClassifyAngle, PartitionsTheUnitDisk) {
  Rng rng(41);
  BoundParams p = params(8, 2.0);
  p.gamma = 1.0;  // wide annulus so that all three outcomes occur
  const double inner = phi_inner_radius(p);
  int seen[3] = {0, 0, 0};
  for (int t = 0; t < 10'000; ++t) {
    const double r = std::sqrt(rng.uniform_open01());
    const double theta = std::numbers::pi * (2.0 * rng.uniform_open01() - 1.0);
    const cplx mu = std::polar(r, theta);
    const auto region = classify_angle(mu, p);
    ++seen[static_cast<int>(region)];
    if (region != AngleRegion::Outside) {
      EXPECT_GE(std::abs(mu), inner);
      EXPECT_LE(std::abs(mu), 1.0);
      EXPECT_NE(mu, cplx(1.0));
      EXPECT_EQ(region == AngleRegion::SmallAngles, std::abs(std::arg(mu)) <= small_angle_threshold(p));
    }
  }
  for (int c : seen) EXPECT_GT(c, 0);
}

TEST(EventS, Examples) {
  const auto p = params(64, 16.0);
  EXPECT_TRUE(event_S(ArcLengths(std::vector<std::int64_t>(64, 1)), p));
  BoundParams q = params(3, 1.0);
  q.M = 100.0 / std::log(3.0);  // M L ln k = 100
  EXPECT_TRUE(event_S(ArcLengths{100, 1, 1}, q));
  EXPECT_FALSE(event_S(ArcLengths{1'000'000, 1, 1}, q));
}

TEST(LongArcFrequency, WithinFirstMomentBound) {
  Rng rng(42);
  const int trials = 10'000;
  const double freq = long_arc_frequency(64, 16.0, 3.0, trials, rng);
  const double bound = 2.0 * std::pow(64.0, 1.0 - 3.0);
  EXPECT_LE(freq, bound + 3.0 * bernoulli_se(bound, trials));
}

TEST(SmallAngleCriterion, Examples) {
  const ArcLengths equal{5, 5, 5};
  EXPECT_TRUE(small_angle_criterion(equal, 1.0 / 12.0));
  EXPECT_FALSE(small_angle_criterion(equal, 1.0 / 12.0 - 1e-9));
  EXPECT_FALSE(small_angle_criterion(ArcLengths{1, 1, 1, 100}, 1e-6));
  EXPECT_THROW(small_angle_criterion(equal, 0.0), Error);
}

TEST(SmallAngleCriterion, RarelyHoldsForArcmodLengths) {
  Rng rng(43);
  const double delta = *delta_k(params(256, 16.0));
  int holds = 0;
  const auto a = complete(256);
  for (int t = 0; t < 1000; ++t) holds += small_angle_criterion(sample_arcmod(16.0, 256, a, rng).lengths(), delta);
  EXPECT_LT(holds, 10);
}

TEST(MomentConcentration, WithinChebyshevBounds) {
  Rng rng(44);
  const int trials = 10'000;
  const auto f = moment_concentration_check(100, 8.0, trials, rng);
  EXPECT_LE(f.low_mean, 4.0 / 100 + 3.0 * bernoulli_se(4.0 / 100, trials));
  EXPECT_LE(f.high_sq, 5.0 / 100 + 3.0 * bernoulli_se(5.0 / 100, trials));

  const auto degenerate = moment_concentration_check(10, 1.0, 100, rng);
  EXPECT_EQ(degenerate.low_mean, 0.0);
  EXPECT_EQ(degenerate.high_sq, 0.0);
  EXPECT_THROW(moment_concentration_check(10, 2.0, 99, rng), Error);
}

TEST(PPoly, Examples) {
  EXPECT_EQ(P_poly(ArcLengths{3, 7, 1}, 1.0), cplx(1.0));
  EXPECT_LT(std::abs(P_poly(ArcLengths{1, 2}, -1.0)), 1e-15);
  EXPECT_LT(std::abs(P_poly(ArcLengths{2, 4}, cplx(0.0, 1.0))), 1e-15);
}

TEST(PPoly, StaysInUnitDisk) {
  Rng rng(45);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::int64_t> lengths;
    const int k = 1 + static_cast<int>(rng.uniform_index(10));
    for (int i = 0; i < k; ++i) lengths.push_back(sample_geometric(6.0, rng));
    const cplx mu = std::polar(std::sqrt(rng.uniform_open01()), 2.0 * std::numbers::pi * rng.uniform_open01());
    EXPECT_LE(std::abs(P_poly(ArcLengths(lengths), mu)), 1.0 + 1e-15);
  }
}

TEST(LargeAngleScan, SingleArc) {
  const auto p = params(1, 1.0);
  // k = 1: ln k is clamped to 1, so the cut is pi / M_phi = 1/9.
  EXPECT_NEAR(small_angle_threshold(p), 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(large_angle_scan(ArcLengths{1}, p, 200), std::cos(1.0 / 9.0), 1e-12);
  EXPECT_LT(large_angle_scan(ArcLengths{1}, p, 200), 1.0);
  EXPECT_THROW(large_angle_scan(ArcLengths{1}, p, 99), Error);
}

TEST(LargeAngleScan, EvenLengthsReachOneAtMinusOne) {
  // With every L_i even, mu = -1 gives P = 1, so the maximum over the large
  // angles is attained at arg = pi, not at the smallest argument.
  const auto p = params(4, 2.0);
  EXPECT_NEAR(large_angle_scan(ArcLengths{2, 2, 2, 2}, p, 500), 1.0, 1e-12);
}

TEST(LargeAngleScan, MonteCarloReport) {
  Rng rng(46);
  const auto p = params(64, 16.0);
  const double cut = 1.0 - std::pow(std::log(64.0), -p.eta);
  const auto a = complete(64);
  int above = 0;
  const int samples = 200;
  for (int t = 0; t < samples; ++t) {
    above += large_angle_scan(sample_arcmod(16.0, 64, a, rng).lengths(), p, 400) > cut;
  }
  const double fraction = static_cast<double>(above) / samples;
  // Desk-scale k is far from the asymptotic regime; the fraction is reported.
  RecordProperty("fraction_above", std::to_string(fraction));
  EXPECT_GE(fraction, 0.0);
  EXPECT_LE(fraction, 1.0);
}

TEST(CosPlus, Clamps) {
  EXPECT_EQ(cos_plus(0.0), 1.0);
  EXPECT_EQ(cos_plus(std::numbers::pi), 0.0);
  EXPECT_NEAR(cos_plus(std::numbers::pi / 3.0), 0.5, 1e-15);
}

TEST(PNearOne, NoEigenvalueInAnnulus) {
  const auto chain = CondensedChain::from_lengths(complete(4), ArcLengths{1, 1, 1, 1});
  const auto report = P_near_1_check(chain, eigenvalues_dense(expand(chain)), params(4, 1.0));
  EXPECT_TRUE(report.applicable);
  EXPECT_TRUE(report.entries.empty());
}

TEST(PNearOne, SingleCycleAllPass) {
  const auto chain = CondensedChain::from_lengths(complete(1), ArcLengths{6});
  const auto report = P_near_1_check(chain, eigenvalues_dense(expand(chain)), params(1, 6.0));
  ASSERT_TRUE(report.applicable);
  EXPECT_EQ(report.entries.size(), 5u);
  for (const auto& e : report.entries) {
    EXPECT_LT(e.value, 1e-12);
    EXPECT_EQ(e.outcome, CheckOutcome::Pass);
  }
}

TEST(PNearOne, NotApplicableWithoutS) {
  const auto chain = CondensedChain::from_lengths(complete(3), ArcLengths{1, 1, 500});
  const auto report = P_near_1_check(chain, eigenvalues_dense(expand(chain)), params(3, 1.0));
  EXPECT_FALSE(report.applicable);
  EXPECT_THROW(P_near_1_check(chain, eigenvalues_dense(expand(chain)), params(4, 1.0)), Error);
}

TEST(PNearOne, RandomCompleteInstances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto chain = sample_arcmod(8.0, 16, complete(16), rng);
    const auto report = P_near_1_check(chain, eigenvalues_dense(expand(chain)), params(16, 8.0));
    for (const auto& e : report.entries) EXPECT_NE(e.outcome, CheckOutcome::Fail) << "seed " << seed;
  }
}

TEST(PerpBound, Examples) {
  const auto cycle = CondensedChain::from_lengths(complete(1), ArcLengths{6});
  const auto m = expand(cycle);
  const auto sys = eigensystem_dense(m);
  int checked = 0;
  for (std::size_t i = 0; i < sys.values.size(); ++i) {
    const auto pair = sys.pair(i);
    if (std::abs(pair.mu - 1.0) < 1e-8) {
      EXPECT_THROW(perp_bound_check(cycle, {1.0, pair.vector}, params(1, 6.0)), Error);
      continue;
    }
    const auto r = perp_bound_check(cycle, pair, params(1, 6.0));
    EXPECT_EQ(r.ratio, 0.0);
    EXPECT_EQ(r.outcome, CheckOutcome::Pass);
    ++checked;
  }
  EXPECT_EQ(checked, 5);
}

TEST(PerpBound, RandomCompleteInstances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto chain = sample_arcmod(8.0, 16, complete(16), rng);
    const auto m = expand(chain);
    const auto sys = eigensystem_dense(m);
    const auto p = params(16, 8.0);
    for (std::size_t i = 0; i < sys.values.size(); ++i) {
      const auto pair = sys.pair(i);
      if (std::abs(pair.mu - 1.0) < 1e-8) continue;
      if (classify_angle(pair.mu, p) == AngleRegion::Outside) continue;
      if (full_residual(m, pair) >= 1e-8) continue;
      EXPECT_NE(perp_bound_check(chain, pair, p).outcome, CheckOutcome::Fail);
    }
  }
}

TEST(TheoremBound, Examples) {
  // Frozen from a 30-digit evaluation of 1 / (32 (ln 32)^8).
  EXPECT_NEAR(theorem_bound(params(32, 32.0), Model::Arcmod, 32.0), 1.5013650390893531e-6, 1e-18);
  const auto p = params(20, 5.0);
  EXPECT_DOUBLE_EQ(theorem_bound(p, Model::Arcmod, 5.0), theorem_bound(p, Model::Cyclemod, 100.0));
  BoundParams flat = params(20, 5.0);
  flat.gamma = 0.0;
  EXPECT_DOUBLE_EQ(theorem_bound(flat, Model::Arcmod, 5.0), 0.2);
  EXPECT_DOUBLE_EQ(theorem_bound(flat, Model::Cyclemod, 100.0), 0.2);
  EXPECT_THROW(theorem_bound(params(2, 1.0), Model::Arcmod, 1.0), Error);
}

TEST(SmallAngleSanity, LinearizationAndModulus) {
  Rng rng(47);
  const auto p = params(64, 16.0);
  const double eps = epsilon_k(p);
  for (int t = 0; t < 1000; ++t) {
    const auto lengths = arcmod_lengths_under_S(p, rng);
    const cplx mu = sample_small_angle_mu(p, rng);
    ASSERT_EQ(classify_angle(mu, p), AngleRegion::SmallAngles);
    for (auto len : lengths.values()) {
      const auto lin = linearization_error(len, mu);
      ASSERT_LE(lin.error, lin.bound);
      ASSERT_GE(std::norm(ipow(mu, len)), 1.0 - eps);
    }
  }
}

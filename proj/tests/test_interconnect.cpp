#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <vector>

#include "cyclegap/interconnect.hpp"
#include "oracles.hpp"

using namespace cyclegap;

namespace {

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i].push_back(m(i, j));
  }
  return out;
}

void expect_valid_generator_output(const InterconnectMatrix& a) {
  const auto& e = a.entries();
  EXPECT_EQ((e - e.transpose()).cwiseAbs().maxCoeff(), 0.0);
  for (int i = 0; i < a.k(); ++i) {
    EXPECT_LT(std::abs(e.row(i).sum() - 1.0), 1e-12);
    EXPECT_LT(std::abs(e.col(i).sum() - 1.0), 1e-12);
  }
}

// Two-colouring by BFS over the nonzero pattern; true iff every component
// is bipartite.
bool bipartite(const InterconnectMatrix& a) {
  std::vector<int> colour(a.k(), -1);
  for (int s = 0; s < a.k(); ++s) {
    if (colour[s] >= 0) continue;
    colour[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < a.k(); ++v) {
        if (a(u, v) == 0.0) continue;
        if (colour[v] < 0) {
          colour[v] = 1 - colour[u];
          queue.push_back(v);
        } else if (colour[v] == colour[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

int nonzeros_in_row(const InterconnectMatrix& a, int row) {
  int count = 0;
  for (int j = 0; j < a.k(); ++j) count += a(row, j) != 0.0;
  return count;
}

Eigen::MatrixXd k4_over_3() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 1.0 / 3.0);
  m.diagonal().setZero();
  return m;
}

Eigen::MatrixXd two_blocks() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m.topLeftCorner(2, 2).setConstant(0.5);
  m.bottomRightCorner(2, 2).setConstant(0.5);
  return m;
}

// Symmetric doubly stochastic matrix with dyadic entries: a weighted sum of
// (P + P^T)/2 over random permutations, weights in multiples of 1/16.
Eigen::MatrixXd random_dyadic_birkhoff(int k, Rng& rng) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  int remaining = 16;
  while (remaining > 0) {
    const int w = remaining == 1 ? 1 : 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(remaining)));
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    shuffle(std::span<int>(perm), rng);
    for (int i = 0; i < k; ++i) {
      m(i, perm[i]) += w / 32.0;
      m(perm[i], i) += w / 32.0;
    }
    remaining -= w;
  }
  return m;
}

}  // namespace

TEST(Complete, EntriesAreOneOverK) {
  EXPECT_EQ(complete(1).entries()(0, 0), 1.0);
  const auto a2 = complete(2);
  EXPECT_EQ(a2.entries(), Eigen::MatrixXd::Constant(2, 2, 0.5));
  const auto a4 = complete(4);
  EXPECT_EQ(a4.entries(), Eigen::MatrixXd::Constant(4, 4, 0.25));
  EXPECT_NEAR(spectral_gap_symmetric(a4), 1.0, 1e-12);
  EXPECT_EQ(a4.kind(), InterconnectKind::complete());
}

TEST(Complete, RejectsZero) {
  try {
    complete(0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidDimension);
  }
}

TEST(InterconnectMatrixValidation, RejectsBrokenInvariants) {
  Eigen::MatrixXd asym(2, 2);
  asym << 0.4, 0.6, 0.6, 0.4;
  asym(0, 1) = 0.6000000001;
  EXPECT_THROW(InterconnectMatrix(asym, InterconnectKind::custom()), Error);

  Eigen::MatrixXd not_stochastic = Eigen::MatrixXd::Constant(2, 2, 0.4);
  EXPECT_THROW(InterconnectMatrix(not_stochastic, InterconnectKind::custom()), Error);

  Eigen::MatrixXd negative(2, 2);
  negative << 1.5, -0.5, -0.5, 1.5;
  EXPECT_THROW(InterconnectMatrix(negative, InterconnectKind::custom()), Error);

  EXPECT_THROW(InterconnectMatrix(Eigen::MatrixXd(2, 3), InterconnectKind::custom()), Error);
}

TEST(RandomRegular, K4IsTheOnlyCubicGraphOnFourVertices) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto a = random_regular(4, 3, rng);
    EXPECT_EQ(a.entries(), k4_over_3());
  }
}

TEST(RandomRegular, DegreeAndZeroDiagonal) {
  Rng rng(1);
  const auto a = random_regular(6, 4, rng);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(a(i, i), 0.0);
    int quarter = 0;
    for (int j = 0; j < 6; ++j) quarter += a(i, j) == 0.25;
    EXPECT_EQ(quarter, 4);
  }
  expect_valid_generator_output(a);
}

TEST(RandomRegular, ExactlyDOnesPerRowOverManySeeds) {
  for (auto [k, d] : std::vector<std::pair<int, int>>{{8, 4}, {16, 4}, {16, 8}}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      const auto a = random_regular(k, d, rng);
      for (int i = 0; i < k; ++i) {
        ASSERT_EQ(nonzeros_in_row(a, i), d);
        ASSERT_EQ(a(i, i), 0.0);
      }
      expect_valid_generator_output(a);
    }
  }
}

TEST(RandomRegular, HalfDegreeAtSweepSizes) {
  // Largest desk-sweep k with d = k/2; plain rejection sampling would never
  // terminate here.
  Rng rng(3);
  const auto a = random_regular(34, 17, rng);
  for (int i = 0; i < 34; ++i) EXPECT_EQ(nonzeros_in_row(a, i), 17);
  expect_valid_generator_output(a);
  EXPECT_GT(spectral_gap_symmetric(a), 0.0);
}

TEST(RandomRegular, InfeasibleParameters) {
  Rng rng(0);
  auto code_of = [&](int k, int d) {
    try {
      random_regular(k, d, rng);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  EXPECT_EQ(code_of(5, 3), Errc::InfeasibleDegree);
  EXPECT_EQ(code_of(6, 6), Errc::InfeasibleDegree);
  EXPECT_EQ(code_of(6, 2), Errc::InfeasibleDegree);
  EXPECT_EQ(code_of(3, 2), Errc::InvalidDimension);
}

TEST(RandomRegular, DeterministicPerSeed) {
  Rng a(42), b(42);
  EXPECT_EQ(random_regular(16, 8, a).entries(), random_regular(16, 8, b).entries());
}

TEST(RandomRegular, CoversAllCubicGraphsOnSixVertices) {
  // There are exactly 70 labeled 3-regular graphs on 6 vertices. The
  // sequential sampler is close to uniform; every graph must show up and no
  // graph may be drawn more than twice as often as another.
  std::map<std::vector<int>, int> seen;
  Rng rng(11);
  const int draws = 14000;
  for (int t = 0; t < draws; ++t) {
    const auto a = random_regular(6, 3, rng);
    std::vector<int> key;
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) key.push_back(a(i, j) != 0.0);
    }
    ++seen[key];
  }
  EXPECT_EQ(seen.size(), 70u);
  int lo = draws, hi = 0;
  for (const auto& [key, count] : seen) {
    lo = std::min(lo, count);
    hi = std::max(hi, count);
  }
  EXPECT_LT(hi, 2 * lo);
}

TEST(BollobasChung, K4ForFourVertices) {
  Rng rng(5);
  const auto a = bollobas_chung(4, rng);
  EXPECT_EQ(a.entries(), k4_over_3());
  EXPECT_NEAR(spectral_gap_symmetric(a), 2.0 / 3.0, 1e-12);
}

TEST(BollobasChung, ThreeThirdsPerRow) {
  Rng rng(7);
  const auto a = bollobas_chung(6, rng);
  for (int i = 0; i < 6; ++i) {
    int thirds = 0;
    for (int j = 0; j < 6; ++j) thirds += a(i, j) == 1.0 / 3.0;
    EXPECT_EQ(thirds, 3);
    EXPECT_EQ(a(i, i), 0.0);
    EXPECT_EQ(a(i, (i + 1) % 6), 1.0 / 3.0);
  }
  expect_valid_generator_output(a);
}

TEST(BollobasChung, ConnectedWithPositiveGap) {
  for (int k : {6, 8, 16, 32, 64}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const auto a = bollobas_chung(k, rng);
      expect_valid_generator_output(a);
      // The cycle makes every output connected, so the absolute gap is
      // positive exactly when the graph is not bipartite.
      if (bipartite(a)) {
        EXPECT_NEAR(spectral_gap_symmetric(a), 0.0, 1e-12);
      } else {
        EXPECT_GT(spectral_gap_symmetric(a), 1e-9);
      }
    }
  }
}

TEST(BollobasChung, ParityAndSize) {
  Rng rng(0);
  try {
    bollobas_chung(5, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Parity);
  }
  EXPECT_THROW(bollobas_chung(2, rng), Error);
}

TEST(SpectralGapSymmetric, HandExamples) {
  EXPECT_NEAR(spectral_gap_symmetric(complete(4)), 1.0, 1e-12);
  EXPECT_NEAR(spectral_gap_symmetric(k4_over_3()), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(spectral_gap_symmetric(two_blocks()), 0.0, 1e-12);
  EXPECT_EQ(spectral_gap_symmetric(complete(1)), 1.0);
}

TEST(SpectralGapSymmetric, RejectsAsymmetric) {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, 1.0, 0.5, 0.5;
  try {
    spectral_gap_symmetric(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvariantViolation);
  }
}

TEST(SpectralGapSymmetric, AgreesWithExactCharacteristicPolynomial) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + trial % 5;
    const Eigen::MatrixXd m = random_dyadic_birkhoff(k, rng);
    const InterconnectMatrix a(m, InterconnectKind::custom());
    const double expected = oracle::exact_symmetric_gap(oracle::rational_matrix(rows_of(m)));
    EXPECT_NEAR(spectral_gap_symmetric(a), expected, 1e-10) << "trial " << trial;
  }
  const double k4 = oracle::exact_symmetric_gap(oracle::rational_matrix(rows_of(k4_over_3())));
  EXPECT_NEAR(k4, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(oracle::exact_symmetric_gap(oracle::rational_matrix(rows_of(two_blocks()))), 0.0);
}

TEST(InClass, Examples) {
  EXPECT_TRUE(in_class(complete(8), {1.0, 0.0}));
  EXPECT_FALSE(in_class(InterconnectMatrix(two_blocks(), InterconnectKind::custom()), {0.1, 0.0}));
  EXPECT_TRUE(in_class(InterconnectMatrix(k4_over_3(), InterconnectKind::custom()), {0.5, 0.0}));
  EXPECT_TRUE(in_class(complete(1), {1.0, 2.0}));
  EXPECT_THROW(in_class(complete(2), {0.0, 0.0}), Error);
  EXPECT_THROW(in_class(complete(2), {1.0, -1.0}), Error);
}

TEST(InterconnectKindText, RoundTrip) {
  for (const auto& kind : {InterconnectKind::complete(), InterconnectKind::regular(4),
                           InterconnectKind::bollobas_chung(), InterconnectKind::custom()}) {
    EXPECT_EQ(parse_interconnect_kind(to_string(kind)), kind);
  }
  EXPECT_EQ(parse_interconnect_kind("bc"), InterconnectKind::bollobas_chung());
  EXPECT_THROW(parse_interconnect_kind("regular:x"), Error);
  EXPECT_THROW(parse_interconnect_kind("star"), Error);
}

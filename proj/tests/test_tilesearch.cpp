#include <gtest/gtest.h>

#include "dbtile/tilesearch.hpp"
#include "oracles.hpp"

using namespace dbtile;

namespace {

using Rational = boost::rational<std::int64_t>;

Rational phi(const char* word, unsigned i) { return score(Word::parse(word, 2), i).as_rational(); }

// Independent evaluation of phi_i as a base-K fraction with exact rationals:
// (K-1-d_i)/K + sum_{j>=1} d_{i+j} K^-(j+1), digits past M equal to K-1.
Rational phi_reference(const Word& w, unsigned i) {
  const std::int64_t k = w.base;
  const unsigned m = static_cast<unsigned>(w.size());
  auto digit = [&](unsigned n) -> std::int64_t { return n == 0 ? 0 : (n > m ? k - 1 : w.digits[n - 1]); };
  Rational r(k - 1 - digit(i), k);
  std::int64_t den = k * k;
  for (unsigned j = 1; i + j <= m; ++j, den *= k) r += Rational(digit(i + j), den);
  // remaining tail of (K-1) digits sums to K^-(M-i+1)
  r += Rational(1, den / k);
  return r;
}

}  // namespace

TEST(ScoreTest, WorkedExamples) {
  EXPECT_EQ(phi("0010100", 3), Rational(5, 32));
  EXPECT_EQ(phi("010010", 2), Rational(3, 32));
  EXPECT_EQ(phi("100100", 1), Rational(5, 64));
  EXPECT_EQ(phi("100100", 4), Rational(1, 8));
}

TEST(ScoreTest, MatchesRationalReference) {
  for (Digit k = 2; k <= 4; ++k)
    for (unsigned m = 1; m <= 5; ++m) {
      const auto size = detail::checked_pow(k, m);
      for (std::uint64_t x = 0; x < size; ++x) {
        const auto w = Word::from_index(x, k, m);
        for (unsigned i = 0; i <= m; ++i) ASSERT_EQ(score(w, i).as_rational(), phi_reference(w, i)) << w.str() << ' ' << i;
      }
    }
}

TEST(ScoreTest, PositionOutOfRange) { EXPECT_THROW(score(Word::parse("01", 2), 3), std::out_of_range); }

TEST(ScoreTileTest, ReproducesReferenceTable) {
  const std::uint64_t expect[4][5] = {{3, 8, 19, 42, 90},
                                      {10, 41, 146, 485, 1559},
                                      {23, 129, 615, 2729, 11697},
                                      {44, 314, 1876, 10414, 55794}};
  for (Digit k = 2; k <= 5; ++k)
    for (unsigned m = 2; m <= 6; ++m) {
      const auto internal = score_tile_internal_edges(k, m);
      EXPECT_EQ(internal, expect[k - 2][m - 2]) << "K=" << k << " M=" << m;
    }
  EXPECT_EQ(detail::checked_pow(3, 5) - score_tile_internal_edges(3, 4), 97u);
  EXPECT_EQ(detail::checked_pow(5, 7) - score_tile_internal_edges(5, 6), 22331u);
}

TEST(ScoreTileTest, CertifiedAndAccounted) {
  for (Digit k = 2; k <= 4; ++k)
    for (unsigned m = 1; m <= 5; ++m) {
      const auto t = score_tile(k, m);
      const auto r = validate_tile(t);
      EXPECT_TRUE(r.certified()) << "K=" << k << " M=" << m;
      EXPECT_EQ(r.internal_edges + r.broken_edges, detail::checked_pow(k, m + 1));
      EXPECT_EQ(r.internal_edges, score_tile_internal_edges(k, m));
    }
}

TEST(ScoreTileTest, TiesFollowTrailingPattern) {
  for (Digit k = 2; k <= 6; ++k)
    for (unsigned m = 1; detail::checked_pow(k, m) <= 100000; ++m) {
      const auto s = score_levels(k, m);
      std::uint64_t pattern = 0;
      for (std::uint64_t x = 0; x < s.levels.size(); ++x) {
        const auto run = trailing_top_run(x, k, m);
        if (run > 0) {
          ++pattern;
          ASSERT_EQ(s.levels[x], static_cast<Level>(m));
        }
        const bool tied = std::binary_search(s.tie_nodes.begin(), s.tie_nodes.end(), x);
        ASSERT_EQ(tied, run >= 2) << word_string(x, k, m);
      }
      EXPECT_EQ(pattern, tie_node_count(k, m));
      EXPECT_EQ(s.tie_nodes.size(), m >= 2 ? tie_node_count(k, m - 1) : 0u);
    }
  EXPECT_EQ(tie_node_count(2, 3), 3u);
}

TEST(BoundTest, SmallestBinaryCase) {
  const auto r = lower_bound(2, 2);
  EXPECT_EQ(r.best_n, 4u);
  EXPECT_EQ(r.bound_real, BigRational(3, 2));
  EXPECT_EQ(r.bound_int, 2);
}

TEST(BoundTest, MatchesDirectMaximization) {
  for (Digit k = 2; k <= 5; ++k)
    for (unsigned m = 1; m <= 8; ++m) {
      const auto r = lower_bound(k, m);
      for (unsigned n = m + 1; n <= 4 * m + 8; ++n) EXPECT_LE(bound_term(k, m, n), r.bound_real);
      EXPECT_GE(BigRational(r.bound_int), r.bound_real);
      EXPECT_LT(BigRational(r.bound_int) - 1, r.bound_real);
    }
}

TEST(BoundTest, ScoreTilesExceedBound) {
  for (Digit k = 2; k <= 5; ++k)
    for (unsigned m = 1; m <= 6; ++m) {
      const auto broken = detail::checked_pow(k, m + 1) - score_tile_internal_edges(k, m);
      EXPECT_GT(BigRational(broken), lower_bound(k, m).bound_real);
    }
}

TEST(ExactSearchTest, SmallOptima) {
  struct Case {
    Digit k;
    unsigned m;
    std::size_t edges;
  };
  for (auto c : {Case{2, 1, 1}, Case{3, 1, 2}, Case{2, 2, 3}, Case{2, 3, 8}, Case{3, 2, 11}}) {
    const auto r = exact_optimal_tile(c.k, c.m);
    EXPECT_EQ(r.status, SearchStatus::ProvedOptimal);
    EXPECT_EQ(r.tile.edges.size(), c.edges) << "K=" << c.k << " M=" << c.m;
    EXPECT_TRUE(validate_tile(r.tile).certified());
    EXPECT_GE(r.tile.edges.size(), score_tile(c.k, c.m).edges.size());
  }
}

TEST(ExactSearchTest, OptimalTernaryTileHasUnitHeightLoops) {
  const auto r = exact_optimal_tile(3, 2);
  const auto report = validate_tile(r.tile);
  EXPECT_EQ(report.internal_edges, 11u);
  EXPECT_EQ(report.broken_edges, 16u);
  EXPECT_EQ(report.height, 1);
  // three independent cycles: 11 edges on 9 connected vertices
  const auto g = r.tile.digraph();
  std::size_t balanced_cycles = 0;
  for (const auto& c : oracle::simple_cycles(g)) balanced_cycles += c.forward == c.backward;
  EXPECT_EQ(balanced_cycles / 2, 4u);  // each cycle is found in both directions
}

TEST(ExactSearchTest, AgreesWithSubsetEnumeration) {
  EXPECT_EQ(oracle::exhaustive_optimum(2, 1), exact_optimal_tile(2, 1).tile.edges.size());
  EXPECT_EQ(oracle::exhaustive_optimum(2, 2), 3u);
  EXPECT_EQ(oracle::exhaustive_optimum(2, 2), exact_optimal_tile(2, 2).tile.edges.size());
  EXPECT_EQ(oracle::exhaustive_optimum(3, 1), exact_optimal_tile(3, 1).tile.edges.size());
  EXPECT_EQ(oracle::exhaustive_optimum(2, 3), exact_optimal_tile(2, 3).tile.edges.size());
}

TEST(ExactSearchTest, BudgetExhaustionIsReported) {
  ExactOptions o;
  o.budget_seconds = 0.0;
  const auto r = exact_optimal_tile(2, 4, o);
  EXPECT_EQ(r.status, SearchStatus::BudgetExceeded);
  EXPECT_TRUE(validate_tile(r.tile).certified());
  EXPECT_GE(r.tile.edges.size(), score_tile(2, 4).edges.size());
}

TEST(ExactSearchTest, GuardsTileSize) {
  EXPECT_THROW(exact_optimal_tile(3, 4), std::invalid_argument);
}

TEST(GreedyTest, OutputsAreCertified) {
  for (Digit k = 2; k <= 4; ++k)
    for (unsigned m = 1; m <= 4; ++m) {
      const auto t = greedy_tile(k, m, {1, 8, 1});
      const auto r = validate_tile(t);
      EXPECT_TRUE(r.certified()) << "K=" << k << " M=" << m;
      EXPECT_GE(BigRational(r.broken_edges), lower_bound(k, m).bound_real);
    }
}

TEST(GreedyTest, NeverWorseThanScoreTile) {
  for (auto [k, m] : {std::pair<Digit, unsigned>{3, 3}, {2, 5}, {3, 4}}) {
    const auto g = greedy_tile(k, m);
    EXPECT_GE(g.edges.size(), score_tile(k, m).edges.size());
  }
  EXPECT_GE(greedy_tile(3, 3).edges.size(), 41u);
}

TEST(GreedyTest, DeterministicAcrossThreadCounts) {
  const auto a = greedy_tile(3, 3, {42, 12, 1});
  const auto b = greedy_tile(3, 3, {42, 12, 4});
  EXPECT_EQ(a, b);
  EXPECT_EQ(tile_to_string(a), tile_to_string(greedy_tile(3, 3, {42, 12, 1})));
}

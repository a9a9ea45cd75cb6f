#include <gtest/gtest.h>

#include <sstream>

#include "dbtile/asymptotics.hpp"

using namespace dbtile;

TEST(IdealModelTest, WindowProbabilities) {
  EXPECT_EQ(window_probability(1), Rational(1, 3));
  EXPECT_EQ(window_probability(2), Rational(1, 6));
  EXPECT_EQ(ideal_break_frequency(1), Rational(1));
  EXPECT_THROW(window_probability(0), std::invalid_argument);
}

TEST(IdealModelTest, TelescopingIdentity) {
  for (std::int64_t m = 1; m <= 60; ++m) {
    Rational s(0);
    for (std::int64_t t = m; t <= 600; ++t) {
      s += window_probability(t);
      ASSERT_EQ(s, ideal_break_frequency(m) - Rational(2, t + 2));
    }
  }
  EXPECT_EQ(window_tail(4, 400), Rational(2, 5) - Rational(2, 402));
}

TEST(IdealModelTest, WindowOfOneAlwaysBreaks) {
  const auto r = simulate_ideal(1, 10000, 9);
  EXPECT_EQ(r.breaks, r.steps);
  EXPECT_EQ(r.observed(), 1.0);
}

TEST(IdealModelTest, SimulationIsDeterministic) {
  const auto a = simulate_ideal(6, 50000, 123);
  const auto b = simulate_ideal(6, 50000, 123);
  const auto c = simulate_ideal(6, 50000, 124);
  EXPECT_EQ(a.breaks, b.breaks);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NE(a.breaks, c.breaks);
}

TEST(IdealModelTest, SimulationNearExactFrequency) {
  for (unsigned m : {2u, 5u, 10u}) {
    const auto r = simulate_ideal(m, 200000, 77);
    EXPECT_GT(r.std_error, 0.0);
    EXPECT_LT(std::abs(r.observed() - r.exact_value()), 4 * r.std_error) << "M=" << m;
  }
}

TEST(IdealModelTest, RejectsShortRuns) { EXPECT_THROW(simulate_ideal(8, 50, 1), std::invalid_argument); }

TEST(ScoreTableTest, CellsAndCsv) {
  const auto cells = score_table({2, 3}, {2, 4});
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].internal, 3u);
  EXPECT_EQ(cells[0].broken, 5u);
  EXPECT_EQ(cells[3].internal, 146u);
  EXPECT_EQ(cells[3].broken, 97u);
  std::ostringstream os;
  write_score_csv(os, cells);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "K,M,internal,broken,fraction,two_over_M,bound_fraction");
  EXPECT_NE(os.str().find("3,4,146,97,"), std::string::npos);
}

TEST(SeriesTest, BinaryFractionsApproachTwoOverM) {
  const auto rows = asymptote_series(2, 2, 20);
  ASSERT_EQ(rows.size(), 19u);
  for (const auto& r : rows) {
    EXPECT_GT(r.broken_fraction, r.bound_fraction);
    if (r.exponent > 11) {
      EXPECT_GT(r.broken_fraction, r.two_over_m);
      EXPECT_LT(r.broken_fraction, r.log_corrected);
    }
  }
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].broken_fraction, rows[i - 1].broken_fraction);
}

#pragma once

// Idealized broken-edge model (sliding-window maxima of i.i.d. uniforms),
// its exact window probabilities, and score-tile tables and series.

#include <cmath>
#include <cstdint>
#include <deque>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "dbtile/tilesearch.hpp"

namespace dbtile {

using Rational = boost::rational<std::int64_t>;

/// Probability that a value is the maximum of a window of exactly m:
/// p(m) = 2 / ((m+1)(m+2)).
inline Rational window_probability(std::int64_t m) {
  if (m < 1) throw std::invalid_argument("window size must be >= 1");
  return Rational(2, (m + 1) * (m + 2));
}

/// sum_{m=M}^{T} p(m), accumulated term by term.
inline Rational window_tail(std::int64_t first, std::int64_t last) {
  Rational s(0);
  for (std::int64_t m = first; m <= last; ++m) s += window_probability(m);
  return s;
}

/// Limit of the tail sum: the break frequency 2/(M+1).
inline Rational ideal_break_frequency(std::int64_t m) {
  if (m < 1) throw std::invalid_argument("window size must be >= 1");
  return Rational(2, m + 1);
}

struct IdealModelResult {
  unsigned window = 0;
  std::uint64_t steps = 0;
  std::uint64_t breaks = 0;
  Rational exact;
  double std_error = 0;  // batch-means estimate

  double observed() const { return static_cast<double>(breaks) / static_cast<double>(steps); }
  Rational observed_rational() const {
    return Rational(static_cast<std::int64_t>(breaks), static_cast<std::int64_t>(steps));
  }
  double exact_value() const { return boost::rational_cast<double>(exact); }
};

/// Streams 64-bit uniform variates, tracks the position of the maximum of the
/// last M values with a monotone deque, and counts steps where that maximum
/// changes identity (k(i+1) != k(i) - 1). Counting starts after M fill draws
/// and M burn-in steps.
inline IdealModelResult simulate_ideal(unsigned window, std::uint64_t steps, std::uint64_t seed,
                                       unsigned batches = 100) {
  if (window < 1) throw std::invalid_argument("window size must be >= 1");
  if (steps < 10ull * window) throw std::invalid_argument("need at least 10*M steps");
  batches = static_cast<unsigned>(std::min<std::uint64_t>(batches, steps));

  std::mt19937_64 rng(seed);
  struct Item {
    std::uint64_t index;
    std::uint64_t value;
  };
  std::deque<Item> dq;
  std::uint64_t next = 0;
  auto push = [&] {
    const std::uint64_t x = rng();
    while (!dq.empty() && dq.back().value < x) dq.pop_back();
    if (!dq.empty() && dq.back().value == x)
      throw std::runtime_error("tied variates in the idealized model (probability ~2^-64)");
    dq.push_back({next++, x});
    while (dq.front().index + window < next) dq.pop_front();
  };

  for (unsigned i = 0; i < window; ++i) push();
  std::uint64_t argmax = dq.front().index;
  auto step = [&] {
    push();
    const bool broke = dq.front().index != argmax;
    argmax = dq.front().index;
    return broke;
  };
  for (unsigned i = 0; i < window; ++i) step();

  IdealModelResult r;
  r.window = window;
  r.steps = steps;
  r.exact = ideal_break_frequency(window);
  std::vector<double> batch_freq;
  const std::uint64_t per_batch = steps / batches;
  std::uint64_t in_batch = 0, batch_breaks = 0;
  for (std::uint64_t s = 0; s < steps; ++s) {
    const bool broke = step();
    r.breaks += broke;
    batch_breaks += broke;
    if (++in_batch == per_batch && batch_freq.size() < batches) {
      batch_freq.push_back(static_cast<double>(batch_breaks) / static_cast<double>(per_batch));
      in_batch = batch_breaks = 0;
    }
  }
  double mean = 0;
  for (double f : batch_freq) mean += f;
  mean /= static_cast<double>(batch_freq.size());
  double var = 0;
  for (double f : batch_freq) var += (f - mean) * (f - mean);
  if (batch_freq.size() > 1) var /= static_cast<double>(batch_freq.size() - 1);
  r.std_error = std::sqrt(var / static_cast<double>(batch_freq.size()));
  return r;
}

struct ScoreCell {
  Digit degree = 2;
  unsigned exponent = 1;
  std::uint64_t internal = 0;
  std::uint64_t broken = 0;

  std::uint64_t total() const { return detail::checked_pow(degree, exponent + 1); }
  double broken_fraction() const { return static_cast<double>(broken) / static_cast<double>(total()); }
};

inline ScoreCell score_cell(Digit k, unsigned m) {
  ScoreCell c{k, m, score_tile_internal_edges(k, m), 0};
  c.broken = c.total() - c.internal;
  return c;
}

inline std::vector<ScoreCell> score_table(const std::vector<Digit>& degrees, const std::vector<unsigned>& exponents) {
  std::vector<ScoreCell> out;
  for (auto k : degrees)
    for (auto m : exponents) out.push_back(score_cell(k, m));
  return out;
}

inline void write_score_csv(std::ostream& os, const std::vector<ScoreCell>& cells) {
  os << "K,M,internal,broken,fraction,two_over_M,bound_fraction\n";
  os.precision(10);
  for (const auto& c : cells) {
    const double bound = lower_bound(c.degree, c.exponent).bound_value() / static_cast<double>(c.total());
    os << c.degree << ',' << c.exponent << ',' << c.internal << ',' << c.broken << ',' << c.broken_fraction()
       << ',' << 2.0 / c.exponent << ',' << bound << '\n';
  }
}

struct SeriesRow {
  unsigned exponent = 1;
  std::uint64_t broken = 0;
  double broken_fraction = 0;
  double two_over_m = 0;
  double one_over_m = 0;
  double log_corrected = 0;  // 2 / (M + 1 - log_K(M)/2), heuristic
  double bound_fraction = 0;
};

inline std::vector<SeriesRow> asymptote_series(Digit k, unsigned m_first, unsigned m_last) {
  std::vector<SeriesRow> rows;
  for (unsigned m = m_first; m <= m_last; ++m) {
    const auto cell = score_cell(k, m);
    SeriesRow r;
    r.exponent = m;
    r.broken = cell.broken;
    r.broken_fraction = cell.broken_fraction();
    r.two_over_m = 2.0 / m;
    r.one_over_m = 1.0 / m;
    r.log_corrected = 2.0 / (m + 1.0 - std::log(static_cast<double>(m)) / std::log(static_cast<double>(k)) / 2.0);
    r.bound_fraction = lower_bound(k, m).bound_value() / static_cast<double>(cell.total());
    rows.push_back(r);
  }
  return rows;
}

inline void write_series_tsv(std::ostream& os, Digit k, const std::vector<SeriesRow>& rows) {
  os << "# K=" << k << "; log_corrected is a heuristic curve\n";
  os << "M\tbroken\tbroken_fraction\ttwo_over_M\tone_over_M\tlog_corrected\tbound_fraction\n";
  os.precision(10);
  for (const auto& r : rows)
    os << r.exponent << '\t' << r.broken << '\t' << r.broken_fraction << '\t' << r.two_over_m << '\t'
       << r.one_over_m << '\t' << r.log_corrected << '\t' << r.bound_fraction << '\n';
}

}  // namespace dbtile

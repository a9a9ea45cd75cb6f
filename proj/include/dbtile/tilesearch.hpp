#pragma once

// Tile generators: K-ary expansion score stratification, exact
// branch-and-bound over level maps, and a union-find greedy. Also the
// path-counting lower bound on broken edges.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "dbtile/graphs.hpp"
#include "dbtile/stratification.hpp"

namespace dbtile {

using BigRational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// K-ary expansion score
// ---------------------------------------------------------------------------

/// phi_i scaled by K^(M+1). With d_0 = 0 and d_n = K-1 beyond M the infinite
/// tail sums to exactly K^i, so the scaled value is an integer:
///   (K-1-d_i) K^M + sum_{j=1}^{M-i} d_{i+j} K^(M-j) + K^i.
struct ScaledScore {
  std::uint64_t value = 0;
  Digit degree = 2;
  unsigned exponent = 0;

  std::uint64_t denominator() const { return detail::checked_pow(degree, exponent + 1); }
  boost::rational<std::int64_t> as_rational() const {
    return {static_cast<std::int64_t>(value), static_cast<std::int64_t>(denominator())};
  }
  friend auto operator<=>(const ScaledScore& a, const ScaledScore& b) { return a.value <=> b.value; }
  friend bool operator==(const ScaledScore& a, const ScaledScore& b) { return a.value == b.value; }
};

inline ScaledScore score(const Word& w, unsigned position) {
  const unsigned m = static_cast<unsigned>(w.size());
  if (position > m) throw std::out_of_range("score position must lie in [0, M]");
  const std::uint64_t k = w.base;
  (void)detail::checked_pow(k, m + 1);
  auto digit = [&](unsigned n) -> std::uint64_t { return n == 0 ? 0 : (n > m ? k - 1 : w.digits[n - 1]); };
  std::uint64_t km = detail::checked_pow(k, m);
  std::uint64_t v = (k - 1 - digit(position)) * km;
  std::uint64_t place = km;
  for (unsigned j = 1; j + position <= m; ++j) {
    place /= k;
    v += digit(position + j) * place;
  }
  v += detail::checked_pow(k, position);
  return {v, w.base, m};
}

struct ScoreLevels {
  std::vector<Level> levels;
  std::vector<std::uint64_t> tie_nodes;  // nodes with more than one minimizing position
};

/// Length of the trailing run of K-1 digits when every earlier digit is
/// below K-1; 0 if the word does not have that shape.
inline unsigned trailing_top_run(std::uint64_t x, Digit k, unsigned m) {
  unsigned run = 0;
  while (run < m && x % k == k - 1u) {
    x /= k;
    ++run;
  }
  for (unsigned i = run; i < m; ++i, x /= k)
    if (x % k == k - 1u) return 0;
  return run;
}

/// level(x) = argmin_i phi_i(x); tied nodes go to level M.
inline ScoreLevels score_levels(Digit k, unsigned m) {
  if (k < 2 || m < 1) throw std::invalid_argument("score tiles need K >= 2 and M >= 1");
  const std::uint64_t km = detail::checked_pow(k, m);
  (void)detail::checked_pow(k, m + 1);
  std::vector<std::uint64_t> pow(m + 1, 1);
  for (unsigned i = 1; i <= m; ++i) pow[i] = pow[i - 1] * k;

  ScoreLevels out;
  out.levels.assign(km, 0);
  std::vector<Digit> d(m + 1, 0);
  for (std::uint64_t x = 0; x < km; ++x) {
    std::uint64_t rest = x;
    for (unsigned j = m; j >= 1; --j) {
      d[j] = static_cast<Digit>(rest % k);
      rest /= k;
    }
    // score_i = (K-1-d_i) K^M + (x mod K^(M-i)) K^i + K^i
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    unsigned arg = 0, hits = 0;
    for (unsigned i = 0; i <= m; ++i) {
      const std::uint64_t di = i == 0 ? 0 : d[i];
      const std::uint64_t s = (k - 1 - di) * km + (x % pow[m - i]) * pow[i] + pow[i];
      if (s < best) {
        best = s;
        arg = i;
        hits = 1;
      } else if (s == best) {
        ++hits;
      }
    }
    if (hits > 1) {
      if (trailing_top_run(x, k, m) == 0)
        throw std::logic_error("score tie outside the trailing (K-1) pattern at " + word_string(x, k, m));
      out.tie_nodes.push_back(x);
      arg = m;
    }
    out.levels[x] = arg;
  }
  return out;
}

inline TileGraph score_tile(Digit k, unsigned m) { return saturated_tile(k, m, score_levels(k, m).levels); }

/// Internal edge count of the score tile without materializing the edges.
inline std::uint64_t score_tile_internal_edges(Digit k, unsigned m) {
  const auto levels = score_levels(k, m).levels;
  const std::uint64_t size = levels.size();
  std::uint64_t count = 0;
  for (std::uint64_t u = 0; u < size; ++u)
    for (std::uint64_t c = 0; c < k; ++c)
      if (levels[u] == levels[(k * u + c) % size] + 1) ++count;
  return count;
}

/// Nodes whose last n >= 1 digits are K-1 and earlier digits are below K-1:
/// sum_{j=0}^{M-1} (K-1)^j.
inline std::uint64_t tie_node_count(Digit k, unsigned m) {
  if (k < 2) throw std::invalid_argument("K must be >= 2");
  std::uint64_t total = 0, term = 1;
  for (unsigned j = 0; j < m; ++j) {
    total += term;
    term *= (k - 1);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Lower bound on broken edges
// ---------------------------------------------------------------------------

struct BoundReport {
  Digit degree = 2;
  unsigned exponent = 1;
  unsigned best_n = 0;
  BigRational bound_real;
  BigInt bound_int;           // ceiling of bound_real
  BigRational asymptotic;     // K^(M+1) / M

  double bound_value() const { return static_cast<double>(bound_real); }
};

/// (K^(M+1) - K^(2M+1-N)) / N for one path length N.
inline BigRational bound_term(Digit k, unsigned m, unsigned n) {
  BigInt kk = k;
  BigRational top = BigRational(boost::multiprecision::pow(kk, m + 1));
  const long e = 2L * m + 1 - static_cast<long>(n);
  BigRational sub = e >= 0 ? BigRational(boost::multiprecision::pow(kk, static_cast<unsigned>(e)))
                           : BigRational(BigInt(1), boost::multiprecision::pow(kk, static_cast<unsigned>(-e)));
  return (top - sub) / BigRational(n);
}

/// Maximizes the bound term over N in [M+1, 4M+8]; ties keep the smaller N.
inline BoundReport lower_bound(Digit k, unsigned m) {
  if (k < 2 || m < 1) throw std::invalid_argument("lower bound needs K >= 2 and M >= 1");
  BoundReport r;
  r.degree = k;
  r.exponent = m;
  for (unsigned n = m + 1; n <= 4 * m + 8; ++n) {
    auto t = bound_term(k, m, n);
    if (r.best_n == 0 || t > r.bound_real) {
      r.bound_real = t;
      r.best_n = n;
    }
  }
  const BigInt num = boost::multiprecision::numerator(r.bound_real);
  const BigInt den = boost::multiprecision::denominator(r.bound_real);
  r.bound_int = num / den + (num % den != 0 ? 1 : 0);
  r.asymptotic = BigRational(boost::multiprecision::pow(BigInt(k), m + 1)) / BigRational(m);
  return r;
}

// ---------------------------------------------------------------------------
// Exact branch-and-bound
// ---------------------------------------------------------------------------

enum class SearchStatus { ProvedOptimal, BudgetExceeded };

inline std::string_view to_string(SearchStatus s) {
  return s == SearchStatus::ProvedOptimal ? "ProvedOptimal" : "BudgetExceeded";
}

struct ExactOptions {
  int level_range = -1;            // L; default 2M+1
  double budget_seconds = 60.0;
  std::uint64_t max_tile_size = 32;
  std::ostream* progress = nullptr;
};

struct ExactResult {
  TileGraph tile;
  SearchStatus status = SearchStatus::ProvedOptimal;
  std::uint64_t nodes = 0;
  double seconds = 0;
  int level_range = 0;
};

namespace detail {

// Saturated tiles induced by level maps into a window of width L. Every
// B_K^M edge lives in exactly one "block": the complete bipartite K x K
// graph between parents a.w and children w.b of a middle string w. The
// bound relaxes each block independently.
class ExactSearch {
 public:
  ExactSearch(Digit k, unsigned m, int range, double budget, std::ostream* progress)
      : k_(k), m_(m), range_(range), budget_(budget), progress_(progress) {
    n_ = detail::checked_pow(k, m);
    blocks_ = n_ / k;
    span_ = 2 * range_ + 1;
    offset_ = range_;
    level_.assign(n_, kUnset);
    build_order();
    self_loops_.assign(blocks_, {});
    for (Digit c = 0; c < k; ++c) {
      std::uint64_t w = 0;
      for (unsigned i = 0; i < m; ++i) w = w * k + c;
      self_loops_[parent_block(w)].push_back(w);
    }
    parent_count_.assign(blocks_ * span_, 0);
    child_count_.assign(blocks_ * span_, 0);
    free_parents_.assign(blocks_, k);
    free_children_.assign(blocks_, k);
    block_value_.assign(blocks_, 0);
    for (std::uint64_t b = 0; b < blocks_; ++b) {
      block_value_[b] = block_bound(b);
      total_bound_ += block_value_[b];
    }
  }

  void seed_incumbent(const std::vector<Level>& levels, std::uint64_t edges) {
    best_ = static_cast<std::int64_t>(edges);
    best_levels_ = levels;
  }

  ExactResult run() {
    start_ = std::chrono::steady_clock::now();
    dfs(0, 0, 0);
    ExactResult r;
    r.status = aborted_ ? SearchStatus::BudgetExceeded : SearchStatus::ProvedOptimal;
    r.nodes = nodes_;
    r.seconds = elapsed();
    r.level_range = range_;
    auto lv = best_levels_;
    const Level lo = *std::min_element(lv.begin(), lv.end());
    for (auto& l : lv) l -= lo;
    r.tile = saturated_tile(k_, m_, std::move(lv));
    return r;
  }

 private:
  static constexpr Level kUnset = std::numeric_limits<Level>::min();

  std::uint64_t parent_block(std::uint64_t v) const { return v % blocks_; }
  std::uint64_t child_block(std::uint64_t v) const { return v / k_; }

  // Order vertices so blocks complete early: breadth-first over blocks.
  void build_order() {
    std::vector<bool> placed(n_, false), block_seen(blocks_, false);
    std::vector<std::uint64_t> queue{0};
    block_seen[0] = true;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const auto b = queue[qi];
      std::vector<std::uint64_t> members;
      for (std::uint64_t a = 0; a < k_; ++a) members.push_back(a * blocks_ + b);  // parents a.w
      for (std::uint64_t c = 0; c < k_; ++c) members.push_back(b * k_ + c);       // children w.c
      for (auto v : members) {
        if (placed[v]) continue;
        placed[v] = true;
        order_.push_back(v);
        for (auto nb : {parent_block(v), child_block(v)})
          if (!block_seen[nb]) {
            block_seen[nb] = true;
            queue.push_back(nb);
          }
      }
    }
  }

  std::int64_t block_bound(std::uint64_t b) const {
    const auto* pc = &parent_count_[b * span_];
    const auto* cc = &child_count_[b * span_];
    const std::int64_t fp = free_parents_[b], fc = free_children_[b];
    std::int64_t fixed = 0, best_p = 0, best_c = 0, best_joint = 0;
    for (int l = 0; l < span_; ++l) {
      const std::int64_t above = l + 1 < span_ ? pc[l + 1] : 0;  // parents one level up
      fixed += above * cc[l];
      best_p = std::max<std::int64_t>(best_p, fp * cc[l]);
      best_c = std::max<std::int64_t>(best_c, fc * above);
      best_joint = std::max<std::int64_t>(best_joint, fp * cc[l] + fc * above);
    }
    std::int64_t joint = fp * fc;
    // a free constant word would be paired with itself
    for (auto v : self_loops_[b])
      if (level_[v] == kUnset) joint -= 1;
    return fixed + std::max(best_p + best_c, best_joint + joint);
  }

  void place(std::uint64_t v, Level l) {
    level_[v] = l;
    const auto pb = parent_block(v), cb = child_block(v);
    parent_count_[pb * span_ + (l + offset_)]++;
    free_parents_[pb]--;
    child_count_[cb * span_ + (l + offset_)]++;
    free_children_[cb]--;
    refresh(pb);
    if (cb != pb) refresh(cb);
  }

  void unplace(std::uint64_t v) {
    const Level l = level_[v];
    const auto pb = parent_block(v), cb = child_block(v);
    parent_count_[pb * span_ + (l + offset_)]--;
    free_parents_[pb]++;
    child_count_[cb * span_ + (l + offset_)]--;
    free_children_[cb]++;
    level_[v] = kUnset;
    refresh(pb);
    if (cb != pb) refresh(cb);
  }

  void refresh(std::uint64_t b) {
    total_bound_ -= block_value_[b];
    block_value_[b] = block_bound(b);
    total_bound_ += block_value_[b];
  }

  // Satisfied edges between v (at level l) and already placed vertices.
  int satisfied_with_placed(std::uint64_t v, Level l) const {
    int s = 0;
    for (std::uint64_t c = 0; c < k_; ++c) {
      const auto ch = (k_ * v + c) % n_;
      if (ch != v && level_[ch] != kUnset && level_[ch] == l - 1) ++s;
    }
    for (std::uint64_t a = 0; a < k_; ++a) {
      const auto p = a * blocks_ + v / k_;
      if (p != v && level_[p] != kUnset && level_[p] == l + 1) ++s;
    }
    return s;
  }

  bool heights_ok() const {
    Digraph g{n_, {}};
    std::vector<Level> lv(n_, 0);
    for (std::uint64_t u = 0; u < n_; ++u) {
      if (level_[u] == kUnset) continue;
      lv[u] = level_[u];
      for (std::uint64_t c = 0; c < k_; ++c) {
        const auto ch = (k_ * u + c) % n_;
        if (level_[ch] != kUnset && level_[ch] + 1 == level_[u]) g.edges.push_back({u, ch});
      }
    }
    const auto h = max_loop_height(g, lv);
    return !h || *h <= static_cast<Level>(m_);
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void dfs(std::size_t depth, Level lo, Level hi) {
    if (aborted_) return;
    if ((++nodes_ & 0xFFF) == 0) {
      if (elapsed() > budget_) {
        aborted_ = true;
        return;
      }
      if (progress_ && (nodes_ & 0xFFFFFF) == 0)
        *progress_ << "exact: nodes=" << nodes_ << " best=" << best_ << " t=" << elapsed() << "s\n";
    }
    if (total_bound_ <= best_) return;
    if (depth == order_.size()) {
      best_ = total_bound_;  // all blocks fixed: bound equals edge count
      best_levels_.assign(level_.begin(), level_.end());
      if (progress_) *progress_ << "exact: improved to " << best_ << " edges\n";
      return;
    }
    const auto v = order_[depth];
    Level from = hi - range_, to = lo + range_;
    if (depth == 0) from = to = 0;
    // value ordering: most satisfied edges first, then nearest to 0
    std::vector<std::pair<int, Level>> cand;
    for (Level l = from; l <= to; ++l) cand.push_back({satisfied_with_placed(v, l), l});
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return std::abs(a.second) < std::abs(b.second);
    });
    for (const auto& [sat, l] : cand) {
      place(v, l);
      if (total_bound_ > best_ && (sat < 2 || heights_ok()))
        dfs(depth + 1, std::min(lo, l), std::max(hi, l));
      unplace(v);
      if (aborted_) return;
    }
  }

  Digit k_;
  unsigned m_;
  int range_;
  double budget_;
  std::ostream* progress_;
  std::uint64_t n_ = 0, blocks_ = 0;
  int span_ = 0, offset_ = 0;
  std::vector<Level> level_;
  std::vector<std::uint64_t> order_;
  std::vector<std::vector<std::uint64_t>> self_loops_;
  std::vector<int> parent_count_, child_count_;
  std::vector<int> free_parents_, free_children_;
  std::vector<std::int64_t> block_value_;
  std::int64_t total_bound_ = 0;
  std::int64_t best_ = -1;
  std::vector<Level> best_levels_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Maximum-edge saturated tile over level maps with span <= L and no loop
/// higher than M. The score tile seeds the incumbent.
inline ExactResult exact_optimal_tile(Digit k, unsigned m, ExactOptions opt = {}) {
  if (k < 2 || m < 1) throw std::invalid_argument("exact search needs K >= 2 and M >= 1");
  const auto size = detail::checked_pow(k, m);
  if (size > opt.max_tile_size)
    throw std::invalid_argument("K^M = " + std::to_string(size) + " exceeds the exact-search guard");
  const int range = opt.level_range >= 0 ? opt.level_range : static_cast<int>(2 * m + 1);
  if (range < 1) throw std::invalid_argument("level range must be >= 1");
  detail::ExactSearch search(k, m, range, opt.budget_seconds, opt.progress);
  auto seed = score_tile(k, m);
  if (static_cast<int>(m) <= range) search.seed_incumbent(*seed.levels, seed.edges.size());
  return search.run();
}

// ---------------------------------------------------------------------------
// Greedy
// ---------------------------------------------------------------------------

namespace detail {

// Union-find with level offsets: level(v) = level(root) + offset(v).
class OffsetUnionFind {
 public:
  explicit OffsetUnionFind(std::size_t n) : parent_(n), offset_(n, 0), lo_(n, 0), hi_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::pair<std::size_t, Level> find(std::size_t v) {
    Level off = 0;
    std::size_t r = v;
    while (parent_[r] != r) {
      off += offset_[r];
      r = parent_[r];
    }
    // path compression
    Level acc = off;
    while (parent_[v] != v) {
      const auto next = parent_[v];
      const Level step = offset_[v];
      parent_[v] = r;
      offset_[v] = acc;
      acc -= step;
      v = next;
    }
    return {r, off};
  }

  Level span(std::size_t root) const { return hi_[root] - lo_[root]; }

  /// Joins so that level(u) - level(v) = diff; both must be in distinct sets.
  void unite(std::size_t u, std::size_t v, Level diff) {
    auto [ru, ou] = find(u);
    auto [rv, ov] = find(v);
    // level(rv) = level(ru) + ou - ov - diff
    const Level shift = ou - ov - diff;
    parent_[rv] = ru;
    offset_[rv] = shift;
    lo_[ru] = std::min(lo_[ru], lo_[rv] + shift);
    hi_[ru] = std::max(hi_[ru], hi_[rv] + shift);
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<Level> offset_;
  std::vector<Level> lo_, hi_;  // level range of the set relative to its root
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline TileGraph greedy_once(Digit k, unsigned m, const std::vector<Level>& hint, std::uint64_t seed,
                             bool shuffle) {
  const auto n = detail::checked_pow(k, m);
  std::vector<Edge> candidates;
  std::vector<int> priority;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep = shuffle ? 0.5 + 0.5 * unit(rng) : 1.0;
  for (std::uint64_t u = 0; u < n; ++u)
    for (std::uint64_t c = 0; c < k; ++c) {
      const auto v = (k * u + c) % n;
      if (u == v) continue;
      candidates.push_back({u, v});
      // edges the score stratification already keeps share its local pattern
      const bool pattern = hint[u] == hint[v] + 1;
      priority.push_back(pattern && unit(rng) < keep ? 0 : 1);
    }
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (shuffle) std::shuffle(idx.begin(), idx.end(), rng);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return priority[a] < priority[b]; });

  OffsetUnionFind uf(n);
  Digraph accepted{n, {}};
  for (auto i : idx) {
    const auto& e = candidates[i];
    auto [ru, ou] = uf.find(e.from);
    auto [rv, ov] = uf.find(e.to);
    if (ru != rv) {
      uf.unite(e.from, e.to, 1);
      accepted.edges.push_back(e);
      continue;
    }
    if (ou - ov != 1) continue;  // level conflict
    accepted.edges.push_back(e);
    if (uf.span(ru) <= static_cast<Level>(m)) continue;
    std::vector<Level> lv(n);
    for (std::uint64_t v = 0; v < n; ++v) lv[v] = uf.find(v).second;
    const auto h = max_loop_height(accepted, lv);
    if (h && *h > static_cast<Level>(m)) accepted.edges.pop_back();
  }
  auto strat = std::get<Stratification>(stratify(accepted));
  TileGraph t{k, m, std::move(accepted.edges), std::move(strat.levels)};
  std::sort(t.edges.begin(), t.edges.end());
  return t;
}

}  // namespace detail

struct GreedyOptions {
  std::uint64_t seed = 1;
  unsigned restarts = 16;
  unsigned threads = 1;
};

/// Best of `restarts` randomized union-find passes. Restart r is seeded from
/// (seed, r) alone and ties are broken by level vector, so the result does
/// not depend on the thread count.
inline TileGraph greedy_tile(Digit k, unsigned m, GreedyOptions opt = {}) {
  if (k < 2 || m < 1) throw std::invalid_argument("greedy tiles need K >= 2 and M >= 1");
  const auto hint = score_levels(k, m).levels;
  const unsigned restarts = std::max(1u, opt.restarts);
  std::vector<std::optional<TileGraph>> results(restarts);
  auto work = [&](unsigned first, unsigned stride) {
    for (unsigned r = first; r < restarts; r += stride)
      results[r] = detail::greedy_once(k, m, hint, detail::splitmix64(opt.seed * 0x100000001B3ULL + r), r != 0);
  };
  const unsigned threads = std::clamp(opt.threads, 1u, restarts);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t, threads);
  work(0, threads);
  for (auto& th : pool) th.join();

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    const auto& a = *results[r];
    const auto& b = *results[best];
    if (a.edges.size() > b.edges.size() || (a.edges.size() == b.edges.size() && *a.levels < *b.levels)) best = r;
  }
  return std::move(*results[best]);
}

}  // namespace dbtile

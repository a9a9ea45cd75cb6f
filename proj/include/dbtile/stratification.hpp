#pragma once

// Stratifications, loop witnesses and loop heights of tiles.
//
// A stratification assigns each vertex a level with level(u) = level(v) + 1
// along every edge (u, v). It exists iff every loop of the underlying
// undirected multigraph has as many forward as backward edges.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dbtile/graphs.hpp"

namespace dbtile {

using Level = std::int64_t;

struct Edge {
  std::uint64_t from = 0;
  std::uint64_t to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Digraph {
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;
};

enum class Direction { Forward, Backward };

/// Closed walk [u_1, ..., u_n, u_1]; directions[i] tells whether the edge
/// between vertices[i] and vertices[i+1] is traversed along (Forward) or
/// against (Backward) its orientation.
struct LoopTrace {
  std::vector<std::uint64_t> vertices;
  std::vector<Direction> directions;

  std::size_t length() const { return directions.size(); }
};

struct LoopBalance {
  std::size_t forward = 0;
  std::size_t backward = 0;

  bool balanced() const { return forward == backward; }
  friend bool operator==(const LoopBalance&, const LoopBalance&) = default;
};

inline LoopBalance loop_balance(const LoopTrace& t) {
  if (t.directions.empty() || t.vertices.size() != t.directions.size() + 1 ||
      t.vertices.front() != t.vertices.back())
    throw std::invalid_argument("loop trace is not a closed walk");
  LoopBalance b;
  for (auto d : t.directions) (d == Direction::Forward ? b.forward : b.backward)++;
  return b;
}

/// Also checks that every step follows an edge of `g` in the stated direction.
inline LoopBalance loop_balance(const LoopTrace& t, const Digraph& g) {
  auto b = loop_balance(t);
  for (std::size_t i = 0; i < t.directions.size(); ++i) {
    Edge want = t.directions[i] == Direction::Forward ? Edge{t.vertices[i], t.vertices[i + 1]}
                                                      : Edge{t.vertices[i + 1], t.vertices[i]};
    if (std::find(g.edges.begin(), g.edges.end(), want) == g.edges.end())
      throw std::invalid_argument("loop trace step does not follow an edge");
  }
  return b;
}

struct Stratification {
  std::vector<Level> levels;
};

using StratifyResult = std::variant<Stratification, LoopTrace>;

namespace detail {

// Incidence lists: for each vertex the indices of incident edges (a self-loop
// appears once).
inline std::vector<std::vector<std::size_t>> incidence(const Digraph& g) {
  std::vector<std::vector<std::size_t>> inc(g.vertex_count);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    if (ed.from >= g.vertex_count || ed.to >= g.vertex_count)
      throw std::out_of_range("edge endpoint out of range");
    inc[ed.from].push_back(e);
    if (ed.to != ed.from) inc[ed.to].push_back(e);
  }
  return inc;
}

inline std::uint64_t other_end(const Edge& e, std::uint64_t x) { return e.from == x ? e.to : e.from; }

inline Direction direction_from(const Edge& e, std::uint64_t x) {
  return e.from == x ? Direction::Forward : Direction::Backward;
}

constexpr std::size_t kNoEdge = std::numeric_limits<std::size_t>::max();

// Joins the tree paths root..x and root..y with the closing edge (x, y).
inline LoopTrace splice_loop(const Digraph& g, const std::vector<std::size_t>& parent_edge,
                             std::uint64_t x, std::uint64_t y, std::size_t closing) {
  auto ancestors = [&](std::uint64_t v) {
    std::vector<std::uint64_t> path{v};
    while (parent_edge[v] != kNoEdge) {
      v = other_end(g.edges[parent_edge[v]], v);
      path.push_back(v);
    }
    return path;
  };
  auto ax = ancestors(x);
  auto ay = ancestors(y);
  // strip the shared root-side suffix, keeping the lowest common ancestor
  while (ax.size() > 1 && ay.size() > 1 && ax[ax.size() - 2] == ay[ay.size() - 2]) {
    ax.pop_back();
    ay.pop_back();
  }
  LoopTrace t;
  // lca -> x along tree edges (downwards)
  for (std::size_t i = ax.size(); i-- > 1;) {
    t.vertices.push_back(ax[i]);
    t.directions.push_back(direction_from(g.edges[parent_edge[ax[i - 1]]], ax[i]));
  }
  t.vertices.push_back(x);
  t.directions.push_back(direction_from(g.edges[closing], x));
  // y -> lca along tree edges (upwards)
  for (std::size_t i = 0; i + 1 < ay.size(); ++i) {
    t.vertices.push_back(ay[i]);
    t.directions.push_back(direction_from(g.edges[parent_edge[ay[i]]], ay[i]));
  }
  t.vertices.push_back(ay.back());
  return t;
}

}  // namespace detail

/// Breadth-first level propagation from one reference vertex per connected
/// component. Components are seeded in `root_order` (then ascending index);
/// levels are normalized to minimum 0 per component. On a conflict returns
/// an unbalanced loop through the offending edge.
inline StratifyResult stratify(const Digraph& g, std::span<const std::uint64_t> root_order = {}) {
  const auto inc = detail::incidence(g);
  const std::size_t n = g.vertex_count;
  std::vector<Level> level(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> parent_edge(n, detail::kNoEdge);

  std::vector<std::uint64_t> roots(root_order.begin(), root_order.end());
  for (std::uint64_t v = 0; v < n; ++v) roots.push_back(v);

  std::vector<std::uint64_t> component;
  for (auto root : roots) {
    if (root >= n) throw std::out_of_range("root vertex out of range");
    if (seen[root]) continue;
    component.clear();
    std::queue<std::uint64_t> q;
    seen[root] = true;
    q.push(root);
    while (!q.empty()) {
      const auto x = q.front();
      q.pop();
      component.push_back(x);
      for (auto e : inc[x]) {
        const auto& ed = g.edges[e];
        const auto y = detail::other_end(ed, x);
        const Level want = ed.from == x ? level[x] - 1 : level[x] + 1;
        if (ed.from == ed.to) return detail::splice_loop(g, parent_edge, x, x, e);
        if (!seen[y]) {
          seen[y] = true;
          level[y] = want;
          parent_edge[y] = e;
          q.push(y);
        } else if (level[y] != want) {
          return detail::splice_loop(g, parent_edge, x, y, e);
        }
      }
    }
    Level lo = level[component.front()];
    for (auto v : component) lo = std::min(lo, level[v]);
    for (auto v : component) level[v] -= lo;
  }
  return Stratification{std::move(level)};
}

/// Level span of every biconnected block with at least two edges. Any two
/// vertices of such a block lie on a common simple cycle, so the maximum
/// span is the maximum loop height. nullopt means the graph has no loops.
inline std::optional<Level> max_loop_height(const Digraph& g, std::span<const Level> levels) {
  if (levels.size() != g.vertex_count) throw std::invalid_argument("level table size mismatch");
  const auto inc = detail::incidence(g);
  const std::size_t n = g.vertex_count;
  std::vector<std::size_t> disc(n, 0), low(n, 0);
  std::size_t timer = 0;
  std::vector<std::size_t> edge_stack;
  std::vector<bool> edge_used(g.edges.size(), false);
  std::optional<Level> best;

  auto close_block = [&](std::size_t until_edge) {
    Level lo = std::numeric_limits<Level>::max(), hi = std::numeric_limits<Level>::min();
    std::size_t count = 0;
    while (true) {
      const auto e = edge_stack.back();
      edge_stack.pop_back();
      ++count;
      for (auto v : {g.edges[e].from, g.edges[e].to}) {
        lo = std::min(lo, levels[v]);
        hi = std::max(hi, levels[v]);
      }
      if (e == until_edge) break;
    }
    if (count >= 2) best = std::max(best.value_or(hi - lo), hi - lo);
  };

  struct Frame {
    std::uint64_t v;
    std::size_t parent_edge;
    std::size_t next;
  };
  for (std::uint64_t root = 0; root < n; ++root) {
    if (disc[root] != 0) continue;
    std::vector<Frame> stack{{root, detail::kNoEdge, 0}};
    disc[root] = low[root] = ++timer;
    while (!stack.empty()) {
      auto& f = stack.back();
      if (f.next < inc[f.v].size()) {
        const auto e = inc[f.v][f.next++];
        if (e == f.parent_edge || edge_used[e]) continue;
        const auto& ed = g.edges[e];
        if (ed.from == ed.to) continue;  // self-loops never occur in stratified graphs
        edge_used[e] = true;
        const auto w = detail::other_end(ed, f.v);
        if (disc[w] == 0) {
          edge_stack.push_back(e);
          disc[w] = low[w] = ++timer;
          stack.push_back({w, e, 0});
        } else {
          edge_stack.push_back(e);
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        const auto v = f.v;
        const auto pe = f.parent_edge;
        stack.pop_back();
        if (stack.empty()) break;
        const auto u = stack.back().v;
        low[u] = std::min(low[u], low[v]);
        if (low[v] >= disc[u]) close_block(pe);
      }
    }
  }
  return best;
}

/// Subgraph of B_K^M on all K^M words.
struct TileGraph {
  Digit degree = 2;
  unsigned exponent = 1;
  std::vector<Edge> edges;                   // ascending
  std::optional<std::vector<Level>> levels;  // indexed by word index

  std::uint64_t size() const { return detail::checked_pow(degree, exponent); }
  std::uint64_t host_edge_count() const { return size() * degree; }
  Digraph digraph() const { return Digraph{size(), edges}; }

  friend bool operator==(const TileGraph&, const TileGraph&) = default;
};

/// All B_K^M edges (u, v) with level(u) = level(v) + 1, ascending.
inline TileGraph saturated_tile(Digit degree, unsigned exponent, std::vector<Level> levels) {
  TileGraph t{degree, exponent, {}, std::nullopt};
  const auto size = t.size();
  if (levels.size() != size) throw std::invalid_argument("level table must cover all K^M words");
  for (std::uint64_t u = 0; u < size; ++u)
    for (std::uint64_t m = 0; m < degree; ++m) {
      const auto v = (degree * u + m) % size;
      if (levels[u] == levels[v] + 1) t.edges.push_back({u, v});
    }
  t.levels = std::move(levels);
  return t;
}

struct TileReport {
  bool stratifiable = false;
  std::optional<Level> height;  // nullopt: no loops (or unstratifiable)
  bool height_within_bound = false;
  std::uint64_t internal_edges = 0;
  std::uint64_t broken_edges = 0;
  std::optional<LoopTrace> witness;

  /// Stratifiable with no loop higher than M: gives scalable tilings.
  bool certified() const { return stratifiable && height_within_bound; }
};

inline void check_tile_structure(const TileGraph& t) {
  if (t.degree < 2 || t.exponent < 1) throw std::invalid_argument("tile needs K >= 2 and M >= 1");
  const auto size = t.size();
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const auto& e = t.edges[i];
    if (!is_debruijn_edge(e.from, e.to, t.degree, size))
      throw std::invalid_argument("tile edge (" + word_string(e.from, t.degree, t.exponent) + ", " +
                                  word_string(e.to, t.degree, t.exponent) + ") is not an edge of B_K^M");
    if (i > 0 && !(t.edges[i - 1] < e)) throw std::invalid_argument("tile edges must be sorted and distinct");
  }
  if (t.levels && t.levels->size() != size) throw std::invalid_argument("tile level table has wrong size");
}

inline TileReport validate_tile(const TileGraph& t) {
  check_tile_structure(t);
  TileReport r;
  r.internal_edges = t.edges.size();
  r.broken_edges = t.host_edge_count() - t.edges.size();
  const auto g = t.digraph();
  auto s = stratify(g);
  if (auto* w = std::get_if<LoopTrace>(&s)) {
    r.witness = std::move(*w);
    return r;
  }
  r.stratifiable = true;
  r.height = max_loop_height(g, std::get<Stratification>(s).levels);
  r.height_within_bound = !r.height || *r.height <= static_cast<Level>(t.exponent);
  return r;
}

/// Normalized stratification of a tile, if it has one.
inline std::optional<std::vector<Level>> tile_levels(const TileGraph& t) {
  auto s = stratify(t.digraph());
  if (auto* st = std::get_if<Stratification>(&s)) return std::move(st->levels);
  return std::nullopt;
}

// Tile file:
//   K M
//   <word> <level>          (K^M lines)
//   [EDGES
//    <word> <word> ...]
// Without an EDGES section the tile is every B_K^M edge consistent with
// the levels.

inline void write_tile(std::ostream& os, const TileGraph& t) {
  check_tile_structure(t);
  std::vector<Level> levels;
  if (t.levels) {
    levels = *t.levels;
  } else if (auto l = tile_levels(t)) {
    levels = std::move(*l);
  } else {
    throw std::invalid_argument("cannot write levels of an unstratifiable tile");
  }
  os << t.degree << ' ' << t.exponent << '\n';
  for (std::uint64_t x = 0; x < t.size(); ++x)
    os << word_string(x, t.degree, t.exponent) << ' ' << levels[x] << '\n';
  os << "EDGES\n";
  for (const auto& e : t.edges)
    os << word_string(e.from, t.degree, t.exponent) << ' ' << word_string(e.to, t.degree, t.exponent) << '\n';
}

inline std::string tile_to_string(const TileGraph& t) {
  std::ostringstream os;
  write_tile(os, t);
  return os.str();
}

inline TileGraph read_tile(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw std::invalid_argument("empty tile file");
  std::istringstream head(lines[0]);
  unsigned k = 0, m = 0;
  if (!(head >> k >> m) || k < 2 || m < 1) throw std::invalid_argument("tile file header must be 'K M'");
  const auto size = detail::checked_pow(k, m);
  if (lines.size() < size + 1) throw std::invalid_argument("tile file lists fewer than K^M words");
  std::vector<Level> levels(size, 0);
  std::vector<bool> given(size, false);
  auto parse_word = [&](const std::string& s) {
    auto w = Word::parse(s, static_cast<Digit>(k));
    if (w.size() != m) throw std::invalid_argument("tile word '" + s + "' must have M digits");
    return w.index();
  };
  for (std::uint64_t i = 1; i <= size; ++i) {
    std::istringstream ls(lines[i]);
    std::string word;
    Level level;
    if (!(ls >> word >> level)) throw std::invalid_argument("bad level line: " + lines[i]);
    const auto x = parse_word(word);
    if (given[x]) throw std::invalid_argument("duplicate word " + word);
    given[x] = true;
    levels[x] = level;
  }
  std::size_t next = size + 1;
  if (next == lines.size()) return saturated_tile(static_cast<Digit>(k), m, std::move(levels));

  std::istringstream marker(lines[next]);
  std::string tag;
  marker >> tag;
  if (tag != "EDGES") throw std::invalid_argument("expected EDGES section, got: " + lines[next]);
  TileGraph t{static_cast<Digit>(k), m, {}, std::move(levels)};
  for (++next; next < lines.size(); ++next) {
    std::istringstream ls(lines[next]);
    std::string a, b;
    if (!(ls >> a >> b)) throw std::invalid_argument("bad edge line: " + lines[next]);
    t.edges.push_back({parse_word(a), parse_word(b)});
  }
  std::sort(t.edges.begin(), t.edges.end());
  check_tile_structure(t);
  return t;
}

inline TileGraph tile_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_tile(in);
}

}  // namespace dbtile

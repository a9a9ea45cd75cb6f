#pragma once

// Assembly of a full host tiling from a certified tile, and an independent
// verifier for the tiling properties.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbtile/graphs.hpp"
#include "dbtile/stratification.hpp"

namespace dbtile {

/// Lifting a tile loop produced two different hosts for one (index, word).
class ObstructionError : public std::runtime_error {
 public:
  ObstructionError(const std::string& what, LoopTrace loop) : std::runtime_error(what), loop_(std::move(loop)) {}
  const LoopTrace& loop() const { return loop_; }

 private:
  LoopTrace loop_;
};

struct Tiling {
  HostGraph host;
  TileGraph tile;
  std::string latin_name;
  std::vector<std::uint64_t> tile_of;   // host vertex -> tile index i
  std::vector<std::uint64_t> local_of;  // host vertex -> tile word x
  std::vector<Vertex> host_of;          // i * K^M + x -> host vertex

  std::uint64_t tile_count() const { return host.vertex_count() / tile.size(); }
  Vertex at(std::uint64_t i, std::uint64_t x) const { return host_of[i * tile.size() + x]; }
};

struct BuildOptions {
  bool force = false;  // attempt construction even when a loop is higher than M
};

namespace detail {

inline void check_tiling_parameters(const HostGraph& host, const TileGraph& tile) {
  if (tile.degree != host.degree()) throw std::invalid_argument("tile degree differs from host degree");
  if (tile.exponent < 1) throw std::invalid_argument("tile exponent M must be >= 1");
  if (tile.exponent > host.exponent())
    throw std::invalid_argument("host vertex count " + std::to_string(host.vertex_count()) +
                                " is not divisible by K^M = " + std::to_string(tile.size()));
}

}  // namespace detail

/// Constructive tiling: per tile component, the lexicographically least word
/// x0 takes its fiber (ascending host index) as the index set; the rest of
/// the component is lifted breadth-first through the unique child (forward
/// edge) or parent (backward edge) with the required projection.
inline Tiling build_tiling(const HostGraph& host, const TileGraph& tile, const LatinSquare& latin,
                           BuildOptions opt = {}) {
  detail::check_tiling_parameters(host, tile);
  const auto report = validate_tile(tile);
  if (!report.stratifiable) throw std::invalid_argument("tile is not stratifiable");
  if (!report.height_within_bound && !opt.force)
    throw std::invalid_argument("tile has a loop of height " + std::to_string(*report.height) +
                                " > M; pass force to attempt construction anyway");

  const Projection proj(host, tile.exponent, latin);
  const auto image = proj.image_table();
  const std::uint64_t size = tile.size();
  const std::uint64_t count = host.vertex_count() / size;

  std::vector<std::vector<Vertex>> fiber(size);
  for (Vertex v = 0; v < image.size(); ++v) fiber[image[v]].push_back(v);
  for (std::uint64_t x = 0; x < size; ++x)
    if (fiber[x].size() != count) throw std::logic_error("projection fibers are not uniform");

  Tiling t{host, tile, latin.name(), std::vector<std::uint64_t>(host.vertex_count()),
           std::vector<std::uint64_t>(host.vertex_count()), std::vector<Vertex>(host.vertex_count())};
  std::vector<bool> done(size, false);
  const auto g = tile.digraph();
  const auto inc = detail::incidence(g);
  std::vector<std::size_t> parent_edge(size, detail::kNoEdge);

  auto lift = [&](Vertex u, std::uint64_t target, bool forward) {
    Vertex found = 0;
    int hits = 0;
    const auto nbrs = forward ? host.children(u) : host.parents(u);
    for (auto w : nbrs)
      if (image[w] == target) {
        found = w;
        ++hits;
      }
    if (hits != 1) throw std::logic_error("projection lacks the distribution properties");
    return found;
  };

  for (std::uint64_t seed = 0; seed < size; ++seed) {
    if (done[seed]) continue;
    done[seed] = true;
    for (std::uint64_t i = 0; i < count; ++i) t.host_of[i * size + seed] = fiber[seed][i];
    std::queue<std::uint64_t> q;
    q.push(seed);
    while (!q.empty()) {
      const auto x = q.front();
      q.pop();
      for (auto e : inc[x]) {
        const auto& ed = g.edges[e];
        const bool forward = ed.from == x;
        const auto y = forward ? ed.to : ed.from;
        if (!done[y]) {
          for (std::uint64_t i = 0; i < count; ++i) t.host_of[i * size + y] = lift(t.at(i, x), y, forward);
          done[y] = true;
          parent_edge[y] = e;
          q.push(y);
          continue;
        }
        for (std::uint64_t i = 0; i < count; ++i) {
          if (lift(t.at(i, x), y, forward) == t.at(i, y)) continue;
          auto loop = detail::splice_loop(g, parent_edge, x, y, e);
          std::ostringstream msg;
          msg << "tile loop cannot be lifted consistently:";
          for (auto v : loop.vertices) msg << ' ' << word_string(v, tile.degree, tile.exponent);
          throw ObstructionError(msg.str(), std::move(loop));
        }
      }
    }
  }
  for (std::uint64_t i = 0; i < count; ++i)
    for (std::uint64_t x = 0; x < size; ++x) {
      const auto v = t.at(i, x);
      t.tile_of[v] = i;
      t.local_of[v] = x;
    }
  return t;
}

/// Host edges realized on a board are "internal"; every other host edge,
/// including one joining two words of the same board that the tile leaves
/// out, needs a cable and counts as inter-tile.
struct TilingReport {
  bool bijective = false;
  bool embedding = false;
  bool parallel_routing = false;
  std::uint64_t internal_edges = 0;
  std::uint64_t inter_tile_edges = 0;

  bool ok() const { return bijective && embedding && parallel_routing; }
};

inline TilingReport verify_tiling(const Tiling& t) {
  TilingReport r;
  const auto& host = t.host;
  const std::uint64_t n = host.vertex_count();
  const std::uint64_t size = t.tile.size();
  if (size == 0 || n % size != 0 || t.host_of.size() != n || t.tile_of.size() != n || t.local_of.size() != n)
    return r;
  const std::uint64_t count = n / size;

  std::vector<int> hits(n, 0);
  bool bij = true;
  for (std::uint64_t slot = 0; slot < n; ++slot) {
    const auto v = t.host_of[slot];
    if (v >= n || hits[v]++ > 0) {
      bij = false;
      continue;
    }
    if (t.tile_of[v] != slot / size || t.local_of[v] != slot % size) bij = false;
  }
  r.bijective = bij;
  if (!bij) return r;

  std::vector<std::vector<std::uint64_t>> tile_children(size);
  for (const auto& e : t.tile.edges) tile_children[e.from].push_back(e.to);
  for (auto& c : tile_children) std::sort(c.begin(), c.end());

  bool embed = true;
  for (std::uint64_t i = 0; i < count; ++i)
    for (const auto& e : t.tile.edges) {
      const auto ch = host.children(t.at(i, e.from));
      if (std::find(ch.begin(), ch.end(), t.at(i, e.to)) == ch.end()) embed = false;
    }
  r.embedding = embed;

  bool parallel = true;
  for (std::uint64_t x = 0; x < size && parallel; ++x) {
    std::vector<std::uint64_t> reference;
    for (std::uint64_t i = 0; i < count; ++i) {
      std::vector<std::uint64_t> pattern;
      for (auto c : host.children(t.at(i, x))) pattern.push_back(t.local_of[c]);
      std::sort(pattern.begin(), pattern.end());
      if (i == 0)
        reference = std::move(pattern);
      else if (pattern != reference) {
        parallel = false;
        break;
      }
    }
  }
  r.parallel_routing = parallel;

  for (Vertex u = 0; u < n; ++u)
    for (auto c : host.children(u)) {
      const bool on_board = t.tile_of[u] == t.tile_of[c] &&
                            std::binary_search(tile_children[t.local_of[u]].begin(),
                                               tile_children[t.local_of[u]].end(), t.local_of[c]);
      (on_board ? r.internal_edges : r.inter_tile_edges)++;
    }
  return r;
}

/// Board definition plus one cable line per inter-tile host edge, ordered by
/// (tile, word, appended digit).
inline std::string export_netlist(const Tiling& t) {
  const auto& tile = t.tile;
  const auto word = [&](std::uint64_t x) { return word_string(x, tile.degree, tile.exponent); };
  std::vector<std::vector<std::uint64_t>> tile_children(tile.size());
  for (const auto& e : tile.edges) tile_children[e.from].push_back(e.to);

  std::ostringstream os;
  os << "board K=" << tile.degree << " M=" << tile.exponent << " nodes=" << tile.size()
     << " edges=" << tile.edges.size() << '\n';
  for (const auto& e : tile.edges) os << "edge " << word(e.from) << " -> " << word(e.to) << '\n';

  std::vector<std::string> cables;
  for (std::uint64_t i = 0; i < t.tile_count(); ++i)
    for (std::uint64_t x = 0; x < tile.size(); ++x) {
      const auto u = t.at(i, x);
      for (auto c : t.host.children(u)) {
        const auto j = t.tile_of[c];
        const auto y = t.local_of[c];
        const auto& tc = tile_children[x];
        if (j == i && std::find(tc.begin(), tc.end(), y) != tc.end()) continue;
        cables.push_back("tile_" + std::to_string(i) + ' ' + word(x) + " -> tile_" + std::to_string(j) + ' ' +
                         word(y));
      }
    }
  os << "cables " << cables.size() << '\n';
  for (const auto& c : cables) os << c << '\n';
  return os.str();
}

/// Graphviz view: one color per tile copy, board edges bold.
inline std::string tiling_to_dot(const Tiling& t) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const auto& tile = t.tile;
  std::vector<std::vector<std::uint64_t>> tile_children(tile.size());
  for (const auto& e : tile.edges) tile_children[e.from].push_back(e.to);
  std::ostringstream os;
  os << "digraph tiling {\n";
  for (Vertex v = 0; v < t.host.vertex_count(); ++v)
    os << "  n" << v << " [label=\"" << v << " | " << word_string(t.local_of[v], tile.degree, tile.exponent)
       << "\", color=\"" << palette[t.tile_of[v] % 10] << "\"];\n";
  for (Vertex u = 0; u < t.host.vertex_count(); ++u)
    for (auto c : t.host.children(u)) {
      const auto& tc = tile_children[t.local_of[u]];
      const bool board = t.tile_of[u] == t.tile_of[c] && std::find(tc.begin(), tc.end(), t.local_of[c]) != tc.end();
      os << "  n" << u << " -> n" << c;
      if (board) os << " [style=bold, color=\"" << palette[t.tile_of[u] % 10] << "\"]";
      os << ";\n";
    }
  os << "}\n";
  return os.str();
}

// Assignment dump:
//   tiling kind=<kind> K=<K> V=<V> M=<M> latin=<name>
//   <host_index> <tile_index> <local_word>      (V lines, ascending host)

inline void write_assignment(std::ostream& os, const Tiling& t) {
  os << "tiling kind=" << to_string(t.host.kind()) << " K=" << t.host.degree() << " V=" << t.host.vertex_count()
     << " M=" << t.tile.exponent << " latin=" << t.latin_name << '\n';
  for (Vertex v = 0; v < t.host.vertex_count(); ++v)
    os << v << ' ' << t.tile_of[v] << ' ' << word_string(t.local_of[v], t.tile.degree, t.tile.exponent) << '\n';
}

/// Reads a dump back; `tile` supplies the board edges.
inline Tiling read_assignment(std::istream& in, const TileGraph& tile) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty tiling dump");
  std::istringstream head(line);
  std::string tag;
  head >> tag;
  if (tag != "tiling") throw std::invalid_argument("tiling dump must start with 'tiling'");
  std::string kind, latin = "f1";
  std::uint64_t k = 0, v = 0, m = 0;
  std::string field;
  while (head >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad header field " + field);
    const auto key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "kind") kind = val;
    else if (key == "K") k = std::stoull(val);
    else if (key == "V") v = std::stoull(val);
    else if (key == "M") m = std::stoull(val);
    else if (key == "latin") latin = val;
    else throw std::invalid_argument("unknown header field " + key);
  }
  auto host = HostGraph::from_vertex_count(parse_host_kind(kind), k, v);
  if (tile.degree != k || tile.exponent != m) throw std::invalid_argument("tile does not match the dump header");
  detail::check_tiling_parameters(host, tile);
  Tiling t{host, tile, latin, std::vector<std::uint64_t>(v), std::vector<std::uint64_t>(v),
           std::vector<Vertex>(v, v)};
  std::vector<bool> seen(v, false);
  std::uint64_t rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::uint64_t h, i;
    std::string w;
    if (!(ls >> h >> i >> w)) throw std::invalid_argument("bad assignment line: " + line);
    const auto x = Word::parse(w, static_cast<Digit>(k));
    if (h >= v || seen[h] || x.size() != m || i >= t.tile_count())
      throw std::invalid_argument("bad assignment line: " + line);
    seen[h] = true;
    t.tile_of[h] = i;
    t.local_of[h] = x.index();
    t.host_of[i * tile.size() + x.index()] = h;
    ++rows;
  }
  if (rows != v) throw std::invalid_argument("tiling dump must list every host vertex once");
  return t;
}

}  // namespace dbtile

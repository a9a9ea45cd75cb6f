#pragma once

// Host digraphs (de Bruijn, Kautz and their generalized forms) as implicit
// arithmetic graphs, vertex codecs, and projections onto B_K^M.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dbtile {

using Vertex = std::uint64_t;
using Digit = std::uint32_t;

enum class HostKind { DeBruijn, Kautz, GeneralizedDeBruijn, GeneralizedKautz };

inline std::string_view to_string(HostKind kind) {
  switch (kind) {
    case HostKind::DeBruijn: return "debruijn";
    case HostKind::Kautz: return "kautz";
    case HostKind::GeneralizedDeBruijn: return "gdebruijn";
    case HostKind::GeneralizedKautz: return "gkautz";
  }
  return "?";
}

inline HostKind parse_host_kind(std::string_view name) {
  if (name == "debruijn" || name == "db") return HostKind::DeBruijn;
  if (name == "kautz") return HostKind::Kautz;
  if (name == "gdebruijn" || name == "generalized-debruijn") return HostKind::GeneralizedDeBruijn;
  if (name == "gkautz" || name == "generalized-kautz") return HostKind::GeneralizedKautz;
  throw std::invalid_argument("unknown host kind: " + std::string(name));
}

inline bool is_kautz_family(HostKind kind) {
  return kind == HostKind::Kautz || kind == HostKind::GeneralizedKautz;
}

namespace detail {

inline std::uint64_t checked_pow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (r > (std::uint64_t{1} << 62) / base) throw std::overflow_error("power overflows 64 bits");
    r *= base;
  }
  return r;
}

inline char digit_char(Digit d) {
  return d < 10 ? static_cast<char>('0' + d) : static_cast<char>('a' + (d - 10));
}

inline Digit char_digit(char c) {
  if (c >= '0' && c <= '9') return static_cast<Digit>(c - '0');
  if (c >= 'a' && c <= 'z') return static_cast<Digit>(c - 'a' + 10);
  if (c >= 'A' && c <= 'Z') return static_cast<Digit>(c - 'A' + 10);
  throw std::invalid_argument(std::string("bad digit character '") + c + "'");
}

// Solutions w in [0, n) of a*w == b (mod n), ascending.
inline std::vector<std::uint64_t> solve_linear_congruence(std::uint64_t a, std::uint64_t b,
                                                          std::uint64_t n) {
  std::vector<std::uint64_t> out;
  a %= n;
  b %= n;
  const std::uint64_t d = std::gcd(a, n);
  if (b % d != 0) return out;
  const std::uint64_t nd = n / d;
  // inverse of a/d modulo n/d by extended Euclid
  __int128 r0 = static_cast<__int128>(nd), r1 = static_cast<__int128>((a / d) % nd);
  __int128 t0 = 0, t1 = 1;
  while (r1 != 0) {
    __int128 q = r0 / r1;
    __int128 tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  __int128 inv = t0 % static_cast<__int128>(nd);
  if (inv < 0) inv += nd;
  const auto x0 = static_cast<std::uint64_t>((static_cast<__int128>(b / d) * inv) % nd);
  for (std::uint64_t t = 0; t < d; ++t) out.push_back(x0 + t * nd);
  return out;
}

}  // namespace detail

/// A word of base-K digits, most significant (d_1) first.
struct Word {
  std::vector<Digit> digits;
  Digit base = 2;

  std::size_t size() const { return digits.size(); }

  static Word from_index(std::uint64_t index, Digit base, std::size_t length) {
    Word w{std::vector<Digit>(length, 0), base};
    for (std::size_t j = length; j-- > 0;) {
      w.digits[j] = static_cast<Digit>(index % base);
      index /= base;
    }
    return w;
  }

  static Word parse(std::string_view text, Digit base) {
    Word w{{}, base};
    for (char c : text) {
      Digit d = detail::char_digit(c);
      if (d >= base) throw std::invalid_argument("digit out of range in word '" + std::string(text) + "'");
      w.digits.push_back(d);
    }
    return w;
  }

  std::uint64_t index() const {
    std::uint64_t r = 0;
    for (Digit d : digits) r = r * base + d;
    return r;
  }

  std::string str() const {
    std::string s;
    s.reserve(digits.size());
    for (Digit d : digits) s.push_back(detail::digit_char(d));
    return s;
  }

  friend bool operator==(const Word&, const Word&) = default;
};

inline std::string word_string(std::uint64_t index, Digit base, std::size_t length) {
  return Word::from_index(index, base, length).str();
}

/// Kautz word s_0 ... s_N over K+1 symbols; adjacent symbols differ.
struct KautzWord {
  std::vector<Digit> symbols;
  Digit degree = 2;

  bool valid() const {
    if (symbols.empty()) return false;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (symbols[i] > degree) return false;
      if (i > 0 && symbols[i] == symbols[i - 1]) return false;
    }
    return true;
  }

  std::string str() const {
    std::string s;
    for (Digit d : symbols) s.push_back(detail::digit_char(d));
    return s;
  }

  friend bool operator==(const KautzWord&, const KautzWord&) = default;
};

/// Mixed-radix form f c_1 ... c_N of a host vertex; for Kautz kinds the
/// digits are already unbarred.
struct MixedRadixCode {
  std::uint64_t f = 0;
  std::vector<Digit> digits;

  friend bool operator==(const MixedRadixCode&, const MixedRadixCode&) = default;
};

/// Implicit host digraph on [0, V). Edges are computed arithmetically:
///   de Bruijn kinds: v -> (K v + m) mod V
///   Kautz kinds:     v -> (-1 - K v - m) mod V,   0 <= m < K.
/// V = F K^N with gcd(F, K) = 1.
class HostGraph {
 public:
  /// For standard kinds `size` is the diameter (N for de Bruijn, N+1 for
  /// Kautz); for generalized kinds it is the vertex count V.
  static HostGraph build(HostKind kind, std::uint64_t degree, std::uint64_t size) {
    if (degree < 2) throw std::invalid_argument("degree K must be >= 2");
    std::uint64_t vertices = 0;
    switch (kind) {
      case HostKind::DeBruijn:
        vertices = detail::checked_pow(degree, static_cast<unsigned>(size));
        break;
      case HostKind::Kautz:
        if (size < 1) throw std::invalid_argument("Kautz diameter must be >= 1");
        vertices = (degree + 1) * detail::checked_pow(degree, static_cast<unsigned>(size - 1));
        break;
      case HostKind::GeneralizedDeBruijn:
      case HostKind::GeneralizedKautz:
        vertices = size;
        break;
    }
    return from_vertex_count(kind, degree, vertices);
  }

  static HostGraph from_vertex_count(HostKind kind, std::uint64_t degree, std::uint64_t vertices) {
    if (degree < 2) throw std::invalid_argument("degree K must be >= 2");
    if (vertices < degree) throw std::invalid_argument("vertex count V must be >= K");
    if (vertices > (std::uint64_t{1} << 40)) throw std::invalid_argument("vertex count too large");
    HostGraph g;
    g.kind_ = kind;
    g.degree_ = degree;
    g.vertices_ = vertices;
    g.cofactor_ = vertices;
    g.exponent_ = 0;
    while (g.cofactor_ % degree == 0) {
      g.cofactor_ /= degree;
      ++g.exponent_;
    }
    if (std::gcd(g.cofactor_, degree) != 1)
      throw std::invalid_argument("cofactor F = V / K^N must be coprime to K");
    if (kind == HostKind::DeBruijn && g.cofactor_ != 1)
      throw std::invalid_argument("de Bruijn vertex count must be a power of K");
    if (kind == HostKind::Kautz && g.cofactor_ != degree + 1)
      throw std::invalid_argument("Kautz vertex count must be (K+1) K^N");
    return g;
  }

  HostKind kind() const { return kind_; }
  std::uint64_t degree() const { return degree_; }
  std::uint64_t vertex_count() const { return vertices_; }
  std::uint64_t cofactor() const { return cofactor_; }
  unsigned exponent() const { return exponent_; }
  std::uint64_t edge_count() const { return vertices_ * degree_; }

  Vertex child(Vertex v, std::uint64_t m) const {
    check(v);
    const std::uint64_t kv = (degree_ * v + m) % vertices_;
    if (!is_kautz_family(kind_)) return kv;
    return (2 * vertices_ - 1 - kv) % vertices_;
  }

  std::vector<Vertex> children(Vertex v) const {
    std::vector<Vertex> out(degree_);
    for (std::uint64_t m = 0; m < degree_; ++m) out[m] = child(v, m);
    return out;
  }

  /// Parents with multiplicity, ascending.
  std::vector<Vertex> parents(Vertex v) const {
    check(v);
    std::vector<Vertex> out;
    out.reserve(degree_);
    for (std::uint64_t m = 0; m < degree_; ++m) {
      // K w == target (mod V)
      std::uint64_t target;
      if (is_kautz_family(kind_))
        target = (3 * vertices_ - 1 - m % vertices_ - v) % vertices_;
      else
        target = (vertices_ + v - m % vertices_) % vertices_;
      for (auto w : detail::solve_linear_congruence(degree_, target, vertices_)) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  MixedRadixCode encode(Vertex v) const {
    check(v);
    MixedRadixCode code;
    code.digits.assign(exponent_, 0);
    for (unsigned j = exponent_; j-- > 0;) {
      code.digits[j] = static_cast<Digit>(v % degree_);
      v /= degree_;
    }
    code.f = v;
    if (is_kautz_family(kind_)) unbar(code.digits);
    return code;
  }

  Vertex decode(const MixedRadixCode& code) const {
    if (code.f >= cofactor_ || code.digits.size() != exponent_)
      throw std::invalid_argument("mixed-radix code does not fit this host");
    std::vector<Digit> raw = code.digits;
    if (is_kautz_family(kind_)) unbar(raw);
    std::uint64_t v = code.f;
    for (Digit d : raw) {
      if (d >= degree_) throw std::invalid_argument("mixed-radix digit out of range");
      v = v * degree_ + d;
    }
    return v;
  }

  /// Word-level Kautz label s_0 ... s_N (standard Kautz hosts only).
  KautzWord kautz_word(Vertex v) const {
    if (kind_ != HostKind::Kautz && !(kind_ == HostKind::GeneralizedKautz && cofactor_ == degree_ + 1))
      throw std::logic_error("Kautz words exist only for F = K+1 Kautz hosts");
    const auto code = encode(v);
    KautzWord w{{static_cast<Digit>(code.f)}, static_cast<Digit>(degree_)};
    for (Digit c : code.digits)
      w.symbols.push_back(static_cast<Digit>((w.symbols.back() + c + 1) % (degree_ + 1)));
    return w;
  }

  Vertex vertex_of(const KautzWord& w) const;

  /// Presentation label: digit string, prefixed by "f." when F > 1.
  std::string label(Vertex v) const {
    const auto code = encode(v);
    std::string digits;
    for (Digit d : code.digits) digits.push_back(detail::digit_char(d));
    if (cofactor_ == 1) return digits;
    return std::to_string(code.f) + "." + digits;
  }

  bool has_kautz_words() const {
    return kind_ == HostKind::Kautz || (kind_ == HostKind::GeneralizedKautz && cofactor_ == degree_ + 1);
  }

 private:
  void check(Vertex v) const {
    if (v >= vertices_) throw std::out_of_range("vertex index out of range");
  }

  // Barred positions are the odd ones (1-based): c_j = K-1-u_j.
  void unbar(std::vector<Digit>& digits) const {
    for (std::size_t j = 0; j < digits.size(); j += 2)
      digits[j] = static_cast<Digit>(degree_ - 1 - digits[j]);
  }

  HostKind kind_ = HostKind::DeBruijn;
  std::uint64_t degree_ = 2;
  std::uint64_t vertices_ = 1;
  std::uint64_t cofactor_ = 1;
  unsigned exponent_ = 0;
};

inline HostGraph build_host(HostKind kind, std::uint64_t degree, std::uint64_t size) {
  return HostGraph::build(kind, degree, size);
}

/// r: K_K^{N+1} -> B_K^N, c_i = s_i - s_{i-1} - 1 (mod K+1).
inline Word kautz_to_debruijn(const KautzWord& w) {
  if (!w.valid()) throw std::invalid_argument("invalid Kautz word '" + w.str() + "'");
  Word out{{}, w.degree};
  const Digit q = w.degree + 1;
  for (std::size_t i = 1; i < w.symbols.size(); ++i)
    out.digits.push_back(static_cast<Digit>((w.symbols[i] + 2 * q - w.symbols[i - 1] - 1) % q));
  return out;
}

inline Vertex HostGraph::vertex_of(const KautzWord& w) const {
  if (!has_kautz_words()) throw std::logic_error("Kautz words exist only for F = K+1 Kautz hosts");
  if (w.degree != degree_ || w.symbols.size() != exponent_ + 1)
    throw std::invalid_argument("Kautz word does not fit this host");
  const Word c = kautz_to_debruijn(w);
  return decode(MixedRadixCode{w.symbols.front(), c.digits});
}

/// K x K table f(c, c') whose rows and columns are permutations of [0, K).
class LatinSquare {
 public:
  explicit LatinSquare(std::vector<std::vector<Digit>> table, std::string name = "custom")
      : table_(std::move(table)), name_(std::move(name)) {
    const std::size_t k = table_.size();
    if (k < 2) throw std::invalid_argument("Latin square must be at least 2x2");
    for (std::size_t r = 0; r < k; ++r) {
      if (table_[r].size() != k) throw std::invalid_argument("Latin square must be square");
      std::vector<bool> row(k), col(k);
      for (std::size_t c = 0; c < k; ++c) {
        if (table_[r][c] >= k || table_[c].size() != k || table_[c][r] >= k)
          throw std::invalid_argument("Latin square entry out of range");
        row[table_[r][c]] = true;
        col[table_[c][r]] = true;
      }
      if (std::find(row.begin(), row.end(), false) != row.end() ||
          std::find(col.begin(), col.end(), false) != col.end())
        throw std::invalid_argument("Latin square row or column is not a permutation");
    }
  }

  /// f1(c, c') = c - c' (mod K)
  static LatinSquare difference(Digit k) {
    return tabulate(k, [k](Digit c, Digit cp) { return (c + k - cp) % k; }, "f1");
  }

  /// f2(c, c') = c + c' (mod K)
  static LatinSquare sum(Digit k) {
    return tabulate(k, [k](Digit c, Digit cp) { return (c + cp) % k; }, "f2");
  }

  /// Whitespace-separated K rows of K entries.
  static LatinSquare parse(std::istream& in, std::string name = "file") {
    std::vector<std::vector<Digit>> rows;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::vector<Digit> row;
      Digit d;
      while (ls >> d) row.push_back(d);
      if (!row.empty()) rows.push_back(std::move(row));
    }
    return LatinSquare(std::move(rows), std::move(name));
  }

  Digit operator()(Digit c, Digit cp) const { return table_[c][cp]; }
  Digit order() const { return static_cast<Digit>(table_.size()); }
  const std::string& name() const { return name_; }
  const std::vector<std::vector<Digit>>& table() const { return table_; }

 private:
  template <class F>
  static LatinSquare tabulate(Digit k, F f, std::string name) {
    std::vector<std::vector<Digit>> t(k, std::vector<Digit>(k));
    for (Digit c = 0; c < k; ++c)
      for (Digit cp = 0; cp < k; ++cp) t[c][cp] = f(c, cp);
    return LatinSquare(std::move(t), std::move(name));
  }

  std::vector<std::vector<Digit>> table_;
  std::string name_;
};

/// k-th discrete differential d_i = f(c_{i+k}, c_i); k = 0 is the identity.
inline Word discrete_differential(const Word& w, std::size_t k, const LatinSquare& latin) {
  if (k > w.size()) throw std::invalid_argument("differential shift exceeds word length");
  if (k == 0) return w;
  if (latin.order() != w.base) throw std::invalid_argument("Latin square order differs from word base");
  Word out{std::vector<Digit>(w.size() - k), w.base};
  for (std::size_t i = 0; i + k < w.size(); ++i) out.digits[i] = latin(w.digits[i + k], w.digits[i]);
  return out;
}

/// Homomorphism host -> B_K^M: drop f, then take the (N-M)-th discrete
/// differential of the (unbarred) digits.
class Projection {
 public:
  Projection(HostGraph host, unsigned tile_exponent, LatinSquare latin)
      : host_(std::move(host)), m_(tile_exponent), latin_(std::move(latin)) {
    if (m_ < 1) throw std::invalid_argument("tile exponent M must be >= 1");
    if (m_ > host_.exponent())
      throw std::invalid_argument("tile size K^M must divide the host vertex count");
    if (latin_.order() != host_.degree()) throw std::invalid_argument("Latin square order must equal K");
  }

  const HostGraph& host() const { return host_; }
  unsigned tile_exponent() const { return m_; }
  const LatinSquare& latin() const { return latin_; }
  std::uint64_t tile_size() const { return detail::checked_pow(host_.degree(), m_); }

  Word project(Vertex v) const {
    const auto code = host_.encode(v);
    Word w{code.digits, static_cast<Digit>(host_.degree())};
    return discrete_differential(w, host_.exponent() - m_, latin_);
  }

  std::uint64_t project_index(Vertex v) const { return project(v).index(); }

  std::vector<std::uint64_t> image_table() const {
    std::vector<std::uint64_t> out(host_.vertex_count());
    for (Vertex v = 0; v < out.size(); ++v) out[v] = project_index(v);
    return out;
  }

 private:
  HostGraph host_;
  unsigned m_;
  LatinSquare latin_;
};

/// Children of tile word x in B_K^M, by appended digit.
inline std::vector<std::uint64_t> debruijn_children(std::uint64_t x, std::uint64_t k, std::uint64_t size) {
  std::vector<std::uint64_t> out(k);
  for (std::uint64_t m = 0; m < k; ++m) out[m] = (k * x + m) % size;
  return out;
}

inline std::vector<std::uint64_t> debruijn_parents(std::uint64_t x, std::uint64_t k, std::uint64_t size) {
  std::vector<std::uint64_t> out(k);
  for (std::uint64_t a = 0; a < k; ++a) out[a] = a * (size / k) + x / k;
  return out;
}

inline bool is_debruijn_edge(std::uint64_t u, std::uint64_t v, std::uint64_t k, std::uint64_t size) {
  return u < size && v < size && (k * u) % size == v - v % k;
}

enum class DistributionSide { Parent, Child };

struct DistributionCheck {
  bool pass = true;
  std::vector<Vertex> failures;  // ascending
};

/// Checks Pi(P(u)) = P(Pi(u)) (or the child analogue) for every host vertex;
/// `image[v]` is the B_K^M word index of host vertex v.
inline DistributionCheck check_distribution(const HostGraph& host, std::span<const std::uint64_t> image,
                                            unsigned tile_exponent, DistributionSide side) {
  if (image.size() != host.vertex_count()) throw std::invalid_argument("image table size mismatch");
  const std::uint64_t k = host.degree();
  const std::uint64_t size = detail::checked_pow(k, tile_exponent);
  DistributionCheck result;
  std::vector<std::uint64_t> lhs, rhs;
  for (Vertex u = 0; u < host.vertex_count(); ++u) {
    const auto nbrs = side == DistributionSide::Parent ? host.parents(u) : host.children(u);
    lhs.clear();
    for (auto w : nbrs) lhs.push_back(image[w]);
    rhs = side == DistributionSide::Parent ? debruijn_parents(image[u], k, size)
                                           : debruijn_children(image[u], k, size);
    std::sort(lhs.begin(), lhs.end());
    std::sort(rhs.begin(), rhs.end());
    if (lhs != rhs) result.failures.push_back(u);
  }
  result.pass = result.failures.empty();
  return result;
}

/// Graphviz rendering with "index | word" labels.
inline std::string host_to_dot(const HostGraph& g) {
  std::ostringstream os;
  os << "digraph \"" << to_string(g.kind()) << "_K" << g.degree() << "_V" << g.vertex_count() << "\" {\n";
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    os << "  n" << v << " [label=\"" << v << " | " << g.label(v);
    if (g.has_kautz_words()) os << " | s=" << g.kautz_word(v).str();
    os << "\"];\n";
  }
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    for (auto c : g.children(v)) os << "  n" << v << " -> n" << c << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace dbtile

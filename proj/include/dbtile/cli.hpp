#pragma once

// Command-line front end. Data goes to `out`, diagnostics to `err`.
// Exit status: 0 success, 1 usage or parameter error, 2 validation failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dbtile/asymptotics.hpp"
#include "dbtile/graphs.hpp"
#include "dbtile/stratification.hpp"
#include "dbtile/tilesearch.hpp"
#include "dbtile/tiling.hpp"

namespace dbtile::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;

inline unsigned default_threads() {
  if (const char* env = std::getenv("DBTILE_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (...) {
    }
  }
  return 1;
}

struct HostFlags {
  std::string kind = "debruijn";
  std::uint64_t degree = 2;
  std::optional<std::uint64_t> diameter;
  std::optional<std::uint64_t> vertices;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "debruijn | kautz | gdebruijn | gkautz")
        ->check(CLI::IsMember({"debruijn", "kautz", "gdebruijn", "gkautz"}));
    app->add_option("-K,--degree", degree, "degree K")->required();
    app->add_option("-N,--diameter", diameter, "diameter (standard kinds)");
    app->add_option("-V,--vertices", vertices, "vertex count");
  }

  HostGraph build() const {
    const auto k = parse_host_kind(kind);
    if (diameter && vertices) throw std::invalid_argument("give either -N or -V, not both");
    if (vertices) return HostGraph::from_vertex_count(k, degree, *vertices);
    if (!diameter) throw std::invalid_argument("host size missing: give -N or -V");
    if (k == HostKind::GeneralizedDeBruijn || k == HostKind::GeneralizedKautz)
      throw std::invalid_argument("generalized kinds take a vertex count -V");
    return HostGraph::build(k, degree, *diameter);
  }
};

struct SearchFlags {
  int level_range = -1;
  double budget_seconds = 60;
  std::uint64_t seed = 1;
  unsigned restarts = 16;
  unsigned threads = default_threads();
  std::uint64_t max_size = 32;

  void attach(CLI::App* app) {
    app->add_option("--level-range", level_range, "exact search level span L (default 2M+1)");
    app->add_option("--budget-seconds", budget_seconds, "exact search time budget");
    app->add_option("--seed", seed, "greedy seed");
    app->add_option("--restarts", restarts, "greedy restarts");
    app->add_option("--threads", threads, "worker threads (default $DBTILE_THREADS or 1)");
    app->add_option("--max-size", max_size, "exact search guard on K^M");
  }
};

inline std::string report_line(const TileReport& r) {
  std::ostringstream os;
  os << "internal=" << r.internal_edges << " broken=" << r.broken_edges
     << " stratifiable=" << (r.stratifiable ? "true" : "false") << " height=";
  if (r.height)
    os << *r.height;
  else
    os << (r.stratifiable ? "none" : "n/a");
  os << " certified=" << (r.certified() ? "true" : "false");
  if (r.witness) {
    const auto b = loop_balance(*r.witness);
    os << " witness_forward=" << b.forward << " witness_backward=" << b.backward;
  }
  return os.str();
}

inline std::string report_line(const TilingReport& r) {
  auto tf = [](bool b) { return b ? "true" : "false"; };
  std::ostringstream os;
  os << "bijective=" << tf(r.bijective) << " embedding=" << tf(r.embedding)
     << " parallel_routing=" << tf(r.parallel_routing) << " internal=" << r.internal_edges
     << " inter=" << r.inter_tile_edges;
  return os.str();
}

inline TileGraph read_tile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open tile file " + path);
  return read_tile(in);
}

/// "score:M", "exact:M", "greedy:M" or a tile file path.
inline TileGraph resolve_tile(const std::string& choice, Digit k, const SearchFlags& s, std::ostream& err) {
  const auto colon = choice.find(':');
  if (colon != std::string::npos) {
    const auto method = choice.substr(0, colon);
    const auto m = static_cast<unsigned>(std::stoul(choice.substr(colon + 1)));
    if (method == "score") return score_tile(k, m);
    if (method == "greedy") return greedy_tile(k, m, {s.seed, s.restarts, s.threads});
    if (method == "exact") {
      ExactOptions o;
      o.level_range = s.level_range;
      o.budget_seconds = s.budget_seconds;
      o.max_tile_size = s.max_size;
      o.progress = &err;
      return exact_optimal_tile(k, m, o).tile;
    }
  }
  return read_tile_file(choice);
}

inline LatinSquare resolve_latin(const std::string& choice, Digit k) {
  if (choice == "f1") return LatinSquare::difference(k);
  if (choice == "f2") return LatinSquare::sum(k);
  std::ifstream in(choice);
  if (!in) throw std::invalid_argument("unknown Latin square '" + choice + "' (f1, f2 or a file)");
  auto l = LatinSquare::parse(in, choice);
  if (l.order() != k) throw std::invalid_argument("Latin square order must equal K");
  return l;
}

inline std::vector<unsigned> parse_list(const std::string& text) {
  std::vector<unsigned> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const auto a = std::stoul(item.substr(0, dots)), b = std::stoul(item.substr(dots + 2));
      for (auto v = a; v <= b; ++v) out.push_back(static_cast<unsigned>(v));
    } else if (!item.empty()) {
      out.push_back(static_cast<unsigned>(std::stoul(item)));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
  return out;
}

inline int emit_tile(const TileGraph& t, const std::string& format, std::ostream& out,
                     const std::string& extra = {}) {
  const auto r = validate_tile(t);
  if (format == "report") {
    out << report_line(r) << extra << '\n';
  } else {
    write_tile(out, t);
    out << "# " << report_line(r) << extra << '\n';
  }
  return r.certified() ? kExitOk : kExitInvalid;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"de Bruijn / Kautz graph tiling toolkit", "dbtile"};
  app.require_subcommand(1);
  int status = kExitOk;

  // graph
  HostFlags graph_host;
  auto* graph = app.add_subcommand("graph", "build a host graph and print it as DOT");
  graph_host.attach(graph);

  // tile score|exact|greedy
  auto* tile = app.add_subcommand("tile", "generate a tile");
  tile->require_subcommand(1);
  unsigned tile_k = 2, tile_m = 2;
  std::string tile_format = "tilefile", tile_output;
  SearchFlags tile_search;
  std::vector<CLI::App*> tile_methods;
  for (const char* name : {"score", "exact", "greedy"}) {
    auto* sub = tile->add_subcommand(name, std::string(name) + " tile");
    sub->add_option("-K,--degree", tile_k, "degree K")->required();
    sub->add_option("-M,--exponent", tile_m, "tile exponent M")->required();
    sub->add_option("--format", tile_format, "tilefile | report")->check(CLI::IsMember({"tilefile", "report"}));
    sub->add_option("-o,--output", tile_output, "write to this file instead of stdout");
    tile_search.attach(sub);
    tile_methods.push_back(sub);
  }

  // validate-tile
  std::string validate_path;
  auto* validate = app.add_subcommand("validate-tile", "check stratifiability and loop heights of a tile file");
  validate->add_option("file", validate_path, "tile file")->required();

  // bound
  unsigned bound_k = 2, bound_m = 2;
  auto* bound = app.add_subcommand("bound", "lower bound on broken edges");
  bound->add_option("-K,--degree", bound_k)->required();
  bound->add_option("-M,--exponent", bound_m)->required();

  // tiling build|verify|netlist
  auto* tiling = app.add_subcommand("tiling", "assemble and check tilings");
  tiling->require_subcommand(1);
  HostFlags tiling_host;
  std::string tiling_tile, tiling_latin = "f1", tiling_format = "dump", tiling_input;
  bool tiling_force = false;
  SearchFlags tiling_search;
  auto* tbuild = tiling->add_subcommand("build", "build a tiling and dump the assignment");
  auto* tverify = tiling->add_subcommand("verify", "verify a tiling (built in place or read with --input)");
  auto* tnet = tiling->add_subcommand("netlist", "emit the board and cable netlist");
  for (auto* sub : {tbuild, tverify, tnet}) {
    sub->add_option("--kind", tiling_host.kind)->check(CLI::IsMember({"debruijn", "kautz", "gdebruijn", "gkautz"}));
    sub->add_option("-K,--degree", tiling_host.degree)->required();
    sub->add_option("-N,--diameter", tiling_host.diameter);
    sub->add_option("-V,--vertices", tiling_host.vertices);
    sub->add_option("--tile", tiling_tile, "score:M | exact:M | greedy:M | tile file")->required();
    sub->add_option("--latin", tiling_latin, "f1 | f2 | file");
    sub->add_flag("--force", tiling_force, "attempt construction for tiles with loops higher than M");
    tiling_search.attach(sub);
  }
  tbuild->add_option("--format", tiling_format, "dump | dot | netlist | report")
      ->check(CLI::IsMember({"dump", "dot", "netlist", "report"}));
  tverify->add_option("--input", tiling_input, "assignment dump to verify");

  // table score|optimal
  auto* table = app.add_subcommand("table", "score-tile and optimal-tile tables");
  table->require_subcommand(1);
  std::string table_k = "2,3,4,5", table_m = "2..6";
  auto* tscore = table->add_subcommand("score", "CSV of score-tile internal/broken counts");
  tscore->add_option("--K-list", table_k, "degrees, e.g. 2,3 or 2..5");
  tscore->add_option("--M-list", table_m, "exponents, e.g. 2..6");
  auto* toptimal = table->add_subcommand("optimal", "exact optimum for small K^M");
  std::string optimal_cases = "2:2,2:3,3:2,2:4,4:2";
  SearchFlags table_search;
  toptimal->add_option("--cases", optimal_cases, "comma-separated K:M pairs");
  table_search.attach(toptimal);

  // ideal exact|simulate
  auto* ideal = app.add_subcommand("ideal", "idealized sliding-window model");
  ideal->require_subcommand(1);
  unsigned ideal_m = 8;
  std::uint64_t ideal_steps = 1000000, ideal_seed = 1, ideal_last = 0;
  auto* iexact = ideal->add_subcommand("exact", "exact window probabilities and break frequency");
  iexact->add_option("-M,--window", ideal_m)->required();
  iexact->add_option("--terms", ideal_last, "last window size T of the partial sum (default 100M)");
  auto* isim = ideal->add_subcommand("simulate", "Monte Carlo break frequency");
  isim->add_option("-M,--window", ideal_m)->required();
  isim->add_option("--steps", ideal_steps);
  isim->add_option("--seed", ideal_seed);

  // series
  unsigned series_k = 2, series_lo = 2, series_hi = 20;
  auto* series = app.add_subcommand("series", "broken-fraction series of score tiles (TSV)");
  series->add_option("-K,--degree", series_k)->required();
  series->add_option("--m-min", series_lo);
  series->add_option("--m-max", series_hi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*graph) {
      out << host_to_dot(graph_host.build());
    } else if (*tile) {
      std::ofstream file;
      if (!tile_output.empty()) {
        file.open(tile_output);
        if (!file) throw std::invalid_argument("cannot write " + tile_output);
      }
      std::ostream& dest = tile_output.empty() ? out : file;
      for (auto* sub : tile_methods) {
        if (!*sub) continue;
        const std::string name = sub->get_name();
        const auto k = static_cast<Digit>(tile_k);
        if (name == "score") {
          status = emit_tile(score_tile(k, tile_m), tile_format, dest);
        } else if (name == "greedy") {
          auto g = greedy_tile(k, tile_m, {tile_search.seed, tile_search.restarts, tile_search.threads});
          const auto base = score_tile(k, tile_m).edges.size();
          status = emit_tile(g, tile_format, dest, " score_baseline=" + std::to_string(base));
        } else {
          ExactOptions o;
          o.level_range = tile_search.level_range;
          o.budget_seconds = tile_search.budget_seconds;
          o.max_tile_size = tile_search.max_size;
          o.progress = &err;
          auto r = exact_optimal_tile(k, tile_m, o);
          std::ostringstream extra;
          extra << " status=" << to_string(r.status) << " level_range=" << r.level_range << " nodes=" << r.nodes;
          status = emit_tile(r.tile, tile_format, dest, extra.str());
        }
      }
    } else if (*validate) {
      const auto r = validate_tile(read_tile_file(validate_path));
      out << report_line(r) << '\n';
      status = r.certified() ? kExitOk : kExitInvalid;
    } else if (*bound) {
      const auto r = lower_bound(static_cast<Digit>(bound_k), bound_m);
      out << "best_N=" << r.best_n << " bound=" << r.bound_value() << " ceil=" << r.bound_int
          << " bound_exact=" << r.bound_real << " asymptotic=" << static_cast<double>(r.asymptotic) << '\n';
    } else if (*tiling) {
      const auto host = tiling_host.build();
      const auto k = static_cast<Digit>(host.degree());
      const auto t = resolve_tile(tiling_tile, k, tiling_search, err);
      if (*tverify && !tiling_input.empty()) {
        std::ifstream in(tiling_input);
        if (!in) throw std::invalid_argument("cannot open " + tiling_input);
        const auto r = verify_tiling(read_assignment(in, t));
        out << report_line(r) << '\n';
        status = r.ok() ? kExitOk : kExitInvalid;
      } else {
        const auto latin = resolve_latin(tiling_latin, k);
        const auto built = build_tiling(host, t, latin, {tiling_force});
        if (*tverify || (*tbuild && tiling_format == "report")) {
          const auto r = verify_tiling(built);
          out << report_line(r) << '\n';
          status = r.ok() ? kExitOk : kExitInvalid;
        } else if (*tnet || tiling_format == "netlist") {
          out << export_netlist(built);
        } else if (tiling_format == "dot") {
          out << tiling_to_dot(built);
        } else {
          write_assignment(out, built);
        }
      }
    } else if (*table) {
      if (*tscore) {
        std::vector<Digit> ks;
        for (auto k : parse_list(table_k)) ks.push_back(static_cast<Digit>(k));
        write_score_csv(out, score_table(ks, parse_list(table_m)));
      } else {
        out << "K,M,size,max_internal,broken,status,level_range\n";
        std::stringstream ss(optimal_cases);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw std::invalid_argument("case must be K:M, got " + item);
          const auto k = static_cast<Digit>(std::stoul(item.substr(0, colon)));
          const auto m = static_cast<unsigned>(std::stoul(item.substr(colon + 1)));
          ExactOptions o;
          o.level_range = table_search.level_range;
          o.budget_seconds = table_search.budget_seconds;
          o.max_tile_size = table_search.max_size;
          o.progress = &err;
          const auto r = exact_optimal_tile(k, m, o);
          out << k << ',' << m << ',' << r.tile.size() << ',' << r.tile.edges.size() << ','
              << r.tile.host_edge_count() - r.tile.edges.size() << ',' << to_string(r.status) << ','
              << r.level_range << '\n';
          out.flush();
        }
      }
    } else if (*ideal) {
      if (*iexact) {
        const std::int64_t m = ideal_m;
        const std::int64_t last = ideal_last ? static_cast<std::int64_t>(ideal_last) : 100 * m;
        const auto partial = window_tail(m, last);
        out << "M=" << m << " frequency=" << ideal_break_frequency(m) << " p(M)=" << window_probability(m)
            << " partial_sum_to_" << last << '=' << partial
            << " tail=" << ideal_break_frequency(m) - partial << '\n';
      } else {
        const auto r = simulate_ideal(ideal_m, ideal_steps, ideal_seed);
        out.precision(8);
        out << "M=" << r.window << " steps=" << r.steps << " breaks=" << r.breaks << " observed=" << r.observed()
            << " exact=" << r.exact << " std_error=" << r.std_error << '\n';
      }
    } else if (*series) {
      write_series_tsv(out, static_cast<Digit>(series_k),
                       asymptote_series(static_cast<Digit>(series_k), series_lo, series_hi));
    }
  } catch (const ObstructionError& e) {
    err << "dbtile: obstruction: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "dbtile: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "dbtile: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "dbtile: error: " << e.what() << '\n';
    return kExitUsage;
  }
  return status;
}

}  // namespace dbtile::cli

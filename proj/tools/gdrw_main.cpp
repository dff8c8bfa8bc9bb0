// gdrw: convert, generate, walk, validate and simulate from the command line.
//
// Exit codes: 0 success, 1 bad input or failed validation, 2 internal error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gdrw/graph.hpp"
#include "gdrw/graph_io.hpp"
#include "gdrw/memsim.hpp"
#include "gdrw/rmat.hpp"
#include "gdrw/validation.hpp"
#include "gdrw/walk_io.hpp"
#include "gdrw/walkers.hpp"

namespace {

using nlohmann::json;

class InputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphOptions {
  std::string path;
  bool undirected = false;
};

struct AttributeOptions {
  std::uint64_t max_weight = 64;
  std::uint32_t labels = 4;
};

struct WalkOptions {
  GraphOptions graph;
  std::string app = "metapath";
  std::optional<std::uint32_t> length;
  std::optional<std::size_t> queries;
  std::size_t k = gdrw::kDefaultBlockWidth;
  std::size_t workers = 1;
  std::uint64_t seed = 42;
  double p = 2.0;
  double q = 0.5;
  std::string relations = "0,1,2,3";
  std::string format = "text";
  std::string out;
  std::string summary;
};

std::uint32_t default_length(const std::string& app) { return app == "node2vec" ? 80 : 5; }

std::vector<gdrw::RelationId> parse_relations(const std::string& s) {
  std::vector<gdrw::RelationId> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto t = gdrw::detail::trim(tok);
    out.push_back(gdrw::detail::parse_uint<gdrw::RelationId>(t, 0, "relation", 0xFFFF));
  }
  if (out.empty()) throw std::invalid_argument("--relations is empty");
  return out;
}

gdrw::AppParams make_app(const WalkOptions& o) {
  if (o.app == "metapath") return gdrw::MetaPathParams{parse_relations(o.relations)};
  if (o.app == "node2vec") {
    if (!(o.p > 0) || !(o.q > 0)) throw std::invalid_argument("--p and --q must be positive");
    return gdrw::Node2VecParams{o.p, o.q};
  }
  if (o.app == "static") return gdrw::StaticParams{};
  throw std::invalid_argument("unknown app '" + o.app + "'");
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return out;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    open_out(path) << j.dump(2) << '\n';
  }
}

json graph_summary(const gdrw::CsrGraph& g) {
  return {{"vertices", g.num_vertices()}, {"edges", g.num_edges()}, {"max_degree", g.max_degree()}};
}

int cmd_convert(const std::string& input, const std::string& out, bool undirected, bool random_attrs,
                const AttributeOptions& attrs, std::uint64_t seed) {
  auto g = gdrw::load_edge_list_file(input, !undirected);
  if (random_attrs) g = gdrw::with_random_attributes(g, seed, attrs.max_weight, attrs.labels);
  gdrw::write_binary_file(g, out);
  spdlog::info("wrote {}", out);
  emit_json(graph_summary(g), "");
  return 0;
}

int cmd_rmat(const gdrw::RmatParams& p, const std::string& out, bool edge_list, bool undirected,
             const AttributeOptions& attrs) {
  if (edge_list) {
    auto f = open_out(out);
    for (const auto& e : gdrw::rmat_generate(p)) f << e.src << ' ' << e.dst << '\n';
    if (!f) throw InputError("failed writing '" + out + "'");
    spdlog::info("wrote {} edges to {}", std::uint64_t(p.edge_factor) << p.scale, out);
    return 0;
  }
  auto g = gdrw::with_random_attributes(gdrw::rmat_graph(p, undirected), p.seed, attrs.max_weight, attrs.labels);
  gdrw::write_binary_file(g, out);
  spdlog::info("wrote {}", out);
  emit_json(graph_summary(g), "");
  return 0;
}

int cmd_walk(const WalkOptions& o) {
  const auto app = make_app(o);
  if (o.k < 1 || o.k > gdrw::kMaxBlockWidth) throw std::invalid_argument("--k must be in [1, 64]");
  const std::uint32_t length = o.length.value_or(default_length(o.app));
  if (length < 1) throw std::invalid_argument("--length must be >= 1");
  const auto fmt = gdrw::parse_result_format(o.format);

  const auto g = gdrw::load_graph_file(o.graph.path, !o.graph.undirected);
  const auto queries = gdrw::make_queries(g, app, length, o.seed, o.queries);
  spdlog::info("{} queries, app={}, length={}, k={}, workers={}", queries.size(), o.app, length, o.k, o.workers);

  const auto t0 = std::chrono::steady_clock::now();
  const auto results = gdrw::run_batch(g, queries, o.workers, o.seed, o.k);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::uint64_t steps = 0, dead_ends = 0;
  for (const auto& r : results) {
    steps += r.path.size() - 1;
    if (r.terminated == gdrw::Termination::DeadEnd) ++dead_ends;
  }
  if (!o.out.empty()) {
    auto f = open_out(o.out, fmt == gdrw::ResultFormat::Binary);
    gdrw::write_results(f, results, fmt);
  }
  emit_json({{"queries", results.size()},
             {"steps", steps},
             {"dead_ends", dead_ends},
             {"wall_seconds", wall},
             {"steps_per_second", wall > 0 ? static_cast<double>(steps) / wall : 0.0}},
            o.summary);
  return 0;
}

int cmd_validate(const gdrw::validation::SuiteConfig& cfg) {
  bool all = true;
  for (const auto& s : gdrw::validation::run_all(cfg)) {
    all = all && s.ok();
    std::cout << (s.ok() ? "PASS " : "FAIL ") << s.name << ": " << s.passed << '/' << s.total << " (need "
              << s.required << ", min p=" << s.min_p_value << ")\n";
  }
  std::cout << (all ? "all suites passed" : "validation failed") << '\n';
  return all ? 0 : 1;
}

int cmd_simulate(const GraphOptions& go, const std::string& results_path, const std::string& format,
                 std::optional<std::uint32_t> length, bool second_order, gdrw::SimConfig cfg,
                 const std::string& out) {
  const auto g = gdrw::load_graph_file(go.path, !go.undirected);
  const auto fmt = gdrw::parse_result_format(format);
  std::ifstream in(results_path, std::ios::binary);
  if (!in) throw InputError("cannot open results '" + results_path + "'");
  const auto results = gdrw::read_results(in, fmt, length);
  cfg.trace.second_order = second_order;
  const auto report = gdrw::simulate_trace(g, std::span<const gdrw::WalkResult>(results), cfg);
  emit_json(gdrw::to_json(report), out);
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("gdrw");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("GDRW_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Graph dynamic random walks: CSR tools, batch walker, sampler validation, cache simulation"};
  app.require_subcommand(1);

  // convert
  std::string conv_in, conv_out;
  bool conv_undirected = false, conv_random = false;
  AttributeOptions attrs;
  std::uint64_t attr_seed = 42;
  auto* convert = app.add_subcommand("convert", "Edge list to binary CSR");
  convert->add_option("input", conv_in, "Edge list (src dst [weight] [relation])")->required();
  convert->add_option("--out", conv_out, "Binary CSR output")->required();
  convert->add_flag("--undirected", conv_undirected, "Add the reverse of every edge");
  convert->add_flag("--random-attributes", conv_random, "Replace weights and labels with random ones");
  convert->add_option("--max-weight", attrs.max_weight, "Random weights are uniform in [1, max]")
      ->check(CLI::PositiveNumber);
  convert->add_option("--labels", attrs.labels, "Number of random label classes")->check(CLI::PositiveNumber);
  convert->add_option("--seed", attr_seed, "Attribute seed");

  // rmat
  gdrw::RmatParams rp;
  std::string rmat_out;
  bool rmat_edge_list = false, rmat_undirected = false;
  auto* rmat = app.add_subcommand("rmat", "Generate an R-MAT graph");
  rmat->add_option("--scale", rp.scale, "log2 of the vertex count")->check(CLI::Range(0, 31));
  rmat->add_option("--edge-factor", rp.edge_factor, "Edges per vertex")->check(CLI::NonNegativeNumber);
  rmat->add_option("--a", rp.a);
  rmat->add_option("--b", rp.b);
  rmat->add_option("--c", rp.c);
  rmat->add_option("--d", rp.d);
  rmat->add_option("--seed", rp.seed);
  rmat->add_flag("--scramble", rp.scramble_ids, "Randomly relabel vertex ids");
  rmat->add_flag("--edge-list", rmat_edge_list, "Write a text edge list instead of CSR");
  rmat->add_flag("--undirected", rmat_undirected, "Add the reverse of every edge (CSR output)");
  rmat->add_option("--max-weight", attrs.max_weight)->check(CLI::PositiveNumber);
  rmat->add_option("--labels", attrs.labels)->check(CLI::PositiveNumber);
  rmat->add_option("--out", rmat_out)->required();

  // walk
  WalkOptions wo;
  auto* walk = app.add_subcommand("walk", "Run a batch of walk queries");
  walk->add_option("--graph", wo.graph.path, "Binary CSR or text edge list")->required();
  walk->add_flag("--undirected", wo.graph.undirected, "Treat a text edge list as undirected");
  walk->add_option("--app", wo.app, "metapath, node2vec or static")
      ->check(CLI::IsMember({"metapath", "node2vec", "static"}));
  walk->add_option("--length", wo.length, "Steps per query (default 5 metapath, 80 otherwise)");
  walk->add_option("--queries", wo.queries, "Query count (default: one per non-isolated vertex)");
  walk->add_option("--k", wo.k, "Sampler block width")->check(CLI::Range(1, 64));
  walk->add_option("--workers", wo.workers)->check(CLI::PositiveNumber);
  walk->add_option("--seed", wo.seed);
  walk->add_option("--p", wo.p, "Node2Vec return parameter");
  walk->add_option("--q", wo.q, "Node2Vec in-out parameter");
  walk->add_option("--relations", wo.relations, "MetaPath relation sequence, comma separated");
  walk->add_option("--format", wo.format)->check(CLI::IsMember({"text", "binary", "json"}));
  walk->add_option("--out", wo.out, "Results file");
  walk->add_option("--summary", wo.summary, "Summary JSON file (default stdout)");

  // validate
  gdrw::validation::SuiteConfig vc;
  auto* validate = app.add_subcommand("validate", "Chi-square suites for the samplers");
  validate->add_option("--seed", vc.seed);
  validate->add_option("--vectors", vc.vectors)->check(CLI::PositiveNumber);
  validate->add_option("--trials", vc.trials, "Trials per vector and block width")->check(CLI::PositiveNumber);
  validate->add_option("--oracle-trials", vc.oracle_trials)->check(CLI::PositiveNumber);
  validate->add_option("--node2vec-steps", vc.node2vec_steps)->check(CLI::PositiveNumber);
  validate->add_flag("--biased-rng", vc.half_range_rng, "Negative control: feed the sampler half-range draws");

  // simulate
  GraphOptions sim_graph;
  std::string sim_results, sim_format = "text", sim_out, sim_app = "metapath";
  std::optional<std::uint32_t> sim_length;
  gdrw::SimConfig sc;
  auto* simulate = app.add_subcommand("simulate", "Replay walk results through the memory model");
  simulate->add_option("--graph", sim_graph.path)->required();
  simulate->add_flag("--undirected", sim_graph.undirected);
  simulate->add_option("--results", sim_results)->required();
  simulate->add_option("--format", sim_format)->check(CLI::IsMember({"text", "binary", "json"}));
  simulate->add_option("--length", sim_length, "Target length, to tell dead ends from completed walks");
  simulate->add_option("--app", sim_app, "node2vec adds previous-vertex lookups")
      ->check(CLI::IsMember({"metapath", "node2vec", "static"}));
  simulate->add_option("--cache-lines", sc.cache_lines)->check(CLI::PositiveNumber);
  simulate->add_option("--s1", sc.s1_bytes, "Long burst bytes (0 disables)");
  simulate->add_option("--s2", sc.s2_bytes, "Short burst bytes")->check(CLI::PositiveNumber);
  simulate->add_option("--record-bytes", sc.trace.record_bytes)->check(CLI::PositiveNumber);
  simulate->add_option("--warmup", sc.warmup_passes, "Unmeasured cache warm-up passes");
  simulate->add_option("--out", sim_out, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*convert) return cmd_convert(conv_in, conv_out, conv_undirected, conv_random, attrs, attr_seed);
    if (*rmat) return cmd_rmat(rp, rmat_out, rmat_edge_list, rmat_undirected, attrs);
    if (*walk) return cmd_walk(wo);
    if (*validate) return cmd_validate(vc);
    if (*simulate) {
      return cmd_simulate(sim_graph, sim_results, sim_format, sim_length, sim_app == "node2vec", sc, sim_out);
    }
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::out_of_range& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("malformed JSON: {}", e.what());
    return 1;
  } catch (const std::runtime_error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::critical("internal error: {}", e.what());
    return 2;
  }
  return 2;
}

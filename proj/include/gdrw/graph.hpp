#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gdrw/fixed_weight.hpp"
#include "gdrw/rng.hpp"

namespace gdrw {

using VertexId = std::uint32_t;
using EdgeIndex = std::uint64_t;
using Label = std::uint16_t;
using RelationId = std::uint16_t;

inline constexpr std::uint64_t kMaxVertexId = std::numeric_limits<VertexId>::max();

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  std::uint64_t weight = FixedWeight::kOne;  // raw fixed-point
  std::optional<RelationId> relation;
};

struct NeighborInfo {
  EdgeIndex offset = 0;
  std::uint64_t degree = 0;

  friend bool operator==(const NeighborInfo&, const NeighborInfo&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Immutable compressed-sparse-row graph.
///
/// Invariants (checked by every constructor): row_index starts at 0, is
/// nondecreasing and ends at |E|; every neighbor id is < |V|; each neighbor
/// range is strictly ascending. When no explicit relations are stored, the
/// relation of edge (a, b) is the label of b.
class CsrGraph {
 public:
  CsrGraph() : row_index_{0} {}

  CsrGraph(std::vector<EdgeIndex> row_index, std::vector<VertexId> col_index,
           std::vector<std::uint64_t> edge_weight, std::vector<Label> vertex_label,
           std::vector<RelationId> edge_relation = {})
      : row_index_(std::move(row_index)),
        col_index_(std::move(col_index)),
        edge_weight_(std::move(edge_weight)),
        vertex_label_(std::move(vertex_label)),
        edge_relation_(std::move(edge_relation)) {
    validate();
  }

  std::uint64_t num_vertices() const noexcept { return row_index_.size() - 1; }
  std::uint64_t num_edges() const noexcept { return col_index_.size(); }

  std::span<const EdgeIndex> row_index() const noexcept { return row_index_; }
  std::span<const VertexId> col_index() const noexcept { return col_index_; }
  std::span<const std::uint64_t> edge_weights() const noexcept { return edge_weight_; }
  std::span<const Label> vertex_labels() const noexcept { return vertex_label_; }
  /// Empty when relations are derived from destination labels.
  std::span<const RelationId> explicit_relations() const noexcept { return edge_relation_; }
  bool has_explicit_relations() const noexcept { return !edge_relation_.empty(); }

  NeighborInfo neighbors_info(std::uint64_t v) const {
    check_vertex(v);
    return {row_index_[v], row_index_[v + 1] - row_index_[v]};
  }

  std::uint64_t degree(std::uint64_t v) const { return neighbors_info(v).degree; }

  std::span<const VertexId> neighbors(std::uint64_t v) const {
    const auto info = neighbors_info(v);
    return std::span<const VertexId>(col_index_).subspan(info.offset, info.degree);
  }

  /// Binary search over u's sorted neighbor range.
  bool has_edge(std::uint64_t u, std::uint64_t v) const {
    check_vertex(v);
    const auto nbrs = neighbors(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), static_cast<VertexId>(v));
  }

  std::uint64_t weight(EdgeIndex e) const { return edge_weight_.at(e); }
  Label label(std::uint64_t v) const {
    check_vertex(v);
    return vertex_label_[v];
  }
  RelationId relation(EdgeIndex e) const {
    return edge_relation_.empty() ? vertex_label_[col_index_.at(e)] : edge_relation_.at(e);
  }

  std::uint64_t max_degree() const noexcept {
    std::uint64_t best = 0;
    for (std::size_t v = 0; v + 1 < row_index_.size(); ++v) {
      best = std::max<std::uint64_t>(best, row_index_[v + 1] - row_index_[v]);
    }
    return best;
  }

  /// Same structure with the labels (and optionally relations) replaced.
  CsrGraph with_attributes(std::vector<std::uint64_t> weights, std::vector<Label> labels,
                           std::vector<RelationId> relations = {}) const {
    return CsrGraph(row_index_, col_index_, std::move(weights), std::move(labels), std::move(relations));
  }

  friend bool operator==(const CsrGraph&, const CsrGraph&) = default;

 private:
  void check_vertex(std::uint64_t v) const {
    if (v >= num_vertices()) {
      throw std::out_of_range("vertex " + std::to_string(v) + " out of range (|V| = " +
                              std::to_string(num_vertices()) + ")");
    }
  }

  void validate() const {
    if (row_index_.empty() || row_index_.front() != 0) {
      throw std::invalid_argument("row_index must start at 0");
    }
    if (row_index_.back() != col_index_.size()) {
      throw std::invalid_argument("row_index must end at |E|");
    }
    const std::uint64_t n = num_vertices();
    if (n > kMaxVertexId + 1) throw std::invalid_argument("too many vertices");
    for (std::size_t v = 0; v < n; ++v) {
      if (row_index_[v + 1] < row_index_[v]) throw std::invalid_argument("row_index decreases");
      for (auto e = row_index_[v]; e < row_index_[v + 1]; ++e) {
        if (col_index_[e] >= n) throw std::invalid_argument("col_index entry out of range");
        if (e > row_index_[v] && col_index_[e] <= col_index_[e - 1]) {
          throw std::invalid_argument("neighbor list of vertex " + std::to_string(v) +
                                      " is not strictly ascending");
        }
      }
    }
    if (edge_weight_.size() != col_index_.size()) throw std::invalid_argument("edge_weight size != |E|");
    if (vertex_label_.size() != n) throw std::invalid_argument("vertex_label size != |V|");
    if (!edge_relation_.empty() && edge_relation_.size() != col_index_.size()) {
      throw std::invalid_argument("edge_relation size != |E|");
    }
  }

  std::vector<EdgeIndex> row_index_;
  std::vector<VertexId> col_index_;
  std::vector<std::uint64_t> edge_weight_;
  std::vector<Label> vertex_label_;
  std::vector<RelationId> edge_relation_;
};

/// Builds a CSR graph from directed edges. Duplicate (src, dst) pairs keep
/// the last occurrence. Relations are stored explicitly iff any edge carries
/// one (missing ones become 0). |V| is max id + 1 unless given.
inline CsrGraph build_csr(std::vector<Edge> edges, std::optional<std::uint64_t> num_vertices = std::nullopt,
                          std::vector<Label> labels = {}) {
  std::uint64_t n = num_vertices.value_or(0);
  bool any_relation = false;
  for (const auto& e : edges) {
    const std::uint64_t hi = std::max(e.src, e.dst);
    if (num_vertices && hi >= *num_vertices) throw std::out_of_range("edge endpoint >= |V|");
    if (!num_vertices) n = std::max(n, hi + 1);
    any_relation = any_relation || e.relation.has_value();
  }
  if (!labels.empty() && labels.size() != n) throw std::invalid_argument("labels size != |V|");
  if (labels.empty()) labels.assign(n, 0);

  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  std::vector<EdgeIndex> row(n + 1, 0);
  std::vector<VertexId> col;
  std::vector<std::uint64_t> wt;
  std::vector<RelationId> rel;
  col.reserve(edges.size());
  wt.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i + 1 < edges.size() && edges[i + 1].src == edges[i].src && edges[i + 1].dst == edges[i].dst) {
      continue;  // keep last
    }
    ++row[edges[i].src + 1];
    col.push_back(edges[i].dst);
    wt.push_back(edges[i].weight);
    if (any_relation) rel.push_back(edges[i].relation.value_or(0));
  }
  for (std::uint64_t v = 0; v < n; ++v) row[v + 1] += row[v];
  return CsrGraph(std::move(row), std::move(col), std::move(wt), std::move(labels), std::move(rel));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_uint(std::string_view tok, std::size_t line, const char* what, std::uint64_t max) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range || (ec == std::errc{} && v > max)) {
    throw ParseError(line, std::string(what) + " out of range: " + std::string(tok));
  }
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError(line, std::string("malformed ") + what + ": '" + std::string(tok) + "'");
  }
  return static_cast<T>(v);
}

}  // namespace detail

/// Reads `src dst [weight] [relation]` lines ('#' starts a comment line).
/// Undirected input becomes two directed edges per line.
inline std::vector<Edge> parse_edge_list(std::istream& in, bool directed) {
  std::vector<Edge> edges;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = detail::split_ws(line);
    if (tok.size() < 2 || tok.size() > 4) {
      throw ParseError(line_no, "expected 'src dst [weight] [relation]'");
    }
    Edge e;
    e.src = detail::parse_uint<VertexId>(tok[0], line_no, "vertex id", kMaxVertexId);
    e.dst = detail::parse_uint<VertexId>(tok[1], line_no, "vertex id", kMaxVertexId);
    if (tok.size() >= 3) {
      double w = 0;
      const auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), w);
      if (ec != std::errc{} || p != tok[2].data() + tok[2].size()) {
        throw ParseError(line_no, "malformed weight: '" + std::string(tok[2]) + "'");
      }
      try {
        e.weight = FixedWeight::from_double(w).raw;
      } catch (const std::exception& ex) {
        throw ParseError(line_no, ex.what());
      }
    }
    if (tok.size() == 4) {
      e.relation = detail::parse_uint<RelationId>(tok[3], line_no, "relation",
                                                  std::numeric_limits<RelationId>::max());
    }
    edges.push_back(e);
    if (!directed) edges.push_back({e.dst, e.src, e.weight, e.relation});
  }
  return edges;
}

inline CsrGraph load_edge_list(std::istream& in, bool directed) {
  return build_csr(parse_edge_list(in, directed));
}

inline CsrGraph load_edge_list_string(std::string_view text, bool directed) {
  std::istringstream in{std::string(text)};
  return load_edge_list(in, directed);
}

inline CsrGraph load_edge_list_file(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path + "'");
  return load_edge_list(in, directed);
}

/// Replaces every edge weight with a uniform integer in [1, max_weight] and
/// every label with a uniform class in [0, label_classes). Deterministic in
/// `seed`; relations stay derived from labels unless stored explicitly.
inline CsrGraph with_random_attributes(const CsrGraph& g, std::uint64_t seed, std::uint64_t max_weight,
                                       std::uint32_t label_classes) {
  if (max_weight == 0 || label_classes == 0) {
    throw std::invalid_argument("max_weight and label_classes must be positive");
  }
  RngStream wrng(seed, 0x5745494748ull);  // separate streams for weights and labels
  RngStream lrng(seed, 0x4C4142454Cull);
  std::vector<std::uint64_t> w(g.num_edges());
  for (auto& x : w) x = (1 + wrng.next_below(max_weight)) * FixedWeight::kOne;
  std::vector<Label> l(g.num_vertices());
  for (auto& x : l) x = static_cast<Label>(lrng.next_below(label_classes));
  auto rel = g.explicit_relations();
  return g.with_attributes(std::move(w), std::move(l), {rel.begin(), rel.end()});
}

}  // namespace gdrw

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gdrw/graph.hpp"
#include "gdrw/rng.hpp"

namespace gdrw {

struct RmatParams {
  int scale = 12;
  int edge_factor = 8;
  double a = 0.57;
  double b = 0.19;
  double c = 0.19;
  double d = 0.05;
  std::uint64_t seed = 42;
  bool scramble_ids = false;  // apply a seeded random relabeling of vertex ids
};

/// R-MAT edge generator: each edge descends `scale` levels of the adjacency
/// matrix, picking a quadrant with probabilities (a, b, c, d) at each level.
/// Produces edge_factor * 2^scale directed edges (duplicates included).
inline std::vector<Edge> rmat_generate(const RmatParams& p) {
  const double sum = p.a + p.b + p.c + p.d;
  if (std::abs(sum - 1.0) > 1e-9 || p.a < 0 || p.b < 0 || p.c < 0 || p.d < 0) {
    throw std::invalid_argument("R-MAT probabilities must be nonnegative and sum to 1");
  }
  if (p.scale < 0 || p.scale > 31) throw std::invalid_argument("R-MAT scale must be in [0, 31]");
  if (p.edge_factor < 0) throw std::invalid_argument("R-MAT edge factor must be nonnegative");

  const std::uint64_t n_edges = static_cast<std::uint64_t>(p.edge_factor) << p.scale;
  const double ab = p.a + p.b;
  const double abc = ab + p.c;
  RngStream rng(p.seed, 0);
  std::vector<Edge> edges;
  edges.reserve(n_edges);
  for (std::uint64_t i = 0; i < n_edges; ++i) {
    std::uint32_t src = 0, dst = 0;
    for (int level = p.scale - 1; level >= 0; --level) {
      const double r = rng.next_double();
      const std::uint32_t bit = std::uint32_t{1} << level;
      if (r < p.a) {
      } else if (r < ab) {
        dst |= bit;
      } else if (r < abc) {
        src |= bit;
      } else {
        src |= bit;
        dst |= bit;
      }
    }
    edges.push_back({src, dst, FixedWeight::kOne, std::nullopt});
  }
  if (p.scramble_ids) {
    const std::uint64_t n = std::uint64_t{1} << p.scale;
    std::vector<VertexId> perm(n);
    for (std::uint64_t v = 0; v < n; ++v) perm[v] = static_cast<VertexId>(v);
    RngStream prng(p.seed, 1);
    for (std::uint64_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[prng.next_below(i)]);
    for (auto& e : edges) {
      e.src = perm[e.src];
      e.dst = perm[e.dst];
    }
  }
  return edges;
}

/// Generated graph with all 2^scale vertices present.
inline CsrGraph rmat_graph(const RmatParams& p, bool undirected = false) {
  auto edges = rmat_generate(p);
  if (undirected) {
    const std::size_t n = edges.size();
    edges.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) edges.push_back({edges[i].dst, edges[i].src, edges[i].weight, std::nullopt});
  }
  return build_csr(std::move(edges), std::uint64_t{1} << p.scale);
}

}  // namespace gdrw

// Builds a small labeled graph, runs MetaPath and Node2Vec walks, and replays
// the MetaPath trace through the row-index caches.

#include <iostream>

#include "gdrw/graph.hpp"
#include "gdrw/memsim.hpp"
#include "gdrw/rmat.hpp"
#include "gdrw/walkers.hpp"

int main() {
  gdrw::RmatParams p;
  p.scale = 10;
  const auto g = gdrw::with_random_attributes(gdrw::rmat_graph(p, /*undirected=*/true), 7, 64, 4);
  std::cout << "graph: " << g.num_vertices() << " vertices, " << g.num_edges() << " edges\n";

  const auto mp = gdrw::make_queries(g, gdrw::MetaPathParams{{0, 1, 2, 3}}, 5, 42, 1000);
  const auto mp_results = gdrw::run_batch(g, mp, 2, 42);
  std::size_t dead = 0;
  for (const auto& r : mp_results) dead += r.terminated == gdrw::Termination::DeadEnd;
  std::cout << "metapath: " << mp_results.size() << " walks, " << dead << " dead ends\n";

  const auto n2v = gdrw::make_queries(g, gdrw::Node2VecParams{2.0, 0.5}, 80, 42, 100);
  const auto n2v_results = gdrw::run_batch(g, n2v, 2, 42);
  std::cout << "node2vec walk 0:";
  for (std::size_t i = 0; i < 10 && i < n2v_results[0].path.size(); ++i) std::cout << ' ' << n2v_results[0].path[i];
  std::cout << " ...\n";

  const auto report = gdrw::simulate_trace(g, std::span<const gdrw::WalkResult>(mp_results), gdrw::SimConfig{});
  std::cout << gdrw::to_json(report).dump(2) << '\n';
}

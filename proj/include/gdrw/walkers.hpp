#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "gdrw/fixed_weight.hpp"
#include "gdrw/graph.hpp"
#include "gdrw/rng.hpp"
#include "gdrw/sampler.hpp"
#include "gdrw/stats.hpp"

namespace gdrw {

/// Default block width: the point where the sampler saturates memory
/// bandwidth on the reference hardware.
inline constexpr std::size_t kDefaultBlockWidth = 16;

struct MetaPathParams {
  std::vector<RelationId> relations;  // used cyclically when shorter than the walk
};

struct Node2VecParams {
  double p = 2.0;
  double q = 0.5;
};

/// Static walk: the stored edge weights are used unchanged at every step.
struct StaticParams {};

using AppParams = std::variant<MetaPathParams, Node2VecParams, StaticParams>;

struct WalkQuery {
  std::uint64_t id = 0;
  VertexId start = 0;
  std::uint32_t target_length = 1;  // steps, so a completed path has target_length + 1 vertices
  AppParams app = StaticParams{};
};

struct StepContext {
  VertexId v_curr = 0;
  std::optional<VertexId> v_prev;
  std::uint64_t t = 0;
};

enum class Termination { Completed, DeadEnd };

struct WalkResult {
  std::uint64_t query_id = 0;
  std::vector<VertexId> path;
  Termination terminated = Termination::Completed;

  friend bool operator==(const WalkResult&, const WalkResult&) = default;
};

// Weight update functions ---------------------------------------------------

/// w* if the edge's relation is the one expected at this step, else 0.
constexpr std::uint64_t metapath_weight(std::uint64_t w_star, RelationId edge_relation,
                                        RelationId expected) noexcept {
  return edge_relation == expected ? w_star : 0;
}

/// Second-order weight for candidate b given the walker's previous vertex:
/// w*/p when returning, w* when b is also a neighbor of v_prev, w*/q
/// otherwise. The first step (no v_prev) keeps w*.
inline std::uint64_t node2vec_weight(std::uint64_t w_star, VertexId b, const StepContext& ctx,
                                     const CsrGraph& g, const FixedDivisor& p, const FixedDivisor& q) {
  if (!ctx.v_prev) return w_star;
  if (b == *ctx.v_prev) return p.divide(w_star);
  if (g.has_edge(*ctx.v_prev, b)) return w_star;
  return q.divide(w_star);
}

inline std::uint64_t node2vec_weight(std::uint64_t w_star, VertexId b, const StepContext& ctx,
                                     const CsrGraph& g, double p, double q) {
  return node2vec_weight(w_star, b, ctx, g, FixedDivisor(p), FixedDivisor(q));
}

class MetaPathWeigher {
 public:
  MetaPathWeigher(const CsrGraph& g, const MetaPathParams& params) : g_(g), relations_(params.relations) {
    if (relations_.empty()) throw std::invalid_argument("MetaPath relation sequence is empty");
  }
  RelationId expected(std::uint64_t t) const noexcept { return relations_[t % relations_.size()]; }
  std::uint64_t operator()(EdgeIndex e, VertexId, const StepContext& ctx) const {
    return metapath_weight(g_.edge_weights()[e], g_.relation(e), expected(ctx.t));
  }

 private:
  const CsrGraph& g_;
  std::vector<RelationId> relations_;
};

class Node2VecWeigher {
 public:
  Node2VecWeigher(const CsrGraph& g, const Node2VecParams& params) : g_(g), p_(params.p), q_(params.q) {}
  std::uint64_t operator()(EdgeIndex e, VertexId b, const StepContext& ctx) const {
    return node2vec_weight(g_.edge_weights()[e], b, ctx, g_, p_, q_);
  }

 private:
  const CsrGraph& g_;
  FixedDivisor p_;
  FixedDivisor q_;
};

class StaticWeigher {
 public:
  explicit StaticWeigher(const CsrGraph& g) : g_(g) {}
  std::uint64_t operator()(EdgeIndex e, VertexId, const StepContext&) const { return g_.edge_weights()[e]; }

 private:
  const CsrGraph& g_;
};

template <typename W>
concept EdgeWeigher = requires(const W w, EdgeIndex e, VertexId b, const StepContext& ctx) {
  { w(e, b, ctx) } -> std::convertible_to<std::uint64_t>;
};

// Step engine ---------------------------------------------------------------

struct StepOutcome {
  std::optional<VertexId> next;  // empty on a dead end
  std::uint64_t block_steps = 0;
};

/// One walk step: streams v_curr's neighbors through the weight function into
/// the block reservoir sampler, k lanes at a time. Runs ceil(degree / k)
/// block steps; lane j draws from streams[j].
template <EdgeWeigher W, UniformSource G>
StepOutcome step(const CsrGraph& g, const StepContext& ctx, const W& weigh, std::size_t k,
                 std::span<G> streams) {
  const auto info = g.neighbors_info(ctx.v_curr);
  const auto cols = g.col_index();
  Reservoir<VertexId> res;
  WeightBlock<VertexId> block(k);
  for (EdgeIndex e = info.offset; e < info.offset + info.degree; ++e) {
    const VertexId b = cols[e];
    block.push(b, weigh(e, b, ctx));
    if (block.full()) {
      wrs_block_step(res, block, streams);
      block.clear();
    }
  }
  wrs_block_step(res, block, streams);
  return {res.selected, res.block_steps};
}

namespace detail {

template <typename F>
decltype(auto) with_weigher(const CsrGraph& g, const AppParams& app, F&& f) {
  return std::visit(
      [&](const auto& params) -> decltype(auto) {
        using P = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<P, MetaPathParams>) {
          return f(MetaPathWeigher(g, params));
        } else if constexpr (std::is_same_v<P, Node2VecParams>) {
          return f(Node2VecWeigher(g, params));
        } else {
          return f(StaticWeigher(g));
        }
      },
      app);
}

}  // namespace detail

template <UniformSource G>
StepOutcome step(const CsrGraph& g, const StepContext& ctx, const WalkQuery& q, std::size_t k,
                 std::span<G> streams) {
  return detail::with_weigher(g, q.app, [&](const auto& w) { return step(g, ctx, w, k, streams); });
}

/// Walks one query to completion or to a dead end. The query's k lane streams
/// are forked from (master_seed, query.id), so the result does not depend on
/// which worker runs it.
inline WalkResult run_query(const CsrGraph& g, const WalkQuery& q, std::uint64_t master_seed,
                            std::size_t k = kDefaultBlockWidth) {
  if (q.target_length < 1) throw std::invalid_argument("target_length must be >= 1");
  if (q.start >= g.num_vertices()) throw std::out_of_range("start vertex out of range");
  auto streams = fork_streams(master_seed, q.id, k);
  std::span<RngStream> lanes(streams);

  WalkResult out{q.id, {q.start}, Termination::Completed};
  out.path.reserve(q.target_length + 1);
  detail::with_weigher(g, q.app, [&](const auto& weigh) {
    StepContext ctx{q.start, std::nullopt, 0};
    for (; ctx.t < q.target_length; ++ctx.t) {
      const auto next = step(g, ctx, weigh, k, lanes).next;
      if (!next) {
        out.terminated = Termination::DeadEnd;
        return;
      }
      out.path.push_back(*next);
      ctx.v_prev = ctx.v_curr;
      ctx.v_curr = *next;
    }
  });
  return out;
}

/// Runs queries over `workers` threads. Output is in query order and is a
/// pure function of (graph, queries, master_seed, k).
inline std::vector<WalkResult> run_batch(const CsrGraph& g, std::span<const WalkQuery> queries,
                                         std::size_t workers, std::uint64_t master_seed,
                                         std::size_t k = kDefaultBlockWidth) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  std::vector<WalkResult> results(queries.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < queries.size();) {
      try {
        results[i] = run_query(g, queries[i], master_seed, k);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = queries.size();
      }
    }
  };
  const std::size_t n_threads = std::min(workers, std::max<std::size_t>(queries.size(), 1));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// One query per vertex with nonzero out-degree, in a seeded shuffled order.
/// `count` (if given) truncates, or cycles over the shuffled starts when it
/// exceeds the number of such vertices. Query ids are 0..n-1 in output order.
inline std::vector<WalkQuery> make_queries(const CsrGraph& g, const AppParams& app, std::uint32_t length,
                                           std::uint64_t seed, std::optional<std::size_t> count = std::nullopt) {
  std::vector<VertexId> starts;
  for (std::uint64_t v = 0; v < g.num_vertices(); ++v) {
    if (g.degree(v) > 0) starts.push_back(static_cast<VertexId>(v));
  }
  RngStream rng(seed, 0x5348554646ull);
  for (std::size_t i = starts.size(); i > 1; --i) {
    std::swap(starts[i - 1], starts[rng.next_below(i)]);
  }
  const std::size_t n = count.value_or(starts.size());
  std::vector<WalkQuery> out;
  if (starts.empty()) return out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({i, starts[i % starts.size()], length, app});
  return out;
}

/// Checks that every consecutive pair is an edge and, for MetaPath, that the
/// edge taken at step t carries relation R[t mod |R|].
inline bool path_is_valid(const CsrGraph& g, const WalkResult& r, const AppParams& app) {
  if (r.path.empty()) return false;
  for (auto v : r.path) {
    if (v >= g.num_vertices()) return false;
  }
  const auto* mp = std::get_if<MetaPathParams>(&app);
  for (std::size_t t = 0; t + 1 < r.path.size(); ++t) {
    const auto nbrs = g.neighbors(r.path[t]);
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), r.path[t + 1]);
    if (it == nbrs.end() || *it != r.path[t + 1]) return false;
    if (mp) {
      const EdgeIndex e = g.neighbors_info(r.path[t]).offset + static_cast<EdgeIndex>(it - nbrs.begin());
      if (g.relation(e) != mp->relations[t % mp->relations.size()]) return false;
    }
  }
  return true;
}

// Stationary statistics -----------------------------------------------------

struct StationaryStats {
  std::vector<std::uint64_t> visit_counts;
  long double total_weight = 0;  // sum of every stored edge weight (raw)
  std::vector<double> expected_probability;
  std::uint64_t total_steps = 0;
  double tv_distance = 0.0;
};

/// Pr[v] = sum of v's outgoing weights / sum of all edge weights. This is the
/// stationary law of a static walk when weights are symmetric.
inline std::vector<double> stationary_expected(const CsrGraph& g) {
  const auto w = g.edge_weights();
  long double total = 0;
  for (auto x : w) total += static_cast<long double>(x);
  std::vector<double> p(g.num_vertices(), 0.0);
  if (total == 0) return p;
  for (std::uint64_t v = 0; v < g.num_vertices(); ++v) {
    const auto info = g.neighbors_info(v);
    long double s = 0;
    for (auto e = info.offset; e < info.offset + info.degree; ++e) s += static_cast<long double>(w[e]);
    p[v] = static_cast<double>(s / total);
  }
  return p;
}

/// Tallies visits (start vertices excluded, they are chosen rather than
/// sampled) and compares the empirical frequencies with stationary_expected.
inline StationaryStats stationary_stats(const CsrGraph& g, std::span<const WalkResult> results) {
  StationaryStats s;
  s.visit_counts.assign(g.num_vertices(), 0);
  for (auto x : g.edge_weights()) s.total_weight += static_cast<long double>(x);
  for (const auto& r : results) {
    for (std::size_t i = 1; i < r.path.size(); ++i) {
      ++s.visit_counts.at(r.path[i]);
      ++s.total_steps;
    }
  }
  s.expected_probability = stationary_expected(g);
  if (s.total_steps > 0) {
    std::vector<double> freq(g.num_vertices());
    for (std::size_t v = 0; v < freq.size(); ++v) {
      freq[v] = static_cast<double>(s.visit_counts[v]) / static_cast<double>(s.total_steps);
    }
    s.tv_distance = stats::total_variation(freq, s.expected_probability);
  }
  return s;
}

}  // namespace gdrw

#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gdrw/graph.hpp"
#include "gdrw/rng.hpp"
#include "gdrw/sampler.hpp"
#include "gdrw/stats.hpp"
#include "gdrw/walkers.hpp"

// Statistical harness for the samplers: random weight vectors, empirical
// histograms, and the chi-square suites the CLI `validate` command runs.

namespace gdrw::validation {

/// Uniform source whose draws never exceed 2^31 - 1. Fed to the block sampler
/// it over-accepts late items; used as a negative control.
class HalfRangeStream {
 public:
  HalfRangeStream() = default;
  HalfRangeStream(std::uint64_t seed, std::uint64_t stream) : inner_(seed, stream) {}
  std::uint32_t next_u32() noexcept { return inner_.next_u32() >> 1; }

 private:
  RngStream inner_;
};

template <UniformSource G>
std::vector<G> make_lanes(std::uint64_t seed, std::uint64_t base_id, std::size_t k) {
  std::vector<G> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) out.emplace_back(seed, base_id * k + j);
  return out;
}

/// `count` vectors with length uniform in [1, max_len] and integer weights
/// uniform in [1, max_weight].
inline std::vector<std::vector<std::uint64_t>> random_weight_vectors(std::uint64_t seed, std::size_t count,
                                                                     std::size_t max_len = 256,
                                                                     std::uint64_t max_weight = 1000) {
  RngStream rng(seed, 0x57564543ull);
  std::vector<std::vector<std::uint64_t>> out(count);
  for (auto& v : out) {
    v.resize(1 + rng.next_below(max_len));
    for (auto& w : v) w = 1 + rng.next_below(max_weight);
  }
  return out;
}

/// Selection counts of the block sampler over `trials` independent runs on
/// the same weights. The lanes keep advancing across trials.
template <UniformSource G>
std::vector<std::uint64_t> block_histogram(std::span<const std::uint64_t> weights, std::size_t k,
                                           std::uint64_t trials, std::span<G> lanes) {
  std::vector<std::uint32_t> items(weights.size());
  std::iota(items.begin(), items.end(), 0u);
  std::vector<std::uint64_t> hist(weights.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto res = wrs_block<std::uint32_t>(items, weights, k, lanes);
    if (res.selected) ++hist[*res.selected];
  }
  return hist;
}

template <UniformSource G>
std::vector<std::uint64_t> inverse_transform_histogram(std::span<const std::uint64_t> weights,
                                                       std::uint64_t trials, G& rng) {
  const InverseTransformTable table(weights);
  std::vector<std::uint64_t> hist(weights.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) ++hist[table.sample(rng)];
  return hist;
}

struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  std::size_t required = 0;
  double min_p_value = 1.0;

  bool ok() const noexcept { return passed >= required; }
};

struct SuiteConfig {
  std::uint64_t seed = 42;
  std::size_t vectors = 50;
  std::uint64_t trials = 200'000;
  std::size_t oracle_vectors = 20;
  std::uint64_t oracle_trials = 1'000'000;
  std::uint64_t node2vec_steps = 1'000'000;
  double alpha = 0.001;
  std::size_t allowed_failures = 2;  // per 50 vectors
  bool half_range_rng = false;
};

namespace detail {

inline std::uint64_t lane_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return seed ^ (tag * 0x9E3779B97F4A7C15ull);
}

inline std::size_t required_passes(const SuiteConfig& cfg, std::size_t total) {
  const std::size_t allowed = (cfg.allowed_failures * total + 49) / 50;
  return total > allowed ? total - allowed : 0;
}

inline void tally(SuiteResult& s, const stats::ChiSquareResult& r, double alpha) {
  ++s.total;
  if (r.passes(alpha)) ++s.passed;
  s.min_p_value = std::min(s.min_p_value, r.p_value);
}

}  // namespace detail

/// Block-sampler histograms for every vector at width k.
template <UniformSource G>
std::vector<std::vector<std::uint64_t>> block_histograms(const std::vector<std::vector<std::uint64_t>>& vecs,
                                                         std::size_t k, std::uint64_t trials, std::uint64_t seed) {
  std::vector<std::vector<std::uint64_t>> out;
  out.reserve(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    auto lanes = make_lanes<G>(detail::lane_seed(seed, k), i, k);
    out.push_back(block_histogram<G>(vecs[i], k, trials, std::span<G>(lanes)));
  }
  return out;
}

inline SuiteResult goodness_of_fit_suite(std::string name, const std::vector<std::vector<std::uint64_t>>& vecs,
                                         const std::vector<std::vector<std::uint64_t>>& hists,
                                         const SuiteConfig& cfg) {
  SuiteResult s{std::move(name)};
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    detail::tally(s, stats::chi_square_gof(hists[i], exact_distribution(vecs[i])), cfg.alpha);
  }
  s.required = detail::required_passes(cfg, s.total);
  return s;
}

inline SuiteResult two_sample_suite(std::string name, const std::vector<std::vector<std::uint64_t>>& a,
                                    const std::vector<std::vector<std::uint64_t>>& b, const SuiteConfig& cfg) {
  SuiteResult s{std::move(name)};
  for (std::size_t i = 0; i < a.size(); ++i) {
    detail::tally(s, stats::chi_square_two_sample(a[i], b[i]), cfg.alpha);
  }
  s.required = detail::required_passes(cfg, s.total);
  return s;
}

/// Fixed 5-vertex graph for the one-step Node2Vec check. Walker sits at 2
/// having come from 0; neighbors of 2 are 0 (return), 1 (also adjacent to 0),
/// 3 and 4 (two hops from 0).
inline CsrGraph node2vec_probe_graph() {
  const auto w = [](std::uint64_t x) { return x * FixedWeight::kOne; };
  std::vector<Edge> edges{{0, 1, w(1)}, {0, 2, w(2)}, {1, 0, w(1)}, {1, 2, w(1)}, {2, 0, w(2)},
                          {2, 1, w(3)}, {2, 3, w(5)}, {2, 4, w(1)}, {3, 2, w(5)}, {4, 2, w(1)}};
  return build_csr(std::move(edges), 5);
}

/// Real-valued normalized second-order weights of v_curr's neighbors.
inline std::vector<double> node2vec_expected(const CsrGraph& g, VertexId v_prev, VertexId v_curr, double p,
                                             double q) {
  std::vector<double> out;
  const auto info = g.neighbors_info(v_curr);
  double total = 0;
  for (auto e = info.offset; e < info.offset + info.degree; ++e) {
    const VertexId b = g.col_index()[e];
    const double w = FixedWeight::from_raw(g.edge_weights()[e]).to_double();
    const double x = b == v_prev ? w / p : g.has_edge(v_prev, b) ? w : w / q;
    out.push_back(x);
    total += x;
  }
  for (auto& x : out) x /= total;
  return out;
}

/// Counts of the next vertex (as an index into v_curr's neighbor list).
template <UniformSource G>
std::vector<std::uint64_t> node2vec_one_step_histogram(const CsrGraph& g, VertexId v_prev, VertexId v_curr,
                                                       const Node2VecParams& params, std::size_t k,
                                                       std::uint64_t steps, std::span<G> lanes) {
  const Node2VecWeigher weigh(g, params);
  const auto nbrs = g.neighbors(v_curr);
  std::vector<std::uint64_t> hist(nbrs.size(), 0);
  const StepContext ctx{v_curr, v_prev, 1};
  for (std::uint64_t s = 0; s < steps; ++s) {
    const auto next = step(g, ctx, weigh, k, lanes).next;
    if (next) ++hist[static_cast<std::size_t>(std::lower_bound(nbrs.begin(), nbrs.end(), *next) - nbrs.begin())];
  }
  return hist;
}

/// Every suite `gdrw validate` runs, in order.
template <UniformSource G>
std::vector<SuiteResult> run_all(const SuiteConfig& cfg) {
  std::vector<SuiteResult> out;
  const auto vecs = random_weight_vectors(cfg.seed, cfg.vectors);

  std::vector<std::vector<std::uint64_t>> k1, k16;
  for (std::size_t k : {1, 4, 16}) {
    auto h = block_histograms<G>(vecs, k, cfg.trials, cfg.seed);
    out.push_back(goodness_of_fit_suite("exactness k=" + std::to_string(k), vecs, h, cfg));
    if (k == 1) k1 = std::move(h);
    if (k == 16) k16 = std::move(h);
  }
  out.push_back(two_sample_suite("block-width invariance k=1 vs k=16", k1, k16, cfg));

  const std::vector<std::vector<std::uint64_t>> oracle_vecs(
      vecs.begin(), vecs.begin() + static_cast<std::ptrdiff_t>(std::min(cfg.oracle_vectors, vecs.size())));
  const auto block = block_histograms<G>(oracle_vecs, kDefaultBlockWidth, cfg.oracle_trials,
                                         detail::lane_seed(cfg.seed, 0x4F52));
  std::vector<std::vector<std::uint64_t>> its;
  for (std::size_t i = 0; i < oracle_vecs.size(); ++i) {
    RngStream rng(detail::lane_seed(cfg.seed, 0x495453), i);
    its.push_back(inverse_transform_histogram(oracle_vecs[i], cfg.oracle_trials, rng));
  }
  out.push_back(two_sample_suite("inverse transform vs block k=16", its, block, cfg));

  const auto g = node2vec_probe_graph();
  const Node2VecParams params{2.0, 0.5};
  auto lanes = make_lanes<G>(detail::lane_seed(cfg.seed, 0x4E3256), 0, 4);
  const auto hist = node2vec_one_step_histogram<G>(g, 0, 2, params, 4, cfg.node2vec_steps, std::span<G>(lanes));
  SuiteResult n2v{"node2vec one-step law"};
  detail::tally(n2v, stats::chi_square_gof(hist, node2vec_expected(g, 0, 2, params.p, params.q)), cfg.alpha);
  n2v.required = 1;
  out.push_back(n2v);
  return out;
}

inline std::vector<SuiteResult> run_all(const SuiteConfig& cfg) {
  return cfg.half_range_rng ? run_all<HalfRangeStream>(cfg) : run_all<RngStream>(cfg);
}

}  // namespace gdrw::validation

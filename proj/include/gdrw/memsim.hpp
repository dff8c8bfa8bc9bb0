#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdrw/graph.hpp"
#include "gdrw/walkers.hpp"

namespace gdrw {

// Row-index caches ------------------------------------------------------------

struct CacheLine {
  std::uint64_t tag = 0;  // vertex id >> log2(capacity)
  EdgeIndex offset = 0;
  std::uint64_t degree = 0;
};

struct CacheAccess {
  bool hit = false;
  NeighborInfo info;
};

/// On a conflict miss, keep whichever of the two vertices has more neighbors;
/// equal degree keeps the resident.
struct DegreeAwareReplacement {
  static constexpr bool replace(const CacheLine& resident, const NeighborInfo& incoming) noexcept {
    return incoming.degree > resident.degree;
  }
};

/// Plain direct-mapped behaviour: the incoming line always wins.
struct AlwaysReplace {
  static constexpr bool replace(const CacheLine&, const NeighborInfo&) noexcept { return true; }
};

/// Direct-mapped cache of (offset, degree) pairs keyed by vertex id; line
/// index is v mod capacity. Empty lines are always filled.
template <typename Policy>
class DirectMappedCache {
 public:
  explicit DirectMappedCache(std::size_t capacity) : lines_(capacity) {
    if (capacity == 0 || !std::has_single_bit(capacity)) {
      throw std::invalid_argument("cache capacity must be a power of two");
    }
    shift_ = std::countr_zero(capacity);
  }

  CacheAccess access(VertexId v, const CsrGraph& g) {
    auto& line = lines_[line_of(v)];
    const std::uint64_t tag = std::uint64_t{v} >> shift_;
    if (line && line->tag == tag) {
      ++hits_;
      return {true, {line->offset, line->degree}};
    }
    ++misses_;
    const NeighborInfo info = g.neighbors_info(v);
    if (!line || Policy::replace(*line, info)) line = CacheLine{tag, info.offset, info.degree};
    return {false, info};
  }

  std::size_t capacity() const noexcept { return lines_.size(); }
  std::size_t line_of(VertexId v) const noexcept { return v & (lines_.size() - 1); }
  const std::optional<CacheLine>& line(std::size_t i) const { return lines_.at(i); }

  /// Vertex id held by line i, if any.
  std::optional<VertexId> resident(std::size_t i) const {
    const auto& l = lines_.at(i);
    if (!l) return std::nullopt;
    return static_cast<VertexId>((l->tag << shift_) | i);
  }

  std::uint64_t hits() const noexcept { return hits_; }
  std::uint64_t misses() const noexcept { return misses_; }
  std::uint64_t accesses() const noexcept { return hits_ + misses_; }
  double miss_ratio() const noexcept {
    return accesses() == 0 ? 0.0 : static_cast<double>(misses_) / static_cast<double>(accesses());
  }
  void reset_counters() noexcept { hits_ = misses_ = 0; }

 private:
  std::vector<std::optional<CacheLine>> lines_;
  int shift_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

using DegreeAwareCache = DirectMappedCache<DegreeAwareReplacement>;
using BaselineDirectMappedCache = DirectMappedCache<AlwaysReplace>;

inline CacheAccess dac_access(DegreeAwareCache& cache, VertexId v, const CsrGraph& g) { return cache.access(v, g); }
inline CacheAccess dmc_access(BaselineDirectMappedCache& cache, VertexId v, const CsrGraph& g) {
  return cache.access(v, g);
}

// Burst planning ------------------------------------------------------------

struct BurstPlan {
  std::uint64_t n_long = 0;
  std::uint64_t n_short = 0;
  std::uint64_t bytes_loaded = 0;
  std::uint64_t bytes_valid = 0;

  friend bool operator==(const BurstPlan&, const BurstPlan&) = default;
};

/// Splits a c-byte sequential load into floor(c / S1) long bursts and
/// ceil((c - floor(c / S1) * S1) / S2) short bursts. S1 = 0 disables the long
/// pipeline. Loaded bytes are ceil(c / S2) * S2, so waste stays below S2.
inline BurstPlan burst_plan(std::uint64_t c, std::uint64_t s1, std::uint64_t s2) {
  if (s2 == 0) throw std::invalid_argument("short burst size must be positive");
  if (s1 != 0 && (s1 < s2 || s1 % s2 != 0)) {
    throw std::invalid_argument("long burst size must be a multiple of the short burst size");
  }
  BurstPlan p;
  p.n_long = s1 == 0 ? 0 : c / s1;
  const std::uint64_t rest = c - p.n_long * s1;
  p.n_short = (rest + s2 - 1) / s2;
  p.bytes_loaded = p.n_long * s1 + p.n_short * s2;
  p.bytes_valid = c;
  return p;
}

// Trace replay --------------------------------------------------------------

struct NeighborLoad {
  VertexId vertex = 0;
  std::uint64_t bytes = 0;
};

/// Row-index lookups and neighbor-list loads a walk batch performs, in
/// execution order.
struct AccessTrace {
  std::vector<VertexId> row_accesses;
  std::vector<NeighborLoad> neighbor_loads;
};

struct TraceOptions {
  std::uint64_t record_bytes = 8;  // bytes per col_index entry
  bool second_order = false;       // also fetch v_prev's neighbors (Node2Vec edge tests)
};

/// Replays each result: every vertex a step was attempted from (all but the
/// last vertex of a completed path, all of a dead-ended one) costs one
/// row-index lookup and one neighbor load. Throws if a path is not a walk on g.
inline AccessTrace build_trace(const CsrGraph& g, std::span<const WalkResult> results,
                               const TraceOptions& opt = {}) {
  AccessTrace trace;
  for (const auto& r : results) {
    if (!path_is_valid(g, r, StaticParams{})) {
      throw std::invalid_argument("walk result " + std::to_string(r.query_id) + " is not a path in this graph");
    }
    const std::size_t attempted = r.terminated == Termination::DeadEnd ? r.path.size() : r.path.size() - 1;
    for (std::size_t t = 0; t < attempted; ++t) {
      const VertexId v = r.path[t];
      trace.row_accesses.push_back(v);
      trace.neighbor_loads.push_back({v, g.degree(v) * opt.record_bytes});
      if (opt.second_order && t > 0) {
        const VertexId prev = r.path[t - 1];
        trace.row_accesses.push_back(prev);
        trace.neighbor_loads.push_back({prev, g.degree(prev) * opt.record_bytes});
      }
    }
  }
  return trace;
}

struct SimConfig {
  std::size_t cache_lines = 4096;
  std::uint64_t s1_bytes = 32 * 8;
  std::uint64_t s2_bytes = 8;
  TraceOptions trace;
  /// Unmeasured replays of the row-index trace before the measured one, so
  /// miss ratios reflect the warmed cache rather than first touches.
  std::uint32_t warmup_passes = 1;
};

struct MetricsReport {
  double dac_miss_ratio = 0.0;
  double dmc_miss_ratio = 0.0;
  double valid_data_ratio = 1.0;
  std::uint64_t n_long = 0;
  std::uint64_t n_short = 0;
  std::uint64_t bytes_loaded = 0;
  std::uint64_t bytes_valid = 0;
  std::uint64_t accesses = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline nlohmann::json to_json(const MetricsReport& m) {
  return {{"dac_miss_ratio", m.dac_miss_ratio}, {"dmc_miss_ratio", m.dmc_miss_ratio},
          {"valid_data_ratio", m.valid_data_ratio}, {"n_long", m.n_long},
          {"n_short", m.n_short}, {"bytes_loaded", m.bytes_loaded},
          {"bytes_valid", m.bytes_valid}, {"accesses", m.accesses}};
}

inline MetricsReport simulate_trace(const CsrGraph& g, const AccessTrace& trace, const SimConfig& cfg) {
  DegreeAwareCache dac(cfg.cache_lines);
  BaselineDirectMappedCache dmc(cfg.cache_lines);
  for (std::uint32_t pass = 0; pass < cfg.warmup_passes; ++pass) {
    for (auto v : trace.row_accesses) {
      dac.access(v, g);
      dmc.access(v, g);
    }
  }
  dac.reset_counters();
  dmc.reset_counters();
  for (auto v : trace.row_accesses) {
    dac.access(v, g);
    dmc.access(v, g);
  }

  MetricsReport m;
  m.dac_miss_ratio = dac.miss_ratio();
  m.dmc_miss_ratio = dmc.miss_ratio();
  m.accesses = trace.row_accesses.size();
  for (const auto& load : trace.neighbor_loads) {
    const auto plan = burst_plan(load.bytes, cfg.s1_bytes, cfg.s2_bytes);
    m.n_long += plan.n_long;
    m.n_short += plan.n_short;
    m.bytes_loaded += plan.bytes_loaded;
    m.bytes_valid += plan.bytes_valid;
  }
  if (m.bytes_loaded > 0) {
    m.valid_data_ratio = static_cast<double>(m.bytes_valid) / static_cast<double>(m.bytes_loaded);
  }
  return m;
}

inline MetricsReport simulate_trace(const CsrGraph& g, std::span<const WalkResult> results, const SimConfig& cfg) {
  return simulate_trace(g, build_trace(g, results, cfg.trace), cfg);
}

}  // namespace gdrw

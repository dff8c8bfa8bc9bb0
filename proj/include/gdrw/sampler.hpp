#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gdrw/rng.hpp"

namespace gdrw {

/// Widest block the block sampler accepts. Lanes live in fixed arrays so the
/// hot loop never allocates.
inline constexpr std::size_t kMaxBlockWidth = 64;

/// Running weighted-reservoir state for a reservoir of size one.
template <typename Item>
struct Reservoir {
  std::optional<Item> selected;
  std::optional<std::uint64_t> selected_index;  // position in the consumed stream
  std::uint64_t w_sum = 0;                      // exact sum of every consumed weight
  std::uint64_t consumed = 0;
  std::uint64_t block_steps = 0;

  bool empty() const noexcept { return !selected.has_value(); }
};

/// Up to `width` (item, raw weight) lanes handed to the sampler together.
/// Lanes at or beyond `fill()` are ignored.
template <typename Item>
class WeightBlock {
 public:
  explicit WeightBlock(std::size_t width = 1) : width_(width) {
    if (width == 0 || width > kMaxBlockWidth) {
      throw std::invalid_argument("block width must be in [1, 64]");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t fill() const noexcept { return fill_; }
  bool full() const noexcept { return fill_ == width_; }
  bool empty() const noexcept { return fill_ == 0; }
  void clear() noexcept { fill_ = 0; }

  void push(Item item, std::uint64_t weight) {
    if (full()) throw std::length_error("weight block is full");
    items_[fill_] = item;
    weights_[fill_] = weight;
    ++fill_;
  }

  std::span<const Item> items() const noexcept { return {items_.data(), fill_}; }
  std::span<const std::uint64_t> weights() const noexcept { return {weights_.data(), fill_}; }

 private:
  std::size_t width_;
  std::size_t fill_ = 0;
  std::array<Item, kMaxBlockWidth> items_{};
  std::array<std::uint64_t, kMaxBlockWidth> weights_{};
};

namespace detail {

inline constexpr std::uint64_t kMaxWeightSum = std::uint64_t{1} << 63;

template <UniformSource G>
std::uint64_t draw_u64(G& g) {
  const std::uint64_t hi = g.next_u32();
  return (hi << 32) | static_cast<std::uint32_t>(g.next_u32());
}

}  // namespace detail

/// Inclusive prefix sum of the block's weights into `out[0 .. weights.size())`.
inline void block_prefix_sum(std::span<const std::uint64_t> weights, std::span<std::uint64_t> out) {
  std::inclusive_scan(weights.begin(), weights.end(), out.begin());
}

template <typename Item>
std::vector<std::uint64_t> block_prefix_sum(const WeightBlock<Item>& block) {
  std::vector<std::uint64_t> out(block.fill());
  block_prefix_sum(block.weights(), out);
  return out;
}

/// Division-free acceptance test for one lane:
///   2^32 * w > r* * (w_sum + w_ps) + w
/// which is p > r for p = w / (w_sum + w_ps) and r = r* / (2^32 - 1), cross
/// multiplied. Evaluated exactly in 128 bits. A lane with w = 0 never passes,
/// and r* = 2^32 - 1 rejects even a certain lane (bias 2^-32 per draw).
constexpr bool selector_accepts(std::uint64_t w, std::uint64_t w_sum, std::uint64_t w_ps,
                                std::uint32_t r_star) noexcept {
  using u128 = unsigned __int128;
  const u128 lhs = static_cast<u128>(w) << 32;
  const u128 rhs = static_cast<u128>(r_star) * (static_cast<u128>(w_sum) + w_ps) + w;
  return lhs > rhs;
}

/// One block step of the parallel reservoir sampler over lanes
/// (items[j], weights[j]), j < fill.
///
/// Lane j draws r* from streams[j] (zero-weight lanes draw too, so the
/// consumption schedule does not depend on the data), tests itself against
/// w_sum + prefix[j], and the highest accepting lane replaces the reservoir.
/// Lanes are independent; only the final max-reduction orders them.
template <typename Item, UniformSource G>
void wrs_block_step(Reservoir<Item>& res, std::span<const Item> items, std::span<const std::uint64_t> weights,
                    std::span<G> streams) {
  const std::size_t fill = weights.size();
  if (fill == 0) return;
  if (items.size() != fill || fill > kMaxBlockWidth) {
    throw std::invalid_argument("wrs_block_step: bad lane count");
  }
  if (streams.size() < fill) {
    throw std::invalid_argument("wrs_block_step: fewer streams than filled lanes");
  }

  std::array<std::uint64_t, kMaxBlockWidth> prefix;
  std::uint64_t running = 0;
  for (std::size_t j = 0; j < fill; ++j) {
    if (weights[j] > detail::kMaxWeightSum - running) {
      throw std::overflow_error("block weight sum exceeds 2^63");
    }
    running += weights[j];
    prefix[j] = running;
  }
  if (running > detail::kMaxWeightSum - res.w_sum) {
    throw std::overflow_error("reservoir weight sum exceeds 2^63");
  }

  std::size_t selected = fill;  // sentinel: no candidate
  for (std::size_t j = 0; j < fill; ++j) {
    const std::uint32_t r_star = streams[j].next_u32();
    if (selector_accepts(weights[j], res.w_sum, prefix[j], r_star)) selected = j;
  }
  if (selected != fill) {
    res.selected = items[selected];
    res.selected_index = res.consumed + selected;
  }
  res.w_sum += running;
  res.consumed += fill;
  ++res.block_steps;
}

template <typename Item, UniformSource G>
void wrs_block_step(Reservoir<Item>& res, const WeightBlock<Item>& block, std::span<G> streams) {
  wrs_block_step(res, block.items(), block.weights(), streams);
}

template <typename Item, UniformSource G>
void wrs_block_step(Reservoir<Item>& res, const WeightBlock<Item>& block, std::vector<G>& streams) {
  wrs_block_step(res, block.items(), block.weights(), std::span<G>(streams));
}

/// Runs the block sampler over a whole (item, weight) stream, k lanes per
/// block, using streams[0 .. k).
template <typename Item, UniformSource G>
Reservoir<Item> wrs_block(std::span<const Item> items, std::span<const std::uint64_t> weights,
                          std::size_t k, std::span<G> streams) {
  if (items.size() != weights.size()) {
    throw std::invalid_argument("items and weights differ in length");
  }
  if (k == 0 || k > kMaxBlockWidth) throw std::invalid_argument("block width must be in [1, 64]");
  Reservoir<Item> res;
  for (std::size_t i = 0; i < items.size(); i += k) {
    const std::size_t m = std::min(k, items.size() - i);
    wrs_block_step(res, items.subspan(i, m), weights.subspan(i, m), streams);
  }
  return res;
}

/// Reference single-lane reservoir sampler: item i replaces the reservoir
/// when w_i / (w_1 + ... + w_i) > r_i.
template <typename Item, UniformSource G>
Reservoir<Item> wrs_sequential(std::span<const Item> items, std::span<const std::uint64_t> weights,
                               G& rng) {
  if (items.size() != weights.size()) {
    throw std::invalid_argument("items and weights differ in length");
  }
  using u128 = unsigned __int128;
  Reservoir<Item> res;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::uint64_t w = weights[i];
    if (w > detail::kMaxWeightSum - res.w_sum) {
      throw std::overflow_error("reservoir weight sum exceeds 2^63");
    }
    res.w_sum += w;
    const std::uint32_t r_star = rng.next_u32();
    // w / w_sum > r* / (2^32 - 1)
    if (static_cast<u128>(w) * 0xFFFFFFFFu > static_cast<u128>(r_star) * res.w_sum) {
      res.selected = items[i];
      res.selected_index = i;
    }
    ++res.consumed;
    ++res.block_steps;
  }
  return res;
}

/// Two-phase inverse transformation sampler: build the cumulative table
/// once, then each draw is one uniform plus a binary search.
class InverseTransformTable {
 public:
  explicit InverseTransformTable(std::span<const std::uint64_t> weights) : cumulative_(weights.size()) {
    std::uint64_t running = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > detail::kMaxWeightSum - running) {
        throw std::overflow_error("weight sum exceeds 2^63");
      }
      running += weights[i];
      cumulative_[i] = running;
    }
    if (running == 0) throw std::domain_error("cannot sample from all-zero weights");
  }

  std::uint64_t total() const noexcept { return cumulative_.back(); }
  std::size_t size() const noexcept { return cumulative_.size(); }

  template <UniformSource G>
  std::size_t sample(G& rng) const {
    using u128 = unsigned __int128;
    const std::uint64_t x =
        static_cast<std::uint64_t>((static_cast<u128>(detail::draw_u64(rng)) * total()) >> 64);
    return static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), x) - cumulative_.begin());
  }

 private:
  std::vector<std::uint64_t> cumulative_;
};

template <UniformSource G>
std::size_t inverse_transform_sample(std::span<const std::uint64_t> weights, G& rng) {
  return InverseTransformTable(weights).sample(rng);
}

/// p_i = w_i / sum(w) as doubles (relative error <= 2^-52 per entry).
inline std::vector<double> exact_distribution(std::span<const std::uint64_t> weights) {
  long double total = 0;
  for (auto w : weights) total += static_cast<long double>(w);
  if (total == 0) throw std::domain_error("exact_distribution: all weights are zero");
  std::vector<double> p(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    p[i] = static_cast<double>(static_cast<long double>(weights[i]) / total);
  }
  return p;
}

}  // namespace gdrw

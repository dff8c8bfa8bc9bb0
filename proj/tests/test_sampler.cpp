#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "gdrw/sampler.hpp"
#include "gdrw/stats.hpp"
#include "gdrw/validation.hpp"
#include "support/limbs.hpp"

using namespace gdrw;
using gdrw::testing::oracle_accepts;

namespace {

/// Replays a fixed list of draws.
struct ScriptedStream {
  std::vector<std::uint32_t> values;
  std::size_t pos = 0;
  std::uint32_t next_u32() { return values.at(pos++); }
};

constexpr std::uint32_t kMaxR = 0xFFFFFFFFu;

template <typename F>
double monte_carlo(std::uint64_t trials, F&& draw_is_hit) {
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) hits += draw_is_hit();
  return static_cast<double>(hits) / static_cast<double>(trials);
}

std::vector<std::uint32_t> iota_items(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

}  // namespace

TEST(PrefixSum, Examples) {
  const std::vector<std::uint64_t> w{2, 1, 2, 3};
  std::vector<std::uint64_t> out(4);
  block_prefix_sum(w, out);
  EXPECT_EQ(out, (std::vector<std::uint64_t>{2, 3, 5, 8}));

  WeightBlock<int> single(4);
  single.push(0, 5);
  EXPECT_EQ(block_prefix_sum(single), std::vector<std::uint64_t>{5});

  WeightBlock<int> zeros(4);
  for (std::uint64_t x : {0, 0, 0, 7}) zeros.push(0, x);
  EXPECT_EQ(block_prefix_sum(zeros), (std::vector<std::uint64_t>{0, 0, 0, 7}));
}

TEST(WeightBlockTest, WidthAndFill) {
  EXPECT_THROW(WeightBlock<int>(0), std::invalid_argument);
  EXPECT_THROW(WeightBlock<int>(65), std::invalid_argument);
  WeightBlock<int> b(2);
  b.push(1, 1);
  b.push(2, 2);
  EXPECT_TRUE(b.full());
  EXPECT_THROW(b.push(3, 3), std::length_error);
  b.clear();
  EXPECT_TRUE(b.empty());
}

TEST(Selector, Examples) {
  EXPECT_TRUE(selector_accepts(5, 0, 5, 0));
  EXPECT_FALSE(selector_accepts(5, 0, 5, kMaxR));
  EXPECT_FALSE(selector_accepts(1, 0, 4, 1u << 30));
  EXPECT_TRUE(selector_accepts(1, 0, 4, (1u << 30) - 1'000'000));
  EXPECT_FALSE(selector_accepts(0, 10, 10, 0));
}

TEST(Selector, MatchesLimbOracle) {
  RngStream rng(17, 0);
  const std::uint64_t cap = std::uint64_t{1} << 62;
  for (int i = 0; i < 200'000; ++i) {
    // Mix of magnitudes so both tiny and near-limit sums are covered.
    const int shift = static_cast<int>(rng.next_below(63));
    const std::uint64_t w = rng.next_u64() >> (shift + 1);
    const std::uint64_t w_ps = std::min(cap, w + (rng.next_u64() >> (shift + 1)));
    const std::uint64_t w_sum = (rng.next_u64() >> 2) % (cap - w_ps + 1);
    const std::uint32_t r = rng.next_u32();
    ASSERT_EQ(selector_accepts(w, w_sum, w_ps, r), oracle_accepts(w, w_sum, w_ps, r))
        << w << ' ' << w_sum << ' ' << w_ps << ' ' << r;
  }
  for (std::uint64_t w : {std::uint64_t{0}, std::uint64_t{1}, cap}) {
    for (std::uint32_t r : {0u, 1u, kMaxR - 1, kMaxR}) {
      EXPECT_EQ(selector_accepts(w, cap - w, w, r), oracle_accepts(w, cap - w, w, r));
    }
  }
}

// Fig. 4 style walk-through: lanes 2 and 3 (1-based) accept, lane 3 wins.
TEST(BlockStep, HighestAcceptingLaneWins) {
  WeightBlock<char> block(4);
  for (auto [item, w] : std::vector<std::pair<char, std::uint64_t>>{{'a', 2}, {'b', 1}, {'c', 2}, {'d', 3}}) {
    block.push(item, w);
  }
  std::vector<ScriptedStream> lanes{{{kMaxR}}, {{0}}, {{0}}, {{kMaxR}}};
  Reservoir<char> res;
  wrs_block_step(res, block, lanes);
  ASSERT_TRUE(res.selected);
  EXPECT_EQ(*res.selected, 'c');
  EXPECT_EQ(*res.selected_index, 2u);
  EXPECT_EQ(res.w_sum, 8u);
}

TEST(BlockStep, AllZeroLanesLeaveReservoirButConsumeDraws) {
  auto streams = fork_streams(1, 0, 4);
  Reservoir<int> res;
  WeightBlock<int> b(4);
  b.push(7, 10);
  wrs_block_step(res, b, streams);
  ASSERT_TRUE(res.selected);

  WeightBlock<int> zeros(4);
  for (int i = 0; i < 4; ++i) zeros.push(i, 0);
  const auto before = res;
  wrs_block_step(res, zeros, streams);
  EXPECT_EQ(res.selected, before.selected);
  EXPECT_EQ(res.w_sum, before.w_sum);
  EXPECT_EQ(streams[0].counter(), 2u);
  for (std::size_t j = 1; j < 4; ++j) EXPECT_EQ(streams[j].counter(), 1u);
}

TEST(BlockStep, PartialBlockLeavesUnusedLanesUntouched) {
  auto streams = fork_streams(1, 0, 4);
  WeightBlock<int> b(4);
  b.push(0, 1);
  b.push(1, 1);
  Reservoir<int> res;
  wrs_block_step(res, b, streams);
  EXPECT_EQ(streams[0].counter(), 1u);
  EXPECT_EQ(streams[1].counter(), 1u);
  EXPECT_EQ(streams[2].counter(), 0u);
  EXPECT_EQ(streams[3].counter(), 0u);
}

TEST(BlockStep, OverflowIsReported) {
  auto streams = fork_streams(1, 0, 2);
  WeightBlock<int> b(2);
  b.push(0, std::uint64_t{1} << 62);
  b.push(1, std::uint64_t{1} << 62);
  Reservoir<int> res;
  wrs_block_step(res, b, streams);
  EXPECT_THROW(wrs_block_step(res, b, streams), std::overflow_error);
}

TEST(BlockSampler, StepCountAndWeightSum) {
  RngStream gen(3, 9);
  auto streams = fork_streams(3, 0, 16);
  for (std::size_t n : {1, 5, 16, 17, 100, 256}) {
    std::vector<std::uint64_t> w(n);
    for (auto& x : w) x = gen.next_below(1000);
    const auto items = iota_items(n);
    for (std::size_t k : {1, 2, 4, 8, 16}) {
      const auto res = wrs_block<std::uint32_t>(items, w, k, std::span<RngStream>(streams));
      EXPECT_EQ(res.block_steps, (n + k - 1) / k);
      EXPECT_EQ(res.w_sum, std::accumulate(w.begin(), w.end(), std::uint64_t{0}));
      EXPECT_EQ(res.consumed, n);
      EXPECT_EQ(res.empty(), res.w_sum == 0);
    }
  }
}

// Exact selection law at reduced resolution: every r* on a 2^B lattice is
// enumerated jointly across all draws, and the real block step decides each
// outcome. The result must equal w_i / sum(w) up to the lattice granularity.
TEST(BlockSampler, LatticeEnumerationIsExact) {
  constexpr int kBits = 5;
  constexpr std::uint32_t kPoints = 1u << kBits;
  const std::vector<std::vector<std::uint64_t>> cases{{1, 3}, {2, 1, 2}, {0, 4, 1}, {5, 0, 0}, {1, 1, 1}};
  for (const auto& w : cases) {
    const std::size_t n = w.size();
    const auto items = iota_items(n);
    const double total = static_cast<double>(std::accumulate(w.begin(), w.end(), std::uint64_t{0}));
    for (std::size_t k : {1, 2, 3}) {
      std::vector<double> prob(n, 0.0);
      std::uint64_t combos = 1;
      for (std::size_t i = 0; i < n; ++i) combos *= kPoints;
      for (std::uint64_t c = 0; c < combos; ++c) {
        // Item i draws lattice point digit i, i.e. r* = digit * (2^32 - 1) / (2^B - 1).
        std::vector<ScriptedStream> lanes(k);
        std::uint64_t rest = c;
        for (std::size_t i = 0; i < n; ++i) {
          const std::uint64_t digit = rest % kPoints;
          rest /= kPoints;
          lanes[i % k].values.push_back(static_cast<std::uint32_t>(digit * kMaxR / (kPoints - 1)));
        }
        const auto res = wrs_block<std::uint32_t>(items, w, k, std::span<ScriptedStream>(lanes));
        if (res.selected) prob[*res.selected] += 1.0 / static_cast<double>(combos);
      }
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(prob[i], static_cast<double>(w[i]) / total, static_cast<double>(n) / (kPoints - 1))
            << "case size " << n << " k " << k << " item " << i;
      }
    }
  }
}

// Larger vectors at 12-bit resolution: draws are independent, so the final
// law is P(accept i) * prod_{m > i} (1 - P(accept m)), each factor counted
// exactly over the lattice.
TEST(BlockSampler, LatticeProductFormIsExact) {
  constexpr std::uint32_t kPoints = 1u << 12;
  RngStream gen(12, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + gen.next_below(8);
    std::vector<std::uint64_t> w(n);
    for (auto& x : w) x = gen.next_below(10);
    if (std::accumulate(w.begin(), w.end(), std::uint64_t{0}) == 0) w[0] = 1;
    const double total = static_cast<double>(std::accumulate(w.begin(), w.end(), std::uint64_t{0}));
    for (std::size_t k : {1, 4, 8}) {
      std::vector<double> accept(n);
      std::uint64_t w_sum = 0;
      for (std::size_t start = 0; start < n; start += k) {
        std::uint64_t ps = 0;
        for (std::size_t i = start; i < std::min(n, start + k); ++i) {
          ps += w[i];
          std::uint32_t hits = 0;
          for (std::uint64_t j = 0; j < kPoints; ++j) {
            hits += selector_accepts(w[i], w_sum, ps, static_cast<std::uint32_t>(j * kMaxR / (kPoints - 1)));
          }
          accept[i] = static_cast<double>(hits) / kPoints;
        }
        w_sum += ps;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double p = accept[i];
        for (std::size_t m = i + 1; m < n; ++m) p *= 1.0 - accept[m];
        EXPECT_NEAR(p, static_cast<double>(w[i]) / total, static_cast<double>(n) * 2.0 / kPoints);
      }
    }
  }
}

TEST(SequentialSampler, Examples) {
  RngStream rng(21, 0);
  const std::vector<int> two{0, 1};
  const std::vector<std::uint64_t> even{1, 1}, skew{1, 3};
  EXPECT_NEAR(monte_carlo(1'000'000, [&] { return *wrs_sequential<int>(two, even, rng).selected == 0; }), 0.5,
              0.005);
  EXPECT_NEAR(monte_carlo(1'000'000, [&] { return *wrs_sequential<int>(two, skew, rng).selected == 1; }), 0.75,
              0.005);

  const std::vector<int> three{0, 1, 2};
  const std::vector<std::uint64_t> only_last{0, 0, 5};
  for (int i = 0; i < 1000; ++i) {
    const auto r = wrs_sequential<int>(three, only_last, rng);
    ASSERT_EQ(r.selected, 2);
    ASSERT_EQ(r.w_sum, 5u);
  }
  const std::vector<std::uint64_t> none{0, 0, 0};
  EXPECT_TRUE(wrs_sequential<int>(three, none, rng).empty());
}

TEST(SequentialSampler, SingleLaneBlocksMatchSequential) {
  const std::vector<std::uint64_t> w{3, 1, 4, 1, 5, 9, 2, 6};
  const auto items = iota_items(w.size());
  RngStream seq_rng(8, 100);
  std::vector<std::uint64_t> seq(w.size(), 0);
  for (int t = 0; t < 1'000'000; ++t) ++seq[*wrs_sequential<std::uint32_t>(items, w, seq_rng).selected];
  auto lanes = fork_streams(8, 0, 1);
  const auto blk = validation::block_histogram<RngStream>(w, 1, 1'000'000, std::span<RngStream>(lanes));
  EXPECT_GT(stats::chi_square_two_sample(seq, blk).p_value, 0.001);
}

TEST(BlockSampler, EveryWidthMatchesExactDistribution) {
  RngStream gen(99, 0);
  std::vector<std::uint64_t> w(37);
  for (auto& x : w) x = 1 + gen.next_below(50);
  const auto expected = exact_distribution(w);
  for (std::size_t k : {1, 2, 4, 8, 16}) {
    auto lanes = validation::make_lanes<RngStream>(5, k, k);
    const auto h = validation::block_histogram<RngStream>(w, k, 200'000, std::span<RngStream>(lanes));
    EXPECT_GT(stats::chi_square_gof(h, expected).p_value, 0.001) << "k=" << k;
  }
}

TEST(BlockSampler, HalfRangeDrawsAreDetected) {
  const std::vector<std::uint64_t> w{5, 1, 1, 1, 1, 1, 1, 1};
  auto lanes = validation::make_lanes<validation::HalfRangeStream>(1, 0, 4);
  const auto h =
      validation::block_histogram<validation::HalfRangeStream>(w, 4, 50'000, std::span<validation::HalfRangeStream>(lanes));
  EXPECT_LT(stats::chi_square_gof(h, exact_distribution(w)).p_value, 1e-6);
}

TEST(InverseTransform, Examples) {
  RngStream rng(4, 4);
  const std::vector<std::uint64_t> skew{1, 3}, single{7}, zero{0, 0};
  const InverseTransformTable table(skew);
  EXPECT_NEAR(monte_carlo(1'000'000, [&] { return table.sample(rng) == 1; }), 0.75, 0.005);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(inverse_transform_sample(single, rng), 0u);
  EXPECT_THROW(inverse_transform_sample(zero, rng), std::domain_error);
}

TEST(InverseTransform, NeverPicksZeroWeights) {
  RngStream rng(4, 5);
  const std::vector<std::uint64_t> w{0, 2, 0, 0, 1, 0};
  const InverseTransformTable table(w);
  for (int i = 0; i < 100'000; ++i) {
    const auto s = table.sample(rng);
    ASSERT_TRUE(s == 1 || s == 4);
  }
}

TEST(InverseTransform, AgreesWithSequentialOnRandomVectors) {
  const auto vecs = validation::random_weight_vectors(77, 50, 32, 100);
  std::size_t passed = 0;
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    const auto items = iota_items(vecs[i].size());
    RngStream a(77, 2 * i), b(77, 2 * i + 1);
    std::vector<std::uint64_t> seq(vecs[i].size(), 0);
    for (int t = 0; t < 20'000; ++t) ++seq[*wrs_sequential<std::uint32_t>(items, vecs[i], a).selected];
    const auto its = validation::inverse_transform_histogram(vecs[i], 20'000, b);
    passed += stats::chi_square_two_sample(seq, its).p_value > 0.001;
  }
  EXPECT_GE(passed, 48u);
}

TEST(ExactDistribution, Examples) {
  EXPECT_EQ(exact_distribution(std::vector<std::uint64_t>{1, 1}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(exact_distribution(std::vector<std::uint64_t>{1, 3}), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(exact_distribution(std::vector<std::uint64_t>{2, 1, 2, 3}),
            (std::vector<double>{0.25, 0.125, 0.25, 0.375}));
  EXPECT_THROW(exact_distribution(std::vector<std::uint64_t>{0, 0}), std::domain_error);
}

TEST(ChiSquare, PoolsSparseCellsAndRejectsMismatch) {
  const std::vector<std::uint64_t> obs{50, 50, 0, 1};
  const std::vector<double> p{0.49, 0.49, 0.01, 0.01};
  const auto r = stats::chi_square_gof(obs, p);
  EXPECT_EQ(r.dof, 2u);  // two big cells + one pooled cell, minus one
  EXPECT_GT(r.p_value, 0.5);

  const std::vector<std::uint64_t> bad{900, 100};
  EXPECT_LT(stats::chi_square_gof(bad, std::vector<double>{0.5, 0.5}).p_value, 1e-10);
}

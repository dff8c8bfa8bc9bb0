#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gdrw/rmat.hpp"
#include "gdrw/validation.hpp"
#include "gdrw/walk_io.hpp"
#include "gdrw/walkers.hpp"

using namespace gdrw;

namespace {

constexpr std::uint64_t kOne = FixedWeight::kOne;

CsrGraph labeled(std::vector<Edge> edges, std::vector<Label> labels) {
  const auto n = labels.size();
  return build_csr(std::move(edges), n, std::move(labels));
}

CsrGraph undirected_from(const std::string& text) { return load_edge_list_string(text, false); }

CsrGraph labeled_rmat(int scale, std::uint64_t seed) {
  RmatParams p;
  p.scale = scale;
  p.seed = seed;
  return with_random_attributes(rmat_graph(p, true), seed, 64, 4);
}

}  // namespace

TEST(MetaPathWeight, Examples) {
  EXPECT_EQ(metapath_weight(7 * kOne, 3, 3), 7 * kOne);
  EXPECT_EQ(metapath_weight(7 * kOne, 3, 5), 0u);
  EXPECT_EQ(metapath_weight(0, 3, 3), 0u);
}

TEST(Node2VecWeight, Examples) {
  // 0 - 1 - 2 and 0 - 2: from v_prev = 0 at v_curr = 1.
  const auto g = undirected_from("0 1\n1 2\n0 2\n1 3\n");
  const StepContext ctx{1, VertexId{0}, 1};
  EXPECT_EQ(node2vec_weight(4 * kOne, 0, ctx, g, 2.0, 0.5), 2 * kOne);
  EXPECT_EQ(node2vec_weight(4 * kOne, 2, ctx, g, 2.0, 0.5), 4 * kOne);
  EXPECT_EQ(node2vec_weight(4 * kOne, 3, ctx, g, 2.0, 0.5), 8 * kOne);
  EXPECT_EQ(node2vec_weight(4 * kOne, 3, StepContext{1, std::nullopt, 0}, g, 2.0, 0.5), 4 * kOne);
}

TEST(Node2VecWeight, FixedPointDivisionRoundsHalfUp) {
  const FixedDivisor three(3.0);
  EXPECT_EQ(three.divide(1), 0u);  // 1/3 rounds down
  EXPECT_EQ(three.divide(2), 1u);  // 2/3 rounds up
  EXPECT_EQ(FixedDivisor(2.0).divide(3), 2u);  // 1.5 rounds up
  EXPECT_THROW(FixedDivisor(0.0), std::invalid_argument);
  EXPECT_THROW(FixedDivisor(-2.0), std::invalid_argument);
}

TEST(Step, DegreeZeroIsDeadEnd) {
  const auto g = build_csr({{0, 1}}, 2);
  auto streams = fork_streams(1, 0, 4);
  const StaticWeigher w(g);
  const auto out = step(g, StepContext{1, std::nullopt, 0}, w, 4, std::span<RngStream>(streams));
  EXPECT_FALSE(out.next);
  EXPECT_EQ(out.block_steps, 0u);
}

TEST(Step, SingleMatchingRelationIsCertain) {
  // Vertex 0 has neighbors 1..5; only vertex 4 carries label 2.
  const auto g = labeled({{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}, {0, 1, 1, 3, 2, 0});
  const MetaPathParams params{{2}};
  const MetaPathWeigher w(g, params);
  auto streams = fork_streams(1, 0, 2);
  for (int i = 0; i < 1000; ++i) {
    const auto out = step(g, StepContext{0, std::nullopt, 0}, w, 2, std::span<RngStream>(streams));
    ASSERT_EQ(out.next, VertexId{4});
    ASSERT_EQ(out.block_steps, 3u);
  }
}

TEST(Step, BlockStepsIsCeilDegreeOverK) {
  std::vector<Edge> edges;
  for (VertexId v = 1; v <= 37; ++v) edges.push_back({0, v});
  const auto g = build_csr(std::move(edges));
  const StaticWeigher w(g);
  auto streams = fork_streams(1, 0, 64);
  for (std::size_t k : {1, 3, 16, 37, 64}) {
    const auto out = step(g, StepContext{0, std::nullopt, 0}, w, k, std::span<RngStream>(streams));
    EXPECT_EQ(out.block_steps, (37 + k - 1) / k);
  }
}

TEST(Step, Node2VecOneStepLaw) {
  const auto g = validation::node2vec_probe_graph();
  const Node2VecParams params{2.0, 0.5};
  auto lanes = fork_streams(31, 0, 4);
  const auto hist =
      validation::node2vec_one_step_histogram<RngStream>(g, 0, 2, params, 4, 1'000'000, std::span<RngStream>(lanes));
  const auto expected = validation::node2vec_expected(g, 0, 2, 2.0, 0.5);
  // Neighbors of 2 are 0, 1, 3, 4 with w* 2, 3, 5, 1: weights 1, 3, 10, 2.
  EXPECT_NEAR(expected[0], 1.0 / 16, 1e-12);
  EXPECT_NEAR(expected[2], 10.0 / 16, 1e-12);
  EXPECT_GT(stats::chi_square_gof(hist, expected).p_value, 0.001);
}

TEST(Step, MetaPathOneStepLaw) {
  // Neighbors 1..4 of vertex 0, labels 1,2,1,1, weights 1,5,2,3: relation 1 keeps {1,3,4}.
  const auto g = labeled({{0, 1, kOne}, {0, 2, 5 * kOne}, {0, 3, 2 * kOne}, {0, 4, 3 * kOne}}, {0, 1, 2, 1, 1});
  const MetaPathWeigher w(g, MetaPathParams{{1}});
  auto lanes = fork_streams(2, 0, 2);
  std::vector<std::uint64_t> hist(4, 0);
  for (int i = 0; i < 1'000'000; ++i) {
    ++hist[*step(g, StepContext{0, std::nullopt, 0}, w, 2, std::span<RngStream>(lanes)).next - 1];
  }
  EXPECT_EQ(hist[1], 0u);
  const std::vector<double> p{1.0 / 6, 0.0, 2.0 / 6, 3.0 / 6};
  EXPECT_GT(stats::chi_square_gof(hist, p).p_value, 0.001);
}

TEST(RunQuery, MetaPathLengthBoundAndValidity) {
  const auto g = labeled_rmat(10, 3);
  const AppParams app = MetaPathParams{{0, 1, 2, 3}};
  for (const auto& q : make_queries(g, app, 5, 3)) {
    const auto r = run_query(g, q, 3);
    ASSERT_EQ(r.path.front(), q.start);
    ASSERT_LE(r.path.size(), 6u);
    ASSERT_TRUE(path_is_valid(g, r, app));
    ASSERT_EQ(r.terminated == Termination::Completed, r.path.size() == 6u);
  }
}

TEST(RunQuery, DeadEndTruncatesPath) {
  // 0 -> 1 -> 2 -> 3 with labels forcing relations 1, 2 and then a missing 3.
  const auto g = labeled({{0, 1}, {1, 2}, {2, 3}}, {0, 1, 2, 0});
  const WalkQuery q{0, 0, 5, MetaPathParams{{1, 2, 3}}};
  const auto r = run_query(g, q, 1);
  EXPECT_EQ(r.path, (std::vector<VertexId>{0, 1, 2}));
  EXPECT_EQ(r.terminated, Termination::DeadEnd);
}

TEST(RunQuery, RelationSequenceIsCyclic) {
  // A directed 4-cycle labeled so relations 1,2 alternate.
  const auto g = labeled({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {2, 1, 2, 1});
  const auto r = run_query(g, WalkQuery{0, 0, 9, MetaPathParams{{1, 2}}}, 1);
  EXPECT_EQ(r.path.size(), 10u);
  EXPECT_EQ(r.terminated, Termination::Completed);
}

TEST(RunQuery, RejectsBadQueries) {
  const auto g = build_csr({{0, 1}});
  EXPECT_THROW(run_query(g, WalkQuery{0, 0, 0, StaticParams{}}, 1), std::invalid_argument);
  EXPECT_THROW(run_query(g, WalkQuery{0, 9, 3, StaticParams{}}, 1), std::out_of_range);
  EXPECT_THROW(run_query(g, WalkQuery{0, 0, 3, MetaPathParams{}}, 1), std::invalid_argument);
}

TEST(RunBatch, WorkerCountIsUnobservable) {
  const auto g = labeled_rmat(9, 5);
  for (const AppParams& app : {AppParams{MetaPathParams{{0, 1, 2, 3}}}, AppParams{Node2VecParams{2.0, 0.5}}}) {
    const auto queries = make_queries(g, app, 12, 5);
    const auto one = run_batch(g, queries, 1, 5);
    EXPECT_EQ(one, run_batch(g, queries, 8, 5));
    EXPECT_EQ(one, run_batch(g, queries, 3, 5, kDefaultBlockWidth));
    EXPECT_NE(one, run_batch(g, queries, 1, 6));
  }
}

TEST(RunBatch, EmptyAndErrors) {
  const auto g = build_csr({{0, 1}});
  EXPECT_TRUE(run_batch(g, std::span<const WalkQuery>(), 4, 1).empty());
  const std::vector<WalkQuery> bad{{0, 0, 2, StaticParams{}}, {1, 7, 2, StaticParams{}}};
  EXPECT_THROW(run_batch(g, bad, 2, 1), std::out_of_range);
  EXPECT_THROW(run_batch(g, bad, 0, 1), std::invalid_argument);
}

TEST(MakeQueries, OnePerNonIsolatedVertexInShuffledOrder) {
  // 10 non-isolated vertices out of 14.
  std::vector<Edge> edges;
  for (VertexId v = 0; v < 10; ++v) edges.push_back({v, (v + 1) % 10});
  const auto g = build_csr(std::move(edges), 14);
  const auto qs = make_queries(g, StaticParams{}, 5, 42);
  ASSERT_EQ(qs.size(), 10u);
  std::set<VertexId> starts;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_EQ(qs[i].id, i);
    EXPECT_LT(qs[i].start, 10u);
    starts.insert(qs[i].start);
  }
  EXPECT_EQ(starts.size(), 10u);
  std::vector<VertexId> order;
  for (const auto& q : qs) order.push_back(q.start);
  EXPECT_FALSE(std::is_sorted(order.begin(), order.end()));
  EXPECT_EQ(make_queries(g, StaticParams{}, 5, 42, 25).size(), 25u);
  EXPECT_EQ(make_queries(g, StaticParams{}, 5, 42, 3).size(), 3u);
}

TEST(Stationary, TriangleAndStar) {
  const auto tri = undirected_from("0 1\n1 2\n2 0\n");
  for (double p : stationary_expected(tri)) EXPECT_NEAR(p, 1.0 / 3, 1e-12);

  const auto star = undirected_from("0 1\n0 2\n0 3\n0 4\n");
  const auto p = stationary_expected(star);
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  for (int leaf = 1; leaf <= 4; ++leaf) EXPECT_NEAR(p[leaf], 0.125, 1e-12);
}

TEST(Stationary, CountsExcludeStartsAndSumToSteps) {
  const auto g = labeled_rmat(8, 2);
  const auto results = run_batch(g, make_queries(g, StaticParams{}, 20, 2), 1, 2);
  const auto s = stationary_stats(g, results);
  std::uint64_t steps = 0;
  for (const auto& r : results) steps += r.path.size() - 1;
  EXPECT_EQ(s.total_steps, steps);
  EXPECT_EQ(std::accumulate(s.visit_counts.begin(), s.visit_counts.end(), std::uint64_t{0}), steps);
  double sum = 0;
  for (double p : s.expected_probability) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Stationary, DegreeAndVisitsAreRankCorrelated) {
  RmatParams p;
  p.scale = 12;
  const auto g = rmat_graph(p, true);
  const auto results = run_batch(g, make_queries(g, StaticParams{}, 40, 1), 1, 1);
  const auto s = stationary_stats(g, results);
  std::vector<double> deg, visits;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (g.degree(v) == 0) continue;
    deg.push_back(static_cast<double>(g.degree(v)));
    visits.push_back(static_cast<double>(s.visit_counts[v]));
  }
  EXPECT_GT(stats::spearman(deg, visits), 0.5);
}

TEST(WalkIo, RoundTripsAllFormats) {
  const auto g = labeled_rmat(8, 4);
  const auto results = run_batch(g, make_queries(g, MetaPathParams{{0, 1, 2, 3}}, 5, 4), 1, 4);
  for (auto fmt : {ResultFormat::Text, ResultFormat::Binary, ResultFormat::Json}) {
    std::stringstream buf;
    write_results(buf, results, fmt);
    EXPECT_EQ(read_results(buf, fmt, 5), results);
  }
  std::stringstream text;
  write_results(text, std::vector<WalkResult>{{7, {1, 2, 3}, Termination::Completed}}, ResultFormat::Text);
  EXPECT_EQ(text.str(), "7: 1 2 3\n");
}

TEST(WalkIo, MalformedInputIsRejected) {
  std::stringstream no_colon("1 2 3\n");
  EXPECT_THROW(read_results(no_colon, ResultFormat::Text), ParseError);
  std::stringstream truncated(std::string("\x01\0\0\0\0\0\0\0\x05\0\0\0", 12));
  EXPECT_THROW(read_results(truncated, ResultFormat::Binary), std::runtime_error);
  EXPECT_THROW(parse_result_format("csv"), std::invalid_argument);
}

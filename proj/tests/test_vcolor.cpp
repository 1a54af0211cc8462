// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "colsim/vcolor.hpp"

using namespace colsim;

namespace {

void require_proper_vertex(const Graph& g, const VColorResult& r) {
  REQUIRE(r.colors.size() == g.num_vertices());
  for (auto c : r.colors) {
    REQUIRE(c != kNoColor);
    REQUIRE(c < r.palette);
  }
  for (const auto& [u, v] : g.edges()) REQUIRE(r.colors[u] != r.colors[v]);
}

}  // namespace

TEST_CASE("schedule: tetration ramp, cap, and cleanup stage") {
  ScheduleParams sp;
  sp.x_max = 100000;
  sp.slack_scale = 1000.0;
  sp.palette_ratio = 2.0;
  sp.c_c = 8.0;
  sp.log2n = 16.0;
  sp.log_star_n = 4;
  sp.reps_a = 4;
  sp.reps_b = 4;
  auto ops = build_schedule(sp);
  // stage A: x = 1, 2, 4, 16, 65536, each repeated 4 times
  std::vector<std::uint32_t> expect_a{1, 2, 4, 16, 65536};
  REQUIRE(ops.size() >= 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(ops[i].kind == ColorOp::Kind::multitrials);
    CHECK(ops[i].x == expect_a[i / 4]);
    CHECK(ops[i].label == "stageA." + std::to_string(i / 4));
  }
  // stage B: x grows with log^(i/L) n, clamped to [1, x_max]
  std::uint32_t prev = 0;
  for (std::size_t i = 20; i < ops.size(); ++i) {
    CHECK(ops[i].label.substr(0, 7) == "stageB.");
    CHECK(ops[i].x >= 1);
    CHECK(ops[i].x <= sp.x_max);
    CHECK(ops[i].x >= prev);
    prev = ops[i].x;
  }
  CHECK(ops.size() == 20 + 4 * 5);

  // small cap: stage A stops as soon as the cap is reached
  sp.x_max = 3;
  auto small = build_schedule(sp);
  CHECK(small[0].x == 1);
  CHECK(small[4].x == 2);
  CHECK(small[8].x == 3);
  CHECK(small[12].label.substr(0, 7) == "stageB.");

  sp.slack_round = true;
  auto with_slack = build_schedule(sp);
  CHECK(with_slack[0].kind == ColorOp::Kind::single_try);
  CHECK(with_slack[0].label == "slack");
  CHECK(with_slack.size() == small.size() + 1);
}

TEST_CASE("clique needs and gets Delta+1 distinct colors") {
  auto g = generate_graph(GraphModel::clique, {.n = 33}, 1);
  auto r = color_vertices(g, {.seed = 5});
  require_proper_vertex(g, r);
  CHECK(r.palette == 64);  // 2 * Delta with eps = 1
  std::vector<bool> used(64, false);
  for (auto c : r.colors) used[c] = true;
  // all 33 colors distinct in a clique
  std::size_t cnt = 0;
  for (bool b : used) cnt += b;
  CHECK(cnt == 33);
}

TEST_CASE("edgeless graph: everyone adopts immediately") {
  auto g = Graph::from_edges(10, {});
  auto r = color_vertices(g, {.seed = 2});
  require_proper_vertex(g, r);
  CHECK(r.palette == 1);
  CHECK(r.report.rounds_used <= 3);  // try, adopt+announce, finish
  for (auto c : r.colors) CHECK(c == 0);
}

TEST_CASE("single edge") {
  auto g = Graph::from_edges(2, {{0, 1}});
  auto r = color_vertices(g, {.seed = 3});
  require_proper_vertex(g, r);
}

TEST_CASE("random regular graph colors without fallback or timeout") {
  auto g = generate_graph(GraphModel::random_regular, {.n = 4096, .d = 20}, 7);
  auto r = color_vertices(g, {.seed = 11});
  require_proper_vertex(g, r);
  CHECK_FALSE(r.report.timed_out);
  CHECK(r.report.max_bits_per_edge_round <= default_bandwidth(4096));
  // the scheduled prefix should finish the job; no fallback stage entered
  CHECK(r.report.rounds_used <= r.prefix_rounds);
  for (const auto& span : r.report.phases) CHECK(span.label != "fallback");
}

TEST_CASE("properness holds at every intermediate round") {
  auto g = generate_graph(GraphModel::gnp, {.n = 300, .p = 0.05}, 4);
  auto r = color_vertices(g, {.seed = 6, .check_each_round = true});
  require_proper_vertex(g, r);
}

TEST_CASE("uncolored count is non-increasing over the run") {
  auto g = generate_graph(GraphModel::random_regular, {.n = 512, .d = 16}, 9);
  auto r = color_vertices(g, {.seed = 13});
  require_proper_vertex(g, r);
  std::uint64_t prev = g.num_vertices();
  for (const auto& pt : r.report.trajectory) {
    CHECK(pt.uncolored <= prev);
    prev = pt.uncolored;
  }
  CHECK(prev == 0);
}

TEST_CASE("runs are deterministic in the seed") {
  auto g = generate_graph(GraphModel::gnp, {.n = 256, .p = 0.04}, 3);
  auto a = color_vertices(g, {.seed = 21});
  auto b = color_vertices(g, {.seed = 21});
  auto c = color_vertices(g, {.seed = 22});
  CHECK(a.colors == b.colors);
  CHECK(a.report.rounds_used == b.report.rounds_used);
  CHECK(a.colors != c.colors);
}

TEST_CASE("Delta+1 palette via slack generation on a sparse graph") {
  auto g = generate_graph(GraphModel::triangle_free, {.n = 600, .p = 0.03}, 5);
  REQUIRE(g.max_degree() >= 4);
  VColorOptions opts;
  opts.sparse_plus1 = true;
  opts.seed = 17;
  auto r = color_vertices(g, opts);
  require_proper_vertex(g, r);
  CHECK(r.palette == g.max_degree() + 1);
  CHECK(r.report.phases.front().label == "slack");
}

TEST_CASE("small palettes force the clamped family") {
  auto g = generate_graph(GraphModel::cycle, {.n = 64}, 1);
  auto r = color_vertices(g, {.seed = 8});
  require_proper_vertex(g, r);
  CHECK(r.family_clamped);  // palette 4 cannot support the full sample size
}

TEST_CASE("wider bandwidth shortens the run") {
  auto g = generate_graph(GraphModel::random_regular, {.n = 1024, .d = 24}, 2);
  auto narrow = color_vertices(g, {.bandwidth_mult = 1, .seed = 31});
  auto wide = color_vertices(g, {.bandwidth_mult = 4, .seed = 31});
  require_proper_vertex(g, narrow);
  require_proper_vertex(g, wide);
  CHECK(wide.report.rounds_used < narrow.report.rounds_used);
  CHECK(wide.report.max_bits_per_edge_round <= 4 * default_bandwidth(1024));
}

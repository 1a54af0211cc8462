// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "colsim/d2color.hpp"

using namespace colsim;

namespace {

void require_proper_d2(const Graph& g, const D2Result& r) {
  REQUIRE(r.colors.size() == g.num_vertices());
  for (auto c : r.colors) {
    REQUIRE(c != kNoColor);
    REQUIRE(c < r.palette);
  }
  auto sq = square_graph(g);
  for (const auto& [u, v] : sq.edges()) REQUIRE(r.colors[u] != r.colors[v]);
}

Graph star(std::uint32_t leaves) {
  std::vector<Edge> es;
  for (VertexId v = 1; v <= leaves; ++v) es.emplace_back(0, v);
  return Graph::from_edges(leaves + 1, std::move(es));
}

}  // namespace

TEST_CASE("edgeless graph: no communication needed") {
  auto g = Graph::from_edges(7, {});
  auto r = color_d2(g, {.seed = 1});
  require_proper_d2(g, r);
  CHECK(r.report.rounds_used == 1);
  for (auto c : r.colors) CHECK(c == 0);
}

TEST_CASE("star: center and leaves are mutually conflicting") {
  auto g = star(6);
  auto r = color_d2(g, {.seed = 2});
  require_proper_d2(g, r);
  // square of a star is a clique: all 7 colors distinct
  std::set<std::uint32_t> used(r.colors.begin(), r.colors.end());
  CHECK(used.size() == 7);
}

TEST_CASE("path of three vertices squares to a triangle") {
  auto g = generate_graph(GraphModel::path, {.n = 3}, 1);
  auto r = color_d2(g, {.seed = 3});
  require_proper_d2(g, r);
  std::set<std::uint32_t> used(r.colors.begin(), r.colors.end());
  CHECK(used.size() == 3);
}

TEST_CASE("all three palette budgets on a regular graph") {
  auto g = generate_graph(GraphModel::random_regular, {.n = 256, .d = 6}, 4);

  D2Options a;
  a.mode = D2Mode::budget_1plus_eps;
  a.seed = 11;
  auto ra = color_d2(g, a);
  CHECK(ra.palette == 72);  // (1+eps) * Delta^2
  require_proper_d2(g, ra);
  CHECK_FALSE(ra.report.timed_out);
  CHECK(ra.report.max_bits_per_edge_round <= default_bandwidth(256));

  D2Options b;
  b.mode = D2Mode::budget_delta2_plus1_sparse;
  b.seed = 12;
  auto rb = color_d2(g, b);
  CHECK(rb.palette == 37);  // Delta^2 + 1
  require_proper_d2(g, rb);
  CHECK(rb.report.phases.front().label == "slack");

  D2Options c;
  c.mode = D2Mode::budget_log_c;
  c.c = 1;
  c.seed = 13;
  auto rc = color_d2(g, c);
  CHECK(rc.palette == 36 * 8);  // Delta^2 * log2(n)
  require_proper_d2(g, rc);
}

TEST_CASE("iterated log depth shrinks the palette factor") {
  CHECK(detail::iterated_log2(65536.0, 1) == doctest::Approx(16.0));
  CHECK(detail::iterated_log2(65536.0, 2) == doctest::Approx(4.0));
  CHECK(detail::iterated_log2(65536.0, 3) == doctest::Approx(2.0));
}

TEST_CASE("runs are deterministic in the seed") {
  auto g = generate_graph(GraphModel::gnp, {.n = 120, .p = 0.04}, 9);
  auto a = color_d2(g, {.seed = 40});
  auto b = color_d2(g, {.seed = 40});
  auto c = color_d2(g, {.seed = 41});
  CHECK(a.colors == b.colors);
  CHECK(a.colors != c.colors);
}

TEST_CASE("two-hop palette samples match the oracle exactly") {
  std::vector<Graph> corpus;
  corpus.push_back(generate_graph(GraphModel::path, {.n = 10}, 1));
  corpus.push_back(generate_graph(GraphModel::cycle, {.n = 9}, 1));
  corpus.push_back(generate_graph(GraphModel::clique, {.n = 8}, 1));
  corpus.push_back(star(8));
  corpus.push_back(generate_graph(GraphModel::gnp, {.n = 30, .p = 0.15}, 5));
  corpus.push_back(generate_graph(GraphModel::random_regular, {.n = 20, .d = 4}, 6));

  std::size_t events_checked = 0;
  for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
    const Graph& g = corpus[gi];
    auto sq = square_graph(g);
    D2Options opts;
    opts.log_sampling = true;
    opts.seed = 100 + gi;
    std::vector<std::vector<std::uint32_t>> snap;  // per-round colors
    auto r = color_d2_observed(g, opts,
                               [&](std::uint64_t, const std::vector<D2Program>& nodes) {
                                 std::vector<std::uint32_t> cs;
                                 cs.reserve(nodes.size());
                                 for (const auto& nd : nodes) cs.push_back(nd.color());
                                 snap.push_back(std::move(cs));
                               });
    require_proper_d2(g, r);
    REQUIRE(r.sample_logs.size() == g.num_vertices());
    REQUIRE(snap.size() == r.report.rounds_used);
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      for (const auto& ev : r.sample_logs[v]) {
        const auto& colors_then = snap.at(ev.round);
        const auto& S = r.family->set(ev.i);
        BitVec expect(S.size());
        for (std::size_t pos = 0; pos < S.size(); ++pos) {
          bool used = colors_then[v] == S[pos];
          for (VertexId w : sq.neighbors(v)) used = used || colors_then[w] == S[pos];
          if (!used) expect.set(pos);
        }
        CHECK(expect == ev.result);
        ++events_checked;
      }
    }
  }
  CHECK(events_checked > 50);
}

// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <queue>
#include <sstream>

#include "colsim/graph.hpp"

using namespace colsim;

namespace {

Graph gen(GraphModel m, VertexId n, double p = 0.0, VertexId d = 0) {
  return generate_graph(m, {.n = n, .p = p, .d = d}, 12345);
}

// BFS-based oracle: edge (u,w) in G^2 iff 1 <= dist(u,w) <= 2.
Graph square_by_bfs(const Graph& g) {
  std::vector<Edge> es;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    std::vector<int> dist(g.num_vertices(), -1);
    std::queue<VertexId> q;
    dist[v] = 0;
    q.push(v);
    while (!q.empty()) {
      VertexId u = q.front();
      q.pop();
      if (dist[u] == 2) continue;
      for (VertexId w : g.neighbors(u))
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
    }
    for (VertexId w = v + 1; w < g.num_vertices(); ++w)
      if (dist[w] == 1 || dist[w] == 2) es.emplace_back(v, w);
  }
  return Graph::from_edges(g.num_vertices(), std::move(es));
}

}  // namespace

TEST_CASE("construction validates input") {
  CHECK_THROWS_AS(Graph::from_edges(3, {{1, 1}}), GraphError);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 3}}), GraphError);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1}, {1, 0}}), GraphError);
  auto g = Graph::from_edges(4, {{2, 0}, {1, 3}});  // unordered pairs accepted
  CHECK(g.num_edges() == 2);
  CHECK(g.has_edge(0, 2));
  CHECK(g.has_edge(3, 1));
  CHECK_FALSE(g.has_edge(0, 1));
  CHECK(g.edge_index(2, 0).has_value());
  CHECK_FALSE(g.edge_index(0, 1).has_value());
}

TEST_CASE("generators: basic shapes") {
  auto c5 = gen(GraphModel::cycle, 5);
  CHECK(c5.num_edges() == 5);
  CHECK(c5.max_degree() == 2);

  auto k4 = gen(GraphModel::clique, 4);
  CHECK(k4.num_edges() == 6);
  CHECK(k4.max_degree() == 3);

  auto p4 = gen(GraphModel::path, 4);
  CHECK(p4.num_edges() == 3);
  CHECK(p4.degree(0) == 1);
  CHECK(p4.degree(1) == 2);

  auto rr = gen(GraphModel::random_regular, 1000, 0.0, 32);
  for (VertexId v = 0; v < rr.num_vertices(); ++v) CHECK(rr.degree(v) == 32);

  CHECK_THROWS_AS(gen(GraphModel::random_regular, 5, 0.0, 3), GraphError);  // odd n*d
  CHECK_THROWS_AS(gen(GraphModel::cycle, 2), GraphError);
}

TEST_CASE("generator determinism") {
  auto a = generate_graph(GraphModel::gnp, {.n = 200, .p = 0.05}, 7);
  auto b = generate_graph(GraphModel::gnp, {.n = 200, .p = 0.05}, 7);
  auto c = generate_graph(GraphModel::gnp, {.n = 200, .p = 0.05}, 8);
  CHECK(a.edges() == b.edges());
  CHECK(a.edges() != c.edges());
}

TEST_CASE("gnp edge count is near n*(n-1)/2 * p") {
  auto g = generate_graph(GraphModel::gnp, {.n = 500, .p = 0.1}, 99);
  const double expect = 500.0 * 499.0 / 2.0 * 0.1;
  CHECK(std::abs(static_cast<double>(g.num_edges()) - expect) < 5 * std::sqrt(expect));
}

TEST_CASE("triangle_free generator output has no triangles") {
  auto g = gen(GraphModel::triangle_free, 300, 0.05);
  for (const auto& [u, v] : g.edges()) {
    auto nu = g.neighbors(u);
    for (VertexId w : nu)
      if (w != v) CHECK_FALSE(g.has_edge(w, v));
  }
  CHECK(g.num_edges() > 0);
}

TEST_CASE("sparsity examples") {
  CHECK(sparsity(gen(GraphModel::clique, 4), 0) == Rational::of(0, 1));
  CHECK(sparsity(gen(GraphModel::cycle, 5), 0) == Rational::of(1, 2));
  auto p4 = gen(GraphModel::path, 4);
  CHECK(sparsity(p4, 1) == Rational::of(1, 2));  // middle vertex
  // endpoint of the path: no neighbor pairs exist; C(2,2)=1 pair missing
  CHECK(sparsity(p4, 0) == Rational::of(1, 2));
  // star center: leaves are pairwise non-adjacent => maximum sparsity
  auto star = Graph::from_edges(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
  CHECK(sparsity(star, 0) == Rational::of(2, 1));  // (C(5,2)-0)/5 = 2
}

TEST_CASE("rational ordering is exact") {
  CHECK(Rational::of(1, 3) < Rational::of(1, 2));
  CHECK(Rational::of(2, 4) == Rational::of(1, 2));
  CHECK(Rational::of(-1, 2) < Rational::of(0, 1));
  CHECK(Rational::of(1, -2) == Rational::of(-1, 2));
  CHECK_THROWS(Rational::of(1, 0));
}

TEST_CASE("line graph examples") {
  // path a-b-c: two edges sharing b => L is a single edge
  auto lp = line_graph(gen(GraphModel::path, 3));
  CHECK(lp.num_vertices() == 2);
  CHECK(lp.num_edges() == 1);

  // triangle: L(K3) = K3
  auto lt = line_graph(gen(GraphModel::clique, 3));
  CHECK(lt.num_vertices() == 3);
  CHECK(lt.num_edges() == 3);

  // star K_{1,4}: all edges share the center => L = K4
  auto star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  auto ls = line_graph(star);
  CHECK(ls.num_vertices() == 4);
  CHECK(ls.num_edges() == 6);
}

TEST_CASE("line graph degree bound and sparsity bound") {
  auto g = gen(GraphModel::random_regular, 64, 0.0, 8);
  auto lg = line_graph(g);
  const VertexId delta = g.max_degree();
  CHECK(lg.max_degree() == 2 * (delta - 1));
  // every line-graph vertex is at least ((Delta_L)-2)/4 sparse
  const Rational bound = Rational::of(2 * (delta - 1) - 2, 4);
  for (VertexId e = 0; e < lg.num_vertices(); ++e) CHECK(bound <= sparsity(lg, e));
}

TEST_CASE("square graph examples and BFS oracle") {
  // path a-b-c squared = triangle
  auto sp = square_graph(gen(GraphModel::path, 3));
  CHECK(sp.num_edges() == 3);
  // C5 squared = K5
  auto sc = square_graph(gen(GraphModel::cycle, 5));
  CHECK(sc.num_edges() == 10);

  for (auto seed : {1, 2, 3}) {
    auto g = generate_graph(GraphModel::gnp, {.n = 40, .p = 0.08},
                            static_cast<std::uint64_t>(seed));
    auto sq = square_graph(g);
    auto oracle = square_by_bfs(g);
    CHECK(sq.edges() == oracle.edges());
  }
}

TEST_CASE("tetration") {
  CHECK(up_arrow(2, 0, 1000000) == 1);
  CHECK(up_arrow(2, 1, 1000000) == 2);
  CHECK(up_arrow(2, 2, 1000000) == 4);
  CHECK(up_arrow(2, 3, 1000000) == 16);
  CHECK(up_arrow(2, 4, 1000000) == 65536);
  CHECK(up_arrow(2, 5, 1000000) == 1000000);  // saturates at the cap
  CHECK(up_arrow(3, 2, 1000000) == 27);
  CHECK_THROWS(up_arrow(1, 3, 100));
}

TEST_CASE("log_star") {
  CHECK(log_star(1.0) == 0);
  CHECK(log_star(2.0) == 1);
  CHECK(log_star(4.0) == 2);
  CHECK(log_star(16.0) == 3);
  CHECK(log_star(65536.0) == 4);
  CHECK(log_star(1024.0) == 4);
}

TEST_CASE("save/load round-trip and loader validation") {
  auto g = generate_graph(GraphModel::gnp, {.n = 60, .p = 0.1}, 5);
  std::stringstream ss;
  save_graph(g, ss);
  auto h = load_graph(ss);
  CHECK(h.num_vertices() == g.num_vertices());
  CHECK(h.edges() == g.edges());

  std::stringstream bad1("3 1\n1 1\n");
  CHECK_THROWS_AS(load_graph(bad1), GraphError);
  std::stringstream bad2("3 2\n0 1\n");
  CHECK_THROWS_AS(load_graph(bad2), GraphError);
  std::stringstream bad3("junk");
  CHECK_THROWS_AS(load_graph(bad3), GraphError);
}

TEST_CASE("model names parse") {
  CHECK(parse_model("gnp") == GraphModel::gnp);
  CHECK(parse_model("random_regular") == GraphModel::random_regular);
  CHECK(parse_model("cycle") == GraphModel::cycle);
  CHECK_FALSE(parse_model("bogus").has_value());
}

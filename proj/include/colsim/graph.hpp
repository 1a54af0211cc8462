// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_GRAPH_HPP
#define COLSIM_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "colsim/rng.hpp"

namespace colsim {

using VertexId = std::uint32_t;
using Edge = std::pair<VertexId, VertexId>;  // canonical: first < second

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Immutable simple undirected graph. Vertex IDs are 0..n-1, adjacency
/// lists are sorted, edges are stored canonically (u < v) in
/// lexicographic order; the edge index doubles as the line-graph vertex ID.
class Graph {
public:
  static Graph from_edges(VertexId n, std::vector<Edge> edges) {
    for (auto& [u, v] : edges) {
      if (u == v) throw GraphError("self-loop");
      if (u > v) std::swap(u, v);
      if (v >= n) throw GraphError("vertex ID out of range");
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw GraphError("duplicate edge");
    Graph g;
    g.n_ = n;
    g.edges_ = std::move(edges);
    g.build_adjacency();
    return g;
  }

  VertexId num_vertices() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  VertexId max_degree() const { return max_degree_; }

  VertexId degree(VertexId v) const {
    check_vertex(v);
    return static_cast<VertexId>(offsets_[v + 1] - offsets_[v]);
  }

  std::span<const VertexId> neighbors(VertexId v) const {
    check_vertex(v);
    return {adj_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(VertexId u, VertexId v) const {
    if (u == v) return false;
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Index of canonical edge (min,max) in edges(); nullopt if absent.
  std::optional<std::size_t> edge_index(VertexId u, VertexId v) const {
    if (u > v) std::swap(u, v);
    const Edge e{u, v};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || *it != e) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
  }

  void check_vertex(VertexId v) const {
    if (v >= n_) throw GraphError("unknown vertex " + std::to_string(v));
  }

private:
  void build_adjacency() {
    offsets_.assign(n_ + 1, 0);
    for (const auto& [u, v] : edges_) {
      ++offsets_[u + 1];
      ++offsets_[v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adj_.resize(edges_.size() * 2);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [u, v] : edges_) {
      adj_[cursor[u]++] = v;
      adj_[cursor[v]++] = u;
    }
    max_degree_ = 0;
    for (VertexId v = 0; v < n_; ++v) {
      std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
                adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
      max_degree_ = std::max<VertexId>(max_degree_, degree(v));
    }
  }

  VertexId n_ = 0;
  VertexId max_degree_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<VertexId> adj_;
};

// ---------------------------------------------------------------------------
// Exact rational, for sparsity values.

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::invalid_argument("rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    return Rational{n, d};
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  // a < b  <=>  a.num*b.den < b.num*a.den (denominators positive).
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
};

/// Sparsity of v: (C(Delta,2) - |E[N(v)]|) / Delta, using the graph's
/// global maximum degree regardless of d(v).
inline Rational sparsity(const Graph& g, VertexId v) {
  g.check_vertex(v);
  const std::int64_t delta = g.max_degree();
  if (delta == 0) return Rational::of(0, 1);
  auto nb = g.neighbors(v);
  std::int64_t inside = 0;  // 2 * |E[N(v)]|
  for (VertexId u : nb) {
    auto nu = g.neighbors(u);
    // sorted-merge intersection count of N(u) with N(v)
    std::size_t i = 0, j = 0;
    while (i < nb.size() && j < nu.size()) {
      if (nb[i] < nu[j])
        ++i;
      else if (nu[j] < nb[i])
        ++j;
      else {
        ++inside;
        ++i;
        ++j;
      }
    }
  }
  const std::int64_t pairs = delta * (delta - 1) / 2;
  return Rational::of(pairs - inside / 2, delta);
}

inline Graph line_graph(const Graph& g) {
  if (g.num_vertices() == 0) throw GraphError("line_graph: empty graph");
  const auto& es = g.edges();
  const auto nl = static_cast<VertexId>(es.size());
  // Edges incident to a shared endpoint are pairwise adjacent in L(G).
  std::vector<std::vector<std::size_t>> at(g.num_vertices());
  for (std::size_t i = 0; i < es.size(); ++i) {
    at[es[i].first].push_back(i);
    at[es[i].second].push_back(i);
  }
  std::vector<Edge> le;
  for (const auto& bucket : at)
    for (std::size_t a = 0; a < bucket.size(); ++a)
      for (std::size_t b = a + 1; b < bucket.size(); ++b)
        le.emplace_back(static_cast<VertexId>(std::min(bucket[a], bucket[b])),
                        static_cast<VertexId>(std::max(bucket[a], bucket[b])));
  std::sort(le.begin(), le.end());
  le.erase(std::unique(le.begin(), le.end()), le.end());
  return Graph::from_edges(nl, std::move(le));
}

inline Graph square_graph(const Graph& g) {
  std::vector<Edge> se;
  std::vector<VertexId> reach;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    reach.clear();
    for (VertexId u : g.neighbors(v)) {
      reach.push_back(u);
      for (VertexId w : g.neighbors(u)) reach.push_back(w);
    }
    std::sort(reach.begin(), reach.end());
    reach.erase(std::unique(reach.begin(), reach.end()), reach.end());
    for (VertexId w : reach)
      if (w > v) se.emplace_back(v, w);
  }
  return Graph::from_edges(g.num_vertices(), std::move(se));
}

/// a ^^ b (tetration), saturating at `cap`.
inline std::uint64_t up_arrow(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  if (a < 2) throw std::invalid_argument("up_arrow: base must be >= 2");
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < b; ++i) {
    // r <- a^r, saturating
    std::uint64_t p = 1;
    for (std::uint64_t j = 0; j < r; ++j) {
      if (p > cap / a) return cap;
      p *= a;
      if (p >= cap) return cap;
    }
    r = p;
    if (r >= cap) return cap;
  }
  return std::min(r, cap);
}

/// Iterated log2: number of times log2 must be applied to n to reach <= 1.
inline int log_star(double n) {
  int c = 0;
  double x = n;
  while (x > 1.0) {
    x = std::log2(x);
    ++c;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Generators

enum class GraphModel { gnp, random_regular, triangle_free, clique, path, cycle };

struct GenParams {
  VertexId n = 0;
  double p = 0.0;       // gnp, triangle_free
  VertexId d = 0;       // random_regular
};

namespace detail {

inline std::vector<Edge> gnp_edges(VertexId n, double p, CounterRng& rng) {
  std::vector<Edge> edges;
  if (p <= 0.0) return edges;
  if (p >= 1.0) {
    for (VertexId u = 0; u < n; ++u)
      for (VertexId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return edges;
  }
  // Geometric skipping over the C(n,2) pair sequence.
  const double logq = std::log1p(-p);
  std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t idx = 0;
  while (true) {
    const double u = std::max(rng.unit(), 1e-300);
    idx += 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / logq));
    if (idx > total) break;
    // pair index -> (u, v)
    const std::uint64_t z = idx - 1;
    const double nd = static_cast<double>(n);
    auto row = static_cast<std::uint64_t>(
        nd - 0.5 - std::sqrt((nd - 0.5) * (nd - 0.5) - 2.0 * static_cast<double>(z)));
    while (row * n - row * (row + 1) / 2 > z) --row;
    while ((row + 1) * n - (row + 1) * (row + 2) / 2 <= z) ++row;
    const std::uint64_t col = z - (row * n - row * (row + 1) / 2) + row + 1;
    edges.emplace_back(static_cast<VertexId>(row), static_cast<VertexId>(col));
  }
  return edges;
}

inline Graph random_regular(VertexId n, VertexId d, CounterRng& rng) {
  if (d >= n) throw GraphError("random_regular: d >= n");
  if ((static_cast<std::uint64_t>(n) * d) % 2 != 0)
    throw GraphError("random_regular: n*d must be even");
  // Configuration model with pair rejection, restarting on a stuck tail.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<VertexId> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * d);
    for (VertexId v = 0; v < n; ++v)
      for (VertexId j = 0; j < d; ++j) stubs.push_back(v);
    // Fisher-Yates
    for (std::size_t i = stubs.size() - 1; i > 0; --i)
      std::swap(stubs[i], stubs[rng.below(i + 1)]);
    std::vector<Edge> edges;
    edges.reserve(stubs.size() / 2);
    bool ok = true;
    std::vector<std::vector<VertexId>> adj(n);
    for (std::size_t i = 0; i + 1 < stubs.size() && ok; i += 2) {
      VertexId a = stubs[i], b = stubs[i + 1];
      if (a == b ||
          std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end()) {
        // Try to repair by swapping with a random later stub.
        bool fixed = false;
        for (int tries = 0; tries < 200; ++tries) {
          const std::size_t j = i + 2 + rng.below(stubs.size() - i - 2 + 1);
          if (j >= stubs.size()) continue;
          std::swap(stubs[i + 1], stubs[j]);
          b = stubs[i + 1];
          if (a != b && std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) {
            fixed = true;
            break;
          }
        }
        if (!fixed) {
          ok = false;
          break;
        }
      }
      adj[a].push_back(b);
      adj[b].push_back(a);
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    if (ok) return Graph::from_edges(n, std::move(edges));
  }
  throw GraphError("random_regular: failed to realize degree sequence");
}

// G(n,p) followed by removing one edge per triangle found, to fixpoint.
// A test-instance heuristic, not a uniform sampler of triangle-free graphs.
inline Graph triangle_free(VertexId n, double p, CounterRng& rng) {
  auto edges = gnp_edges(n, p, rng);
  std::vector<std::vector<VertexId>> adj(n);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  auto remove_edge = [&](VertexId u, VertexId v) {
    auto& au = adj[u];
    auto& av = adj[v];
    au.erase(std::lower_bound(au.begin(), au.end(), v));
    av.erase(std::lower_bound(av.begin(), av.end(), u));
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (VertexId u = 0; u < n; ++u) {
      for (std::size_t i = 0; i < adj[u].size(); ++i) {
        const VertexId v = adj[u][i];
        if (v < u) continue;
        // common neighbor w => triangle u-v-w; drop (u,v)
        const auto& av = adj[v];
        std::size_t a = 0, b = 0;
        bool tri = false;
        while (a < adj[u].size() && b < av.size()) {
          if (adj[u][a] < av[b])
            ++a;
          else if (av[b] < adj[u][a])
            ++b;
          else {
            tri = true;
            break;
          }
        }
        if (tri) {
          remove_edge(u, v);
          changed = true;
          --i;
        }
      }
    }
  }
  std::vector<Edge> out;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v : adj[u])
      if (u < v) out.emplace_back(u, v);
  return Graph::from_edges(n, std::move(out));
}

}  // namespace detail

inline Graph generate_graph(GraphModel model, const GenParams& params, std::uint64_t seed) {
  const VertexId n = params.n;
  if (n == 0) throw GraphError("generate_graph: n must be positive");
  CounterRng rng(seed, 0xC01517EDULL);
  switch (model) {
    case GraphModel::gnp: {
      if (params.p < 0.0 || params.p > 1.0) throw GraphError("gnp: p out of [0,1]");
      return Graph::from_edges(n, detail::gnp_edges(n, params.p, rng));
    }
    case GraphModel::random_regular:
      return detail::random_regular(n, params.d, rng);
    case GraphModel::triangle_free: {
      if (params.p < 0.0 || params.p > 1.0) throw GraphError("triangle_free: p out of [0,1]");
      return detail::triangle_free(n, params.p, rng);
    }
    case GraphModel::clique: {
      std::vector<Edge> edges;
      for (VertexId u = 0; u < n; ++u)
        for (VertexId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
      return Graph::from_edges(n, std::move(edges));
    }
    case GraphModel::path: {
      std::vector<Edge> edges;
      for (VertexId v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
      return Graph::from_edges(n, std::move(edges));
    }
    case GraphModel::cycle: {
      if (n < 3) throw GraphError("cycle: n must be >= 3");
      std::vector<Edge> edges;
      for (VertexId v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
      edges.emplace_back(0, n - 1);
      return Graph::from_edges(n, std::move(edges));
    }
  }
  throw GraphError("generate_graph: unknown model");
}

inline std::optional<GraphModel> parse_model(const std::string& s) {
  if (s == "gnp") return GraphModel::gnp;
  if (s == "random_regular") return GraphModel::random_regular;
  if (s == "triangle_free") return GraphModel::triangle_free;
  if (s == "clique") return GraphModel::clique;
  if (s == "path") return GraphModel::path;
  if (s == "cycle") return GraphModel::cycle;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text format: first line "n m", then m lines "u v" with 0-based u < v.

inline void save_graph(const Graph& g, std::ostream& out) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

inline Graph load_graph(std::istream& in) {
  VertexId n = 0;
  std::size_t m = 0;
  if (!(in >> n >> m)) throw GraphError("graph file: bad header");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    VertexId u, v;
    if (!(in >> u >> v)) throw GraphError("graph file: truncated edge list");
    if (u >= v) throw GraphError("graph file: edges must satisfy u < v");
    edges.emplace_back(u, v);
  }
  return Graph::from_edges(n, std::move(edges));
}

}  // namespace colsim

#endif  // COLSIM_GRAPH_HPP

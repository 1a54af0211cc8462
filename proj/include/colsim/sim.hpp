// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_SIM_HPP
#define COLSIM_SIM_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "colsim/bits.hpp"
#include "colsim/graph.hpp"
#include "colsim/rng.hpp"

namespace colsim {

struct BudgetViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  int bandwidth_bits = 0;   // B, per edge-direction per round
  int round_cap = 1 << 20;
  std::uint64_t master_seed = 0;
};

/// Default bandwidth: the defining CONGEST budget ceil(log2 n).
inline int default_bandwidth(VertexId n) { return std::max(1, ceil_log2(n)); }

struct TrajectoryPoint {
  std::uint64_t round = 0;
  std::uint64_t uncolored = 0;
  std::uint64_t max_d_star = 0;
  int max_bits = 0;
  std::string phase;
};

struct PhaseSpan {
  std::string label;
  std::uint64_t first_round = 0;
  std::uint64_t last_round = 0;  // inclusive
};

struct RunReport {
  std::uint64_t rounds_used = 0;
  int max_bits_per_edge_round = 0;
  std::uint64_t total_messages = 0;
  bool timed_out = false;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<PhaseSpan> phases;
};

namespace detail {
constexpr std::uint16_t kNoFrame = std::numeric_limits<std::uint16_t>::max();
}

/// Per-round interface handed to a node program. Programs see only
/// their own state, their private RNG stream, and the frames on their
/// ports; they have no access to the graph or to other programs.
class RoundIO {
public:
  RoundIO(std::uint64_t round, int bandwidth, std::uint32_t degree, CounterRng* rng,
          const Frame* inbox, Frame* outbox, int* max_bits, std::uint64_t* msg_count)
      : round_(round),
        bandwidth_(bandwidth),
        degree_(degree),
        rng_(rng),
        inbox_(inbox),
        outbox_(outbox),
        max_bits_(max_bits),
        msg_count_(msg_count) {}

  std::uint64_t round() const { return round_; }
  int bandwidth() const { return bandwidth_; }
  std::uint32_t degree() const { return degree_; }
  CounterRng& rng() { return *rng_; }

  /// Frame received on `port` this round (sent by the neighbor last
  /// round), or nullptr.
  const Frame* in(std::uint32_t port) const {
    const Frame& f = inbox_[port];
    return f.bit_len == detail::kNoFrame ? nullptr : &f;
  }

  /// Sends one frame on `port`; at most one per port per round.
  void send(std::uint32_t port, Frame f) {
    if (f.bit_len > bandwidth_)
      throw BudgetViolation("frame of " + std::to_string(f.bit_len) +
                            " bits exceeds bandwidth " + std::to_string(bandwidth_));
    if (outbox_[port].bit_len != detail::kNoFrame)
      throw BudgetViolation("two frames on one port in one round");
    outbox_[port] = f;
    *max_bits_ = std::max(*max_bits_, static_cast<int>(f.bit_len));
    ++*msg_count_;
  }

private:
  std::uint64_t round_;
  int bandwidth_;
  std::uint32_t degree_;
  CounterRng* rng_;
  const Frame* inbox_;
  Frame* outbox_;
  int* max_bits_;
  std::uint64_t* msg_count_;
};

template <class Program>
struct SimResult {
  RunReport report;
  std::vector<Program> nodes;
};

/// Synchronous-round engine. Each round: frames sent last round are
/// delivered, every program takes one step, outgoing frames are
/// collected under the bit budget. Stops when every program reports
/// finished, or at cfg.round_cap (timeout verdict in the report).
///
/// `factory(id, degree)` builds one program per vertex.
/// `observer(round, nodes, point)` may fill the uncolored/max_d_star/
/// phase fields of the per-round trajectory point.
template <class Program, class Factory, class Observer>
SimResult<Program> run_sim(const Graph& g, Factory&& factory, const SimConfig& cfg,
                           Observer&& observer) {
  const VertexId n = g.num_vertices();
  if (cfg.bandwidth_bits < 1 || cfg.bandwidth_bits > 64)
    throw std::invalid_argument("bandwidth_bits must be in [1,64]");
  if (cfg.bandwidth_bits < default_bandwidth(n))
    throw std::invalid_argument("bandwidth below ceil(log2 n)");
  if (cfg.round_cap < 1) throw std::invalid_argument("round_cap must be >= 1");

  // CSR arc layout: arc (v, port j) has id offset(v)+j; rev_arc maps it
  // to the opposite direction's id for delivery.
  std::vector<std::size_t> offset(n + 1, 0);
  for (VertexId v = 0; v < n; ++v) offset[v + 1] = offset[v] + g.degree(v);
  const std::size_t arcs = offset[n];
  std::vector<std::size_t> rev_arc(arcs);
  for (VertexId v = 0; v < n; ++v) {
    auto nb = g.neighbors(v);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const VertexId u = nb[j];
      auto un = g.neighbors(u);
      const std::size_t jv = static_cast<std::size_t>(
          std::lower_bound(un.begin(), un.end(), v) - un.begin());
      rev_arc[offset[v] + j] = offset[u] + jv;
    }
  }

  SimResult<Program> result;
  result.nodes.reserve(n);
  std::vector<CounterRng> rngs;
  rngs.reserve(n);
  for (VertexId v = 0; v < n; ++v) {
    result.nodes.push_back(factory(v, g.degree(v)));
    rngs.emplace_back(cfg.master_seed, v);
  }

  std::vector<Frame> prev(arcs), cur(arcs);
  auto clear_frames = [](std::vector<Frame>& fs) {
    for (Frame& f : fs) f.bit_len = detail::kNoFrame;
  };
  clear_frames(prev);  // round 0: empty inboxes

  // Inbox view for v: frames indexed by v's ports, gathered from rev arcs.
  std::vector<Frame> inbox_scratch;
  RunReport& rep = result.report;

  for (int r = 0;; ++r) {
    clear_frames(cur);
    int round_max_bits = 0;
    for (VertexId v = 0; v < n; ++v) {
      const std::uint32_t deg = g.degree(v);
      inbox_scratch.resize(deg);
      for (std::uint32_t j = 0; j < deg; ++j)
        inbox_scratch[j] = prev[rev_arc[offset[v] + j]];
      rngs[v].set_round(static_cast<std::uint64_t>(r));
      RoundIO io(static_cast<std::uint64_t>(r), cfg.bandwidth_bits, deg, &rngs[v],
                 inbox_scratch.data(), cur.data() + offset[v], &round_max_bits,
                 &rep.total_messages);
      result.nodes[v].step(io);
    }
    rep.rounds_used = static_cast<std::uint64_t>(r) + 1;
    rep.max_bits_per_edge_round = std::max(rep.max_bits_per_edge_round, round_max_bits);

    TrajectoryPoint pt;
    pt.round = static_cast<std::uint64_t>(r);
    pt.max_bits = round_max_bits;
    observer(static_cast<std::uint64_t>(r), result.nodes, pt);
    rep.trajectory.push_back(std::move(pt));

    bool all_done = true;
    for (const Program& p : result.nodes)
      if (!p.finished()) {
        all_done = false;
        break;
      }
    if (all_done) break;
    if (r + 1 >= cfg.round_cap) {
      rep.timed_out = true;
      break;
    }
    std::swap(prev, cur);
  }
  return result;
}

template <class Program, class Factory>
SimResult<Program> run_sim(const Graph& g, Factory&& factory, const SimConfig& cfg) {
  return run_sim<Program>(g, std::forward<Factory>(factory), cfg,
                          [](std::uint64_t, const std::vector<Program>&, TrajectoryPoint&) {});
}

}  // namespace colsim

#endif  // COLSIM_SIM_HPP

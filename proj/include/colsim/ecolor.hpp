// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_ECOLOR_HPP
#define COLSIM_ECOLOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "colsim/bits.hpp"
#include "colsim/graph.hpp"
#include "colsim/phased.hpp"
#include "colsim/repset.hpp"
#include "colsim/schedule.hpp"
#include "colsim/sim.hpp"
#include "colsim/vcolor.hpp"

namespace colsim {

/// One approximately-uniform draw from psi (a palette mask over [k]):
/// sample a family set, intersect, pick uniformly from the intersection.
/// Empty intersection yields nullopt (retry on the next call).
inline std::optional<std::uint32_t> uniform_palette_pick(const RepFamily& f,
                                                         const BitVec& psi,
                                                         CounterRng& rng) {
  const std::uint64_t i = rng.below(f.params().t);
  BitVec m = f.set_mask(i);
  m.and_with(psi);
  const std::size_t sz = m.count();
  if (sz == 0) return std::nullopt;
  return static_cast<std::uint32_t>(m.nth_set(rng.below(sz)));
}

/// Shared constants for an edge-coloring run. Each edge's protocol is
/// led by its higher-ID endpoint; roles are fixed by an initial ID
/// exchange.
struct EdgeShared {
  std::uint32_t n = 0;
  std::uint32_t delta = 0;
  std::uint64_t palette = 1;
  std::shared_ptr<const RepFamily> family;
  int bits_t = 1;
  int bits_color = 1;
  int bits_id = 1;
  std::vector<ColorOp> prefix;

  ColorOp op(std::size_t idx) const {
    if (idx < prefix.size()) return prefix[idx];
    return ColorOp{ColorOp::Kind::multitrials, 1, "fallback"};
  }

  int op_rounds(const ColorOp& op, int B) const {
    if (op.kind == ColorOp::Kind::single_try) return ceil_div(bits_color, B) + 1;
    const int sm = ceil_div(static_cast<int>(family->params().s), B);
    return ceil_div(bits_t, B) + 4 * sm;
  }
};

/// Per-vertex endpoint program. Sub-phases of one multi-trial op:
///   E1 leader -> follower : family index
///   E2 follower -> leader : s-bit mask of S cap psi_follower
///   E3 leader -> follower : s-bit mask of S cap psi_leader
///   E4 leader -> follower : s-bit trial mask X (subset of S cap psi_e)
///   E5 both directions    : s-bit mask of trial colors unique at sender
/// Both endpoints then hold both unique-masks, so each computes the
/// adoption (smallest surviving color) symmetrically.
/// A single-color try op (slack generation, first op only) is:
///   T1 leader -> follower : color value, uniform over the full palette
///   T2 both directions    : 1-bit "unique at my end" flag
class EdgeProgram : public PhasedProgram<EdgeProgram> {
public:
  EdgeProgram(VertexId id, std::uint32_t degree, const EdgeShared* shared)
      : PhasedProgram(degree),
        id_(id),
        shared_(shared),
        psi_(shared->palette),
        uncolored_(degree),
        nbr_id_(degree, 0),
        leader_(degree, 0),
        ecolor_(degree, kNoColor),
        i_e_(degree, 0),
        own_mask_(degree),
        peer_mask_(degree),
        inter_(degree),
        x_mask_(degree),
        my_uniq_(degree),
        try_color_(degree, kNoColor),
        my_ok_(degree, 0),
        color_count_(shared->palette, 0) {
    for (std::size_t c = 0; c < psi_.size(); ++c) psi_.set(c);
    if (degree == 0) finished_ = true;
  }

  void begin_subphase(RoundIO& io) {
    if (!ids_sent_) {
      ids_sent_ = true;
      start_subphase(shared_->bits_id, io);
      BitVec pl;
      pl.append_bits(id_, shared_->bits_id);
      queue_broadcast(io, pl);
      return;
    }
    const ColorOp op = shared_->op(op_idx_);
    if (op.kind == ColorOp::Kind::single_try) {
      sub_ == 0 ? begin_t1(io) : begin_t2(io);
    } else {
      switch (sub_) {
        case 0: begin_e1(io); break;
        case 1: begin_e2(io); break;
        case 2: begin_e3(io); break;
        case 3: begin_e4(io, op.x); break;
        default: begin_e5(io); break;
      }
    }
  }

  void end_subphase(RoundIO& io) {
    if (!ids_done_) {
      ids_done_ = true;
      for (std::uint32_t p = 0; p < io.degree(); ++p) {
        const BitVec* rx = received(p);
        nbr_id_[p] = static_cast<VertexId>(rx->get_bits(0, shared_->bits_id));
        leader_[p] = id_ > nbr_id_[p];
      }
      return;
    }
    const ColorOp op = shared_->op(op_idx_);
    const int subs = op.kind == ColorOp::Kind::single_try ? 2 : 5;
    if (op.kind == ColorOp::Kind::single_try) {
      sub_ == 0 ? end_t1(io) : end_t2(io);
    } else {
      switch (sub_) {
        case 0: end_e1(io); break;
        case 1: end_e2(io); break;
        case 2: end_e3(io); break;
        case 3: end_e4(io); break;
        default: end_e5(io); break;
      }
    }
    if (++sub_ >= subs) {
      sub_ = 0;
      ++op_idx_;
    }
  }

  std::uint32_t edge_color(std::uint32_t port) const { return ecolor_[port]; }
  bool is_leader(std::uint32_t port) const { return leader_[port] != 0; }
  std::uint32_t uncolored_ports() const { return uncolored_; }
  const BitVec& psi() const { return psi_; }
  VertexId id() const { return id_; }

private:
  bool active(std::uint32_t p) const { return ecolor_[p] == kNoColor; }

  BitVec sample_mask(std::uint64_t i) const {
    const auto& S = shared_->family->set(i);
    BitVec m(S.size());
    for (std::size_t pos = 0; pos < S.size(); ++pos)
      if (psi_.get(S[pos])) m.set(pos);
    return m;
  }

  void begin_t1(RoundIO& io) {
    start_subphase(shared_->bits_color, io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      try_color_[p] = kNoColor;
      if (!active(p) || !leader_[p]) continue;
      // First op only: both endpoints still hold the full palette.
      try_color_[p] = static_cast<std::uint32_t>(io.rng().below(shared_->palette));
      BitVec pl;
      pl.append_bits(try_color_[p], shared_->bits_color);
      queue_payload(p, pl);
    }
  }

  void end_t1(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (leader_[p]) continue;
      if (const BitVec* rx = received(p))
        try_color_[p] = static_cast<std::uint32_t>(rx->get_bits(0, shared_->bits_color));
    }
  }

  void begin_t2(RoundIO& io) {
    start_subphase(1, io);
    count_colors_of([&](std::uint32_t p) { return try_color_[p]; }, io.degree());
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      my_ok_[p] = 0;
      const std::uint32_t c = try_color_[p];
      if (!active(p) || c == kNoColor) continue;
      my_ok_[p] = color_count_[c] == 1 && psi_.get(c);
      BitVec pl;
      pl.append_bits(my_ok_[p], 1);
      queue_payload(p, pl);
    }
  }

  void end_t2(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!active(p) || try_color_[p] == kNoColor || !my_ok_[p]) continue;
      const BitVec* rx = received(p);
      if (rx && rx->get_bits(0, 1) == 1) adopt(p, try_color_[p]);
    }
    if (uncolored_ == 0) finished_ = true;
  }

  void begin_e1(RoundIO& io) {
    start_subphase(shared_->bits_t, io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!active(p) || !leader_[p]) continue;
      i_e_[p] = io.rng().below(shared_->family->params().t);
      BitVec pl;
      pl.append_bits(i_e_[p], shared_->bits_t);
      queue_payload(p, pl);
    }
  }

  void end_e1(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (!leader_[p])
        if (const BitVec* rx = received(p)) i_e_[p] = rx->get_bits(0, shared_->bits_t);
  }

  void begin_e2(RoundIO& io) {
    const int s = static_cast<int>(shared_->family->params().s);
    start_subphase(s, io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!active(p) || leader_[p]) continue;
      own_mask_[p] = sample_mask(i_e_[p]);
      queue_payload(p, own_mask_[p]);
    }
  }

  void end_e2(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (leader_[p] && active(p))
        if (const BitVec* rx = received(p)) peer_mask_[p] = *rx;
  }

  void begin_e3(RoundIO& io) {
    const int s = static_cast<int>(shared_->family->params().s);
    start_subphase(s, io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!active(p) || !leader_[p]) continue;
      own_mask_[p] = sample_mask(i_e_[p]);
      inter_[p] = own_mask_[p];
      inter_[p].and_with(peer_mask_[p]);
      queue_payload(p, own_mask_[p]);
    }
  }

  void end_e3(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (leader_[p] || !active(p)) continue;
      if (const BitVec* rx = received(p)) {
        inter_[p] = own_mask_[p];
        inter_[p].and_with(*rx);
      }
    }
  }

  void begin_e4(RoundIO& io, std::uint32_t x) {
    const int s = static_cast<int>(shared_->family->params().s);
    start_subphase(s, io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      x_mask_[p] = BitVec(static_cast<std::size_t>(s));
      if (!active(p) || !leader_[p]) continue;
      scratch_.clear();
      scan_set_bits(inter_[p], 0, static_cast<std::size_t>(s),
                    [&](std::size_t pos) { scratch_.push_back(static_cast<std::uint32_t>(pos)); });
      const std::uint64_t xx = std::min<std::uint64_t>(x, scratch_.size());
      if (xx == 0) continue;
      for (std::uint32_t j : io.rng().sample_subset(scratch_.size(), xx))
        x_mask_[p].set(scratch_[j]);
      queue_payload(p, x_mask_[p]);
    }
  }

  void end_e4(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (!leader_[p] && active(p))
        if (const BitVec* rx = received(p)) x_mask_[p] = *rx;
  }

  void begin_e5(RoundIO& io) {
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    start_subphase(static_cast<int>(s), io);
    count_trial_colors(io.degree());
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      my_uniq_[p] = BitVec(s);
      if (!active(p) || x_mask_[p].count() == 0) continue;
      const auto& S = shared_->family->set(i_e_[p]);
      scan_set_bits(x_mask_[p], 0, s, [&](std::size_t pos) {
        if (color_count_[S[pos]] == 1) my_uniq_[p].set(pos);
      });
      queue_payload(p, my_uniq_[p]);
    }
  }

  void end_e5(RoundIO& io) {
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!active(p) || x_mask_[p].count() == 0) continue;
      const BitVec* rx = received(p);
      if (!rx) continue;
      BitVec surv = x_mask_[p];
      surv.and_with(my_uniq_[p]);
      surv.and_with(*rx);
      if (surv.count() == 0) continue;
      const std::size_t pos = surv.nth_set(0);
      adopt(p, shared_->family->set(i_e_[p])[pos]);
    }
    if (uncolored_ == 0) finished_ = true;
  }

  // Multiplicity of each trial color over this endpoint's active edges
  // (a color is unique here iff its count is exactly 1).
  void count_trial_colors(std::uint32_t degree) {
    clear_counts();
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    for (std::uint32_t p = 0; p < degree; ++p) {
      if (!active(p) || x_mask_[p].count() == 0) continue;
      const auto& S = shared_->family->set(i_e_[p]);
      scan_set_bits(x_mask_[p], 0, s, [&](std::size_t pos) {
        if (color_count_[S[pos]]++ == 0) touched_.push_back(S[pos]);
      });
    }
  }

  template <class ColorOf>
  void count_colors_of(ColorOf&& color_of, std::uint32_t degree) {
    clear_counts();
    for (std::uint32_t p = 0; p < degree; ++p) {
      if (!active(p)) continue;
      const std::uint32_t c = color_of(p);
      if (c == kNoColor) continue;
      if (color_count_[c]++ == 0) touched_.push_back(c);
    }
  }

  void clear_counts() {
    for (std::uint32_t c : touched_) color_count_[c] = 0;
    touched_.clear();
  }

  void adopt(std::uint32_t port, std::uint32_t c) {
    ecolor_[port] = c;
    if (psi_.get(c)) psi_.set(c, false);
    --uncolored_;
  }

  VertexId id_;
  const EdgeShared* shared_;
  BitVec psi_;
  std::uint32_t uncolored_;
  std::size_t op_idx_ = 0;
  int sub_ = 0;
  bool ids_sent_ = false;
  bool ids_done_ = false;

  std::vector<VertexId> nbr_id_;
  std::vector<std::uint8_t> leader_;
  std::vector<std::uint32_t> ecolor_;
  std::vector<std::uint64_t> i_e_;
  std::vector<BitVec> own_mask_, peer_mask_, inter_, x_mask_, my_uniq_;
  std::vector<std::uint32_t> try_color_;
  std::vector<std::uint8_t> my_ok_;
  std::vector<std::uint16_t> color_count_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t> scratch_;
};

// ---------------------------------------------------------------------------
// Drivers

struct EColorOptions {
  double eps = 1.0;
  double c_c = 8.0;
  int reps_a = 4;
  int reps_b = 4;
  double nu = 0.0;        // 0 -> n^-3
  double eps_eff = 0.0;   // (2*Delta-1) pipeline; 0 -> 1/(32 e^3)
  int t_eps = 0;          // nibble iterations; 0 -> ceil(4/eps)
  bool exact_fraction = false;  // nibble marking: exact-count instead of Bernoulli
  int round_cap = 0;
  int bandwidth_mult = 1;
  std::uint64_t seed = 1;
};

struct EColorResult {
  std::vector<std::uint32_t> colors;  // per canonical edge; kNoColor if uncolored
  std::uint64_t palette = 0;
  RunReport report;
  bool family_clamped = false;
  std::uint64_t prefix_rounds = 0;
};

namespace detail {

inline std::uint32_t port_of(const Graph& g, VertexId u, VertexId v) {
  auto nb = g.neighbors(u);
  return static_cast<std::uint32_t>(std::lower_bound(nb.begin(), nb.end(), v) - nb.begin());
}

template <class Prog>
std::vector<std::uint32_t> collect_edge_colors(const Graph& g, const std::vector<Prog>& nodes) {
  std::vector<std::uint32_t> colors;
  colors.reserve(g.num_edges());
  for (const auto& [u, v] : g.edges()) {
    const std::uint32_t cu = nodes[u].edge_color(port_of(g, u, v));
    const std::uint32_t cv = nodes[v].edge_color(port_of(g, v, u));
    if (cu != cv) throw std::logic_error("endpoint color views diverged");
    colors.push_back(cu);
  }
  return colors;
}

template <class Prog>
void observe_edges(const Graph& g, const std::vector<Prog>& nodes, TrajectoryPoint& pt) {
  std::uint64_t unc2 = 0, maxd = 0;
  for (const auto& nd : nodes) unc2 += nd.uncolored_ports();
  pt.uncolored = unc2 / 2;
  if (pt.uncolored > 0) {
    for (const auto& [u, v] : g.edges()) {
      if (nodes[u].edge_color(port_of(g, u, v)) != kNoColor) continue;
      maxd = std::max<std::uint64_t>(
          maxd, nodes[u].uncolored_ports() + nodes[v].uncolored_ports() - 2);
    }
  }
  pt.max_d_star = maxd;
}

inline std::vector<PhaseSpan> edge_phases(const EdgeShared& sh, int B,
                                          std::uint64_t rounds_used,
                                          std::uint64_t* prefix_rounds) {
  std::vector<PhaseSpan> spans;
  std::uint64_t r = 0;
  const auto idr = static_cast<std::uint64_t>(ceil_div(sh.bits_id, B));
  if (rounds_used > 0) {
    spans.push_back({"id_exchange", 0, std::min(idr - 1, rounds_used - 1)});
    r = idr;
  }
  for (const auto& op : sh.prefix) {
    const auto d = static_cast<std::uint64_t>(sh.op_rounds(op, B));
    if (r >= rounds_used) break;
    if (!spans.empty() && spans.back().label == op.label)
      spans.back().last_round = std::min(r + d - 1, rounds_used - 1);
    else
      spans.push_back({op.label, r, std::min(r + d - 1, rounds_used - 1)});
    r += d;
  }
  *prefix_rounds = std::min(r, rounds_used);
  if (r < rounds_used) spans.push_back({"fallback", r, rounds_used - 1});
  return spans;
}

/// Common pipeline: optional slack round, two-stage schedule, fallback.
inline EColorResult run_edge_pipeline(const Graph& g, std::uint64_t palette,
                                      double slack_scale, bool slack_round,
                                      const EColorOptions& opts) {
  const std::uint32_t n = g.num_vertices();
  const std::uint32_t delta = g.max_degree();
  const double ratio = delta > 0 ? static_cast<double>(palette) / delta : 1.0;
  const double nu =
      opts.nu > 0.0 ? opts.nu : std::pow(static_cast<double>(std::max(2u, n)), -3.0);
  const double fam_delta = std::min(0.9, std::max(1e-9, slack_scale / (4.0 * ratio * std::max(1u, delta))));

  EdgeShared sh;
  sh.n = n;
  sh.delta = delta;
  sh.palette = std::max<std::uint64_t>(1, palette);
  const auto params = family_params_clamped(sh.palette, 0.5, fam_delta, nu);
  sh.family = std::make_shared<const RepFamily>(
      RepFamily::implicit(params, opts.seed ^ 0xEDC0109FULL));
  sh.bits_t = ceil_log2(params.t);
  sh.bits_color = ceil_log2(sh.palette);
  sh.bits_id = ceil_log2(std::max<std::uint32_t>(2, n));
  if (delta > 0) {
    ScheduleParams sp;
    sp.x_max = static_cast<std::uint32_t>(std::max(1.0, std::floor(slack_scale / (2.0 * ratio))));
    sp.slack_scale = slack_scale;
    sp.palette_ratio = ratio;
    sp.c_c = opts.c_c;
    sp.log2n = std::log2(std::max<std::uint32_t>(2, n));
    sp.log_star_n = log_star(n);
    sp.reps_a = opts.reps_a;
    sp.reps_b = opts.reps_b;
    sp.slack_round = slack_round;
    sh.prefix = build_schedule(sp);
  }

  SimConfig cfg;
  cfg.bandwidth_bits = std::min(64, default_bandwidth(n) * std::max(1, opts.bandwidth_mult));
  cfg.master_seed = opts.seed;
  std::uint64_t sched = ceil_div(sh.bits_id, cfg.bandwidth_bits);
  for (const auto& op : sh.prefix)
    sched += static_cast<std::uint64_t>(sh.op_rounds(op, cfg.bandwidth_bits));
  cfg.round_cap = opts.round_cap > 0 ? opts.round_cap : static_cast<int>(sched) + 20000;

  auto result = run_sim<EdgeProgram>(
      g,
      [&](VertexId id, std::uint32_t degree) { return EdgeProgram(id, degree, &sh); },
      cfg,
      [&](std::uint64_t, const std::vector<EdgeProgram>& nodes, TrajectoryPoint& pt) {
        observe_edges(g, nodes, pt);
      });

  EColorResult out;
  out.palette = sh.palette;
  out.family_clamped = params.clamped;
  out.report = std::move(result.report);
  out.report.phases =
      edge_phases(sh, cfg.bandwidth_bits, out.report.rounds_used, &out.prefix_rounds);
  out.colors = collect_edge_colors(g, result.nodes);
  return out;
}

}  // namespace detail

/// (2+eps)Delta-edge coloring: the two-stage schedule straight away
/// (palette slack is structural).
inline EColorResult color_edges_2plus(const Graph& g, const EColorOptions& opts) {
  const std::uint32_t delta = g.max_degree();
  const auto palette = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil((2.0 + opts.eps) * delta)));
  return detail::run_edge_pipeline(g, palette, opts.eps * delta, false, opts);
}

/// (2*Delta-1)-edge coloring: one uniform single-color round generates
/// slack proportional to the line graph's sparsity, then the pipeline
/// runs with that measured-scale slack.
inline EColorResult color_edges_2delta_minus1(const Graph& g, const EColorOptions& opts) {
  const std::uint32_t delta = g.max_degree();
  const std::uint64_t palette = delta > 0 ? 2 * static_cast<std::uint64_t>(delta) - 1 : 1;
  const double eps_eff = opts.eps_eff > 0.0 ? opts.eps_eff : 1.0 / (32.0 * std::exp(3.0));
  const double delta_line = delta > 1 ? 2.0 * delta - 2.0 : 1.0;
  return detail::run_edge_pipeline(g, palette, eps_eff * delta_line, true, opts);
}

// ---------------------------------------------------------------------------
// Nibble phase

struct NibbleShared {
  std::uint32_t n = 0;
  std::uint32_t delta = 0;
  std::uint64_t palette = 1;
  std::shared_ptr<const RepFamily> family;
  int bits_t = 1;
  int bits_color = 1;
  int bits_id = 1;
  int t_eps = 1;
  double mark_prob = 0.0;
  bool exact_fraction = false;
};

/// One nibble iteration, per edge:
///   N1 both directions    : 1-bit mark flag; selected iff either marked
///   N2 leader -> follower : family index
///   N3 follower -> leader : s-bit mask of S cap psi_follower
///   N4 leader -> follower : tentative color, uniform over S cap psi_e
///   N5 both directions    : 1-bit "no duplicate tentative at my end"
/// An edge keeps its tentative color iff both flags are set.
class NibbleProgram : public PhasedProgram<NibbleProgram> {
public:
  NibbleProgram(VertexId id, std::uint32_t degree, const NibbleShared* shared)
      : PhasedProgram(degree),
        id_(id),
        shared_(shared),
        psi_(shared->palette),
        uncolored_(degree),
        nbr_id_(degree, 0),
        leader_(degree, 0),
        ecolor_(degree, kNoColor),
        i_e_(degree, 0),
        my_mark_(degree, 0),
        selected_(degree, 0),
        tent_(degree, kNoColor),
        my_ok_(degree, 0),
        peer_ok_(degree),
        color_count_(shared->palette, 0) {
    for (std::size_t c = 0; c < psi_.size(); ++c) psi_.set(c);
    if (degree == 0) finished_ = true;
  }

  void begin_subphase(RoundIO& io) {
    if (!ids_sent_) {
      ids_sent_ = true;
      start_subphase(shared_->bits_id, io);
      BitVec pl;
      pl.append_bits(id_, shared_->bits_id);
      queue_broadcast(io, pl);
      return;
    }
    if (iter_ >= shared_->t_eps) {
      start_subphase(1, io);  // trailing silent sub-phase; final N5 was processed
      return;
    }
    switch (sub_) {
      case 0: begin_n1(io); break;
      case 1: begin_n2(io); break;
      case 2: begin_n3(io); break;
      case 3: begin_n4(io); break;
      default: begin_n5(io); break;
    }
  }

  void end_subphase(RoundIO& io) {
    if (!ids_done_) {
      ids_done_ = true;
      for (std::uint32_t p = 0; p < io.degree(); ++p) {
        const BitVec* rx = received(p);
        nbr_id_[p] = static_cast<VertexId>(rx->get_bits(0, shared_->bits_id));
        leader_[p] = id_ > nbr_id_[p];
      }
      return;
    }
    if (iter_ >= shared_->t_eps) return;
    switch (sub_) {
      case 0: end_n1(io); break;
      case 1: end_n2(io); break;
      case 2: end_n3(io); break;
      case 3: end_n4(io); break;
      default: end_n5(io); break;
    }
    if (++sub_ >= 5) {
      sub_ = 0;
      ++iter_;
      if (iter_ >= shared_->t_eps) finished_ = true;
    }
  }

  std::uint32_t edge_color(std::uint32_t port) const { return ecolor_[port]; }
  std::uint32_t uncolored_ports() const { return uncolored_; }
  VertexId id() const { return id_; }

private:
  bool active(std::uint32_t p) const { return ecolor_[p] == kNoColor; }

  void begin_n1(RoundIO& io) {
    start_subphase(1, io);
    if (shared_->exact_fraction) {
      scratch_.clear();
      for (std::uint32_t p = 0; p < io.degree(); ++p) {
        my_mark_[p] = 0;
        if (active(p)) scratch_.push_back(p);
      }
      const auto want = std::min<std::uint64_t>(
          scratch_.size(),
          static_cast<std::uint64_t>(std::llround(shared_->mark_prob * scratch_.size())));
      if (want > 0)
        for (std::uint32_t j : io.rng().sample_subset(scratch_.size(), want))
          my_mark_[scratch_[j]] = 1;
    } else {
      for (std::uint32_t p = 0; p < io.degree(); ++p)
        my_mark_[p] = active(p) && io.rng().bernoulli(shared_->mark_prob) ? 1 : 0;
    }
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!active(p)) continue;
      BitVec pl;
      pl.append_bits(my_mark_[p], 1);
      queue_payload(p, pl);
    }
  }

  void end_n1(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      selected_[p] = 0;
      if (!active(p)) continue;
      const BitVec* rx = received(p);
      selected_[p] = (my_mark_[p] || (rx && rx->get_bits(0, 1))) ? 1 : 0;
    }
  }

  void begin_n2(RoundIO& io) {
    start_subphase(shared_->bits_t, io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!selected_[p] || !leader_[p]) continue;
      i_e_[p] = io.rng().below(shared_->family->params().t);
      BitVec pl;
      pl.append_bits(i_e_[p], shared_->bits_t);
      queue_payload(p, pl);
    }
  }

  void end_n2(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (selected_[p] && !leader_[p])
        if (const BitVec* rx = received(p)) i_e_[p] = rx->get_bits(0, shared_->bits_t);
  }

  void begin_n3(RoundIO& io) {
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    start_subphase(static_cast<int>(s), io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!selected_[p] || leader_[p]) continue;
      const auto& S = shared_->family->set(i_e_[p]);
      BitVec m(s);
      for (std::size_t pos = 0; pos < s; ++pos)
        if (psi_.get(S[pos])) m.set(pos);
      queue_payload(p, m);
    }
  }

  void end_n3(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      peer_ok_[p].clear();
      if (selected_[p] && leader_[p])
        if (const BitVec* rx = received(p)) peer_ok_[p] = *rx;
    }
  }

  void begin_n4(RoundIO& io) {
    start_subphase(shared_->bits_color, io);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      tent_[p] = kNoColor;
      if (!selected_[p] || !leader_[p] || peer_ok_[p].empty()) continue;
      const auto& S = shared_->family->set(i_e_[p]);
      BitVec m = peer_ok_[p];
      for (std::size_t pos = 0; pos < m.size(); ++pos)
        if (m.get(pos) && !psi_.get(S[pos])) m.set(pos, false);
      const std::size_t sz = m.count();
      if (sz == 0) continue;  // empty sampled palette: retry next iteration
      tent_[p] = S[m.nth_set(io.rng().below(sz))];
      BitVec pl;
      pl.append_bits(tent_[p], shared_->bits_color);
      queue_payload(p, pl);
    }
  }

  void end_n4(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!selected_[p] || leader_[p]) {
        if (!leader_[p]) tent_[p] = kNoColor;
        continue;
      }
      tent_[p] = kNoColor;
      if (const BitVec* rx = received(p))
        tent_[p] = static_cast<std::uint32_t>(rx->get_bits(0, shared_->bits_color));
    }
  }

  void begin_n5(RoundIO& io) {
    start_subphase(1, io);
    clear_counts();
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (tent_[p] == kNoColor) continue;
      if (color_count_[tent_[p]]++ == 0) touched_.push_back(tent_[p]);
    }
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      my_ok_[p] = 0;
      if (tent_[p] == kNoColor) continue;
      my_ok_[p] = color_count_[tent_[p]] == 1;
      BitVec pl;
      pl.append_bits(my_ok_[p], 1);
      queue_payload(p, pl);
    }
  }

  void end_n5(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (tent_[p] == kNoColor || !my_ok_[p]) continue;
      const BitVec* rx = received(p);
      if (!(rx && rx->get_bits(0, 1) == 1)) continue;
      ecolor_[p] = tent_[p];
      if (psi_.get(tent_[p])) psi_.set(tent_[p], false);
      --uncolored_;
    }
  }

  void clear_counts() {
    for (std::uint32_t c : touched_) color_count_[c] = 0;
    touched_.clear();
  }

  VertexId id_;
  const NibbleShared* shared_;
  BitVec psi_;
  std::uint32_t uncolored_;
  int sub_ = 0;
  int iter_ = 0;
  bool ids_sent_ = false;
  bool ids_done_ = false;

  std::vector<VertexId> nbr_id_;
  std::vector<std::uint8_t> leader_;
  std::vector<std::uint32_t> ecolor_;
  std::vector<std::uint64_t> i_e_;
  std::vector<std::uint8_t> my_mark_, selected_;
  std::vector<std::uint32_t> tent_;
  std::vector<std::uint8_t> my_ok_;
  std::vector<BitVec> peer_ok_;
  std::vector<std::uint16_t> color_count_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t> scratch_;
};

struct NibbleResult {
  std::vector<std::uint32_t> colors;  // per canonical edge; kNoColor if uncolored
  std::uint64_t palette = 0;
  std::uint32_t residual_max_degree = 0;  // max uncolored incident edges per vertex
  bool target_met = false;                // residual degree <= eps*Delta/2
  RunReport report;
};

inline NibbleResult nibble_phase(const Graph& g, const EColorOptions& opts) {
  const std::uint32_t n = g.num_vertices();
  const std::uint32_t delta = g.max_degree();
  const double nu =
      opts.nu > 0.0 ? opts.nu : std::pow(static_cast<double>(std::max(2u, n)), -3.0);
  NibbleShared sh;
  sh.n = n;
  sh.delta = delta;
  sh.palette = std::max<std::uint32_t>(1, delta);
  const double fam_delta = std::min(0.9, std::max(1e-9, opts.eps / 4.0));
  const auto params = family_params_clamped(sh.palette, 0.5, fam_delta, nu);
  sh.family = std::make_shared<const RepFamily>(
      RepFamily::implicit(params, opts.seed ^ 0x18B1EFA5ULL));
  sh.bits_t = ceil_log2(params.t);
  sh.bits_color = ceil_log2(sh.palette);
  sh.bits_id = ceil_log2(std::max<std::uint32_t>(2, n));
  sh.t_eps = opts.t_eps > 0 ? opts.t_eps
                            : static_cast<int>(std::ceil(8.0 / std::max(1e-9, opts.eps)));
  sh.mark_prob = std::min(1.0, opts.eps / 2.0);
  sh.exact_fraction = opts.exact_fraction;

  SimConfig cfg;
  cfg.bandwidth_bits = std::min(64, default_bandwidth(n) * std::max(1, opts.bandwidth_mult));
  cfg.master_seed = opts.seed ^ 0x0B1BB1EULL;
  const int iter_rounds = 1 + ceil_div(sh.bits_t, cfg.bandwidth_bits) +
                          ceil_div(static_cast<int>(params.s), cfg.bandwidth_bits) +
                          ceil_div(sh.bits_color, cfg.bandwidth_bits) + 1;
  cfg.round_cap = ceil_div(sh.bits_id, cfg.bandwidth_bits) + sh.t_eps * iter_rounds + 2;

  auto result = run_sim<NibbleProgram>(
      g,
      [&](VertexId id, std::uint32_t degree) { return NibbleProgram(id, degree, &sh); },
      cfg,
      [&](std::uint64_t, const std::vector<NibbleProgram>& nodes, TrajectoryPoint& pt) {
        detail::observe_edges(g, nodes, pt);
      });

  NibbleResult out;
  out.palette = sh.palette;
  out.report = std::move(result.report);
  out.colors = detail::collect_edge_colors(g, result.nodes);
  for (const auto& nd : result.nodes)
    out.residual_max_degree = std::max(out.residual_max_degree, nd.uncolored_ports());
  out.target_met = static_cast<double>(out.residual_max_degree) <= opts.eps * delta / 2.0;
  return out;
}

struct E1PlusResult {
  std::vector<std::uint32_t> colors;
  std::uint64_t budget = 0;          // ceil((1+eps)*Delta)
  bool budget_met = false;           // nibble target reached, fresh block fits
  std::uint32_t residual_max_degree = 0;
  std::uint64_t rounds_total = 0;
  NibbleResult nibble;
  EColorResult residual;
};

/// (1+eps)Delta-edge coloring: nibble phase over [0, Delta), then the
/// (2*Delta_res-1) pipeline on the residual graph over a fresh color
/// block starting at Delta.
inline E1PlusResult color_edges_1plus(const Graph& g, const EColorOptions& opts) {
  const std::uint32_t delta = g.max_degree();
  E1PlusResult out;
  out.budget = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil((1.0 + opts.eps) * delta)));
  out.nibble = nibble_phase(g, opts);
  out.residual_max_degree = out.nibble.residual_max_degree;
  out.colors = out.nibble.colors;
  out.rounds_total = out.nibble.report.rounds_used;

  std::vector<Edge> res_edges;
  std::vector<std::size_t> res_index;
  for (std::size_t i = 0; i < g.edges().size(); ++i)
    if (out.colors[i] == kNoColor) {
      res_edges.push_back(g.edges()[i]);
      res_index.push_back(i);
    }
  if (!res_edges.empty()) {
    Graph res = Graph::from_edges(g.num_vertices(), std::move(res_edges));
    EColorOptions ropts = opts;
    ropts.seed = opts.seed ^ 0x2E51D0A1ULL;
    out.residual = color_edges_2delta_minus1(res, ropts);
    out.rounds_total += out.residual.report.rounds_used;
    for (std::size_t j = 0; j < res_index.size(); ++j)
      if (out.residual.colors[j] != kNoColor)
        out.colors[res_index[j]] =
            out.residual.colors[j] + delta;  // fresh block [Delta, Delta+2*Delta_res-1)
  }
  const std::uint64_t top = delta + (out.residual.palette > 0 &&
                                     !out.residual.colors.empty()
                                         ? out.residual.palette
                                         : 0);
  out.budget_met = out.nibble.target_met && top <= out.budget;
  return out;
}

}  // namespace colsim

#endif  // COLSIM_ECOLOR_HPP

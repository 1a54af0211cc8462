// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_VCOLOR_HPP
#define COLSIM_VCOLOR_HPP

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

namespace colsim {

/// Algorithm-wide constants every node knows before round 0 (the family
/// descriptor, palette, and schedule are agreed without communication).
struct VertexShared {
  std::uint32_t n = 0;
  std::uint32_t delta = 0;
  std::uint64_t palette = 1;  // colors are [0, palette)
  std::shared_ptr<const RepFamily> family;
  int bits_t = 1;      // wire width of a family index
  int bits_color = 1;  // wire width of a color value
  int bits_pos = 1;    // wire width of a position inside a family set
  std::vector<ColorOp> prefix;

  ColorOp op(std::size_t idx) const {
    if (idx < prefix.size()) return prefix[idx];
    return ColorOp{ColorOp::Kind::single_try, 1, "fallback"};
  }

  int op_rounds(const ColorOp& op, int B) const {
    if (op.kind == ColorOp::Kind::single_try)
      return ceil_div(bits_color, B) + 1;
    return ceil_div(bits_t + static_cast<int>(family->params().s), B) +
           ceil_div(1 + bits_pos, B);
  }
};

constexpr std::uint32_t kNoColor = 0xFFFFFFFFu;

/// Per-vertex state machine for the multi-trial vertex coloring
/// protocol. Sub-phases per op:
///   single_try:  TRY (color value broadcast), ACK (1-bit adopted flag)
///   multitrials: (family index + s-bit trial mask), (adopted flag + position)
class VertexProgram : public PhasedProgram<VertexProgram> {
public:
  VertexProgram(VertexId id, std::uint32_t degree, const VertexShared* shared)
      : PhasedProgram(degree),
        id_(id),
        shared_(shared),
        psi_(shared->palette),
        tried_(shared->palette),
        d_star_(degree),
        last_try_(degree, kNoColor),
        nbr_i_(degree, 0) {
    for (std::size_t c = 0; c < psi_.size(); ++c) psi_.set(c);
  }

  void begin_subphase(RoundIO& io) {
    const ColorOp op = shared_->op(op_idx_);
    if (op.kind == ColorOp::Kind::single_try) {
      if (sub_ == 0)
        begin_single_try(io);
      else
        begin_announce(io, 1, 0);
    } else {
      if (sub_ == 0)
        begin_multitrials(io, op.x);
      else
        begin_announce(io, 1 + shared_->bits_pos, adopted_pos_);
    }
  }

  void end_subphase(RoundIO& io) {
    const ColorOp op = shared_->op(op_idx_);
    if (sub_ == 0) {
      if (op.kind == ColorOp::Kind::single_try)
        end_single_try(io);
      else
        end_multitrials(io);
      sub_ = 1;
    } else {
      end_announce(io, op.kind == ColorOp::Kind::multitrials);
      if (colored()) finished_ = true;  // our own announcement is out
      sub_ = 0;
      ++op_idx_;
    }
  }

  bool colored() const { return color_ != kNoColor; }
  std::uint32_t color() const { return color_; }
  std::uint32_t d_star() const { return d_star_; }
  std::uint32_t uncolored_degree() const { return d_star_; }
  std::size_t palette_size() const { return psi_.count(); }
  VertexId id() const { return id_; }

private:
  void begin_single_try(RoundIO& io) {
    start_subphase(shared_->bits_color, io);
    my_try_ = kNoColor;
    if (colored()) return;
    const std::size_t avail = psi_.count();
    // Palette >= Delta+1 keeps psi nonempty for uncolored vertices.
    const std::size_t pick = io.rng().below(avail);
    my_try_ = static_cast<std::uint32_t>(psi_.nth_set(pick));
    BitVec pl;
    pl.append_bits(my_try_, shared_->bits_color);
    queue_broadcast(io, pl);
  }

  void end_single_try(RoundIO& io) {
    bool conflict = false;
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      last_try_[p] = kNoColor;
      if (const BitVec* rx = received(p)) {
        const auto c = static_cast<std::uint32_t>(rx->get_bits(0, shared_->bits_color));
        last_try_[p] = c;
        if (my_try_ != kNoColor && c == my_try_) conflict = true;
      }
    }
    just_adopted_ = my_try_ != kNoColor && !conflict;
    if (just_adopted_) color_ = my_try_;
  }

  void begin_multitrials(RoundIO& io, std::uint32_t x) {
    const auto& fam = *shared_->family;
    const auto s = static_cast<std::size_t>(fam.params().s);
    start_subphase(shared_->bits_t + static_cast<int>(s), io);
    participated_ = false;
    trial_positions_.clear();
    if (colored()) return;
    participated_ = true;
    trial_i_ = io.rng().below(fam.params().t);
    const auto& S = fam.set(trial_i_);
    // Positions of palette colors inside S, in set order.
    scratch_pos_.clear();
    for (std::size_t idx = 0; idx < s; ++idx)
      if (psi_.get(S[idx])) scratch_pos_.push_back(static_cast<std::uint32_t>(idx));
    const std::uint64_t xx = std::min<std::uint64_t>(x, scratch_pos_.size());
    if (xx > 0) {
      for (std::uint32_t j : io.rng().sample_subset(scratch_pos_.size(), xx))
        trial_positions_.push_back(scratch_pos_[j]);
    }
    BitVec pl;
    pl.append_bits(trial_i_, shared_->bits_t);
    BitVec mask(s);
    for (std::uint32_t pos : trial_positions_) mask.set(pos);
    pl.append(mask);
    queue_broadcast(io, pl);
  }

  void end_multitrials(RoundIO& io) {
    const auto& fam = *shared_->family;
    const auto s = static_cast<std::size_t>(fam.params().s);
    tried_.zero();
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (const BitVec* rx = received(p)) {
        const std::uint64_t i_u = rx->get_bits(0, shared_->bits_t);
        nbr_i_[p] = i_u;
        const auto& Su = fam.set(i_u);
        scan_set_bits(*rx, static_cast<std::size_t>(shared_->bits_t), s,
                      [&](std::size_t pos) { tried_.set(Su[pos]); });
      }
    }
    adopted_pos_ = 0;
    just_adopted_ = false;
    if (participated_ && !colored()) {
      const auto& S = fam.set(trial_i_);
      for (std::uint32_t pos : trial_positions_) {
        const std::uint32_t c = S[pos];
        if (!tried_.get(c)) {  // untried by every neighbor, and c is in psi
          color_ = c;
          adopted_pos_ = pos;
          just_adopted_ = true;
          break;
        }
      }
    }
  }

  // Announcement: adopters broadcast [1][payload_pos]; everyone else is silent.
  void begin_announce(RoundIO& io, int bits, std::uint32_t pos) {
    start_subphase(bits, io);
    if (!just_adopted_) return;
    BitVec pl;
    pl.append_bits(1, 1);
    if (bits > 1) pl.append_bits(pos, bits - 1);
    queue_broadcast(io, pl);
  }

  void end_announce(RoundIO& io, bool positional) {
    const auto& fam = shared_->family;
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      const BitVec* rx = received(p);
      if (!rx || rx->get_bits(0, 1) == 0) continue;
      std::uint32_t c;
      if (positional) {
        const auto pos = static_cast<std::size_t>(rx->get_bits(1, shared_->bits_pos));
        c = fam->set(nbr_i_[p])[pos];
      } else {
        c = last_try_[p];
      }
      if (psi_.get(c)) psi_.set(c, false);
      --d_star_;
    }
  }

  VertexId id_;
  const VertexShared* shared_;
  BitVec psi_;
  BitVec tried_;  // scratch: colors tried by neighbors this op
  std::uint32_t color_ = kNoColor;
  std::uint32_t d_star_;
  std::size_t op_idx_ = 0;
  int sub_ = 0;

  std::uint32_t my_try_ = kNoColor;
  bool participated_ = false;
  bool just_adopted_ = false;
  std::uint64_t trial_i_ = 0;
  std::uint32_t adopted_pos_ = 0;
  std::vector<std::uint32_t> trial_positions_;  // S-positions, ascending
  std::vector<std::uint32_t> scratch_pos_;
  std::vector<std::uint32_t> last_try_;  // per-port single-try color
  std::vector<std::uint64_t> nbr_i_;     // per-port family index
};

// ---------------------------------------------------------------------------
// Driver

struct VColorOptions {
  double eps = 1.0;
  double c_c = 8.0;
  int reps_a = 4;
  int reps_b = 4;
  double nu = 0.0;          // 0 -> n^-3
  bool sparse_plus1 = false;  // (Delta+1) palette with a slack-generation round
  int round_cap = 0;          // 0 -> derived from the schedule
  int bandwidth_mult = 1;
  std::uint64_t seed = 1;
  bool check_each_round = false;  // assert properness every round (debug)
};

struct VColorResult {
  std::vector<std::uint32_t> colors;  // kNoColor if uncolored
  std::uint64_t palette = 0;
  RunReport report;
  bool family_clamped = false;
  std::uint64_t prefix_rounds = 0;  // rounds before the fallback stage
};

inline VertexShared make_vertex_shared(std::uint32_t n, std::uint32_t delta,
                                       std::uint64_t palette, double eps, double c_c,
                                       int reps_a, int reps_b, double nu,
                                       bool slack_round, std::uint64_t family_seed) {
  VertexShared sh;
  sh.n = n;
  sh.delta = delta;
  sh.palette = palette;
  const double fam_delta = eps / (4.0 * (1.0 + eps));
  const auto params = family_params_clamped(palette, 0.5, fam_delta, nu);
  sh.family = std::make_shared<const RepFamily>(RepFamily::implicit(params, family_seed));
  sh.bits_t = ceil_log2(params.t);
  sh.bits_color = ceil_log2(palette);
  sh.bits_pos = ceil_log2(params.s);
  const double log2n = std::log2(std::max<std::uint32_t>(2, n));
  ScheduleParams sp;
  sp.x_max = static_cast<std::uint32_t>(
      std::max(1.0, std::floor(eps * delta / (2.0 * (1.0 + eps)))));
  sp.slack_scale = eps * delta;
  sp.palette_ratio = 1.0 + eps;
  sp.c_c = c_c;
  sp.log2n = log2n;
  sp.log_star_n = log_star(n);
  sp.reps_a = reps_a;
  sp.reps_b = reps_b;
  sp.slack_round = slack_round;
  if (delta > 0) sh.prefix = build_schedule(sp);
  return sh;
}

namespace detail {

inline void check_vertex_properness(const Graph& g, const std::vector<VertexProgram>& nodes) {
  for (const auto& [u, v] : g.edges())
    if (nodes[u].colored() && nodes[v].colored() && nodes[u].color() == nodes[v].color())
      throw std::logic_error("properness violated during run");
}

inline std::vector<PhaseSpan> phases_from_schedule(const VertexShared& sh, int B,
                                                   std::uint64_t rounds_used,
                                                   std::uint64_t* prefix_rounds) {
  std::vector<PhaseSpan> spans;
  std::uint64_t r = 0;
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

}  // namespace detail

inline VColorResult color_vertices(const Graph& g, const VColorOptions& opts) {
  const std::uint32_t n = g.num_vertices();
  const std::uint32_t delta = g.max_degree();
  const std::uint64_t palette =
      opts.sparse_plus1
          ? delta + 1
          : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(
                                           std::ceil((1.0 + opts.eps) * delta)));
  const double nu =
      opts.nu > 0.0 ? opts.nu : std::pow(static_cast<double>(std::max(2u, n)), -3.0);
  VertexShared sh =
      make_vertex_shared(n, delta, palette, opts.eps, opts.c_c, opts.reps_a, opts.reps_b,
                         nu, opts.sparse_plus1, opts.seed ^ 0xFA417EEDULL);

  SimConfig cfg;
  cfg.bandwidth_bits = std::min(64, default_bandwidth(n) * std::max(1, opts.bandwidth_mult));
  cfg.master_seed = opts.seed;
  std::uint64_t sched_rounds = 0;
  for (const auto& op : sh.prefix)
    sched_rounds += static_cast<std::uint64_t>(sh.op_rounds(op, cfg.bandwidth_bits));
  cfg.round_cap = opts.round_cap > 0
                      ? opts.round_cap
                      : static_cast<int>(sched_rounds) + 4000;

  auto result = run_sim<VertexProgram>(
      g,
      [&](VertexId id, std::uint32_t degree) { return VertexProgram(id, degree, &sh); },
      cfg,
      [&](std::uint64_t, const std::vector<VertexProgram>& nodes, TrajectoryPoint& pt) {
        std::uint64_t unc = 0, maxd = 0;
        for (const auto& nd : nodes)
          if (!nd.colored()) {
            ++unc;
            maxd = std::max<std::uint64_t>(maxd, nd.d_star());
          }
        pt.uncolored = unc;
        pt.max_d_star = maxd;
        if (opts.check_each_round) detail::check_vertex_properness(g, nodes);
      });

  VColorResult out;
  out.palette = palette;
  out.family_clamped = sh.family->params().clamped;
  out.report = std::move(result.report);
  out.report.phases = detail::phases_from_schedule(sh, cfg.bandwidth_bits,
                                                   out.report.rounds_used,
                                                   &out.prefix_rounds);
  out.colors.reserve(n);
  for (const auto& nd : result.nodes) out.colors.push_back(nd.color());
  return out;
}

}  // namespace colsim

#endif  // COLSIM_VCOLOR_HPP

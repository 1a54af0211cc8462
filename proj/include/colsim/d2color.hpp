// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_D2COLOR_HPP
#define COLSIM_D2COLOR_HPP

#include <cmath>
#include <cstdint>
#include <memory>
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

/// Shared constants for a distance-2 coloring run. Every vertex keeps
/// only its one-hop view psi1 (colors unused among itself and its
/// neighbors); two-hop palettes are never materialized, only their
/// intersections with a chosen family set.
struct D2Shared {
  std::uint32_t n = 0;
  std::uint32_t delta = 0;
  std::uint64_t palette = 1;
  std::shared_ptr<const RepFamily> family;
  int bits_t = 1;
  int bits_color = 1;
  int bits_pos = 1;
  bool log_sampling = false;  // record every two-hop palette sample (tests)
  std::vector<ColorOp> prefix;

  ColorOp op(std::size_t idx) const {
    if (idx < prefix.size()) return prefix[idx];
    return ColorOp{ColorOp::Kind::single_try, 1, "fallback"};
  }

  int op_rounds(const ColorOp& op, int B) const {
    if (op.kind == ColorOp::Kind::single_try)
      return ceil_div(bits_color, B) + 1 + ceil_div(1 + bits_color, B);
    const int sm = ceil_div(static_cast<int>(family->params().s), B);
    return ceil_div(bits_t, B) + 3 * sm + ceil_div(1 + bits_pos, B);
  }
};

/// One two-hop palette sample, for oracle comparison in tests.
struct D2SampleEvent {
  std::uint64_t round = 0;  // round in which the intersection was computed
  std::uint64_t i = 0;      // family index
  BitVec result;            // s-bit mask of S_i cap psi2 (set order)
};

/// Per-vertex program. Multi-trial op sub-phases:
///   D1 trier broadcast      : family index i_v
///   D2 every neighbor reply : s-bit mask of S_{i_v} cap psi1_u (per port)
///   D3 trier broadcast      : s-bit trial mask X (subset of the AND)
///   D4 every neighbor reply : s-bit conflict mask (tried by someone else
///                             in the replier's closed neighborhood)
///   D5 adopter broadcast    : flag + position of the adopted color
/// Single-color op sub-phases:
///   U1 trier broadcast      : color value, uniform over psi1_v
///   U2 every neighbor reply : 1-bit "unused here and unique here" flag
///   U3 adopter broadcast    : flag + color value
/// Colored vertices keep serving replies; a vertex is finished once it
/// and all of its neighbors hold colors.
class D2Program : public PhasedProgram<D2Program> {
public:
  D2Program(VertexId id, std::uint32_t degree, const D2Shared* shared)
      : PhasedProgram(degree),
        id_(id),
        shared_(shared),
        psi1_(shared->palette),
        nbr_uncolored_(degree),
        nbr_i_(degree, 0),
        nbr_trying_(degree, 0),
        nbr_x_(degree),
        nbr_try_(degree, kNoColor),
        color_count_(shared->palette, 0) {
    for (std::size_t c = 0; c < psi1_.size(); ++c) psi1_.set(c);
    if (degree == 0) {
      // No vertex within distance 2: any color is proper, no rounds needed.
      color_ = 0;
      psi1_.set(0, false);
      finished_ = true;
    }
  }

  void begin_subphase(RoundIO& io) {
    const ColorOp op = shared_->op(op_idx_);
    if (op.kind == ColorOp::Kind::single_try) {
      switch (sub_) {
        case 0: begin_u1(io); break;
        case 1: begin_u2(io); break;
        default: begin_announce(io, 1 + shared_->bits_color, color_); break;
      }
    } else {
      switch (sub_) {
        case 0: begin_d1(io); break;
        case 1: begin_d2(io); break;
        case 2: begin_d3(io, op.x); break;
        case 3: begin_d4(io); break;
        default: begin_announce(io, 1 + shared_->bits_pos, adopted_pos_); break;
      }
    }
  }

  void end_subphase(RoundIO& io) {
    const ColorOp op = shared_->op(op_idx_);
    const int subs = op.kind == ColorOp::Kind::single_try ? 3 : 5;
    if (op.kind == ColorOp::Kind::single_try) {
      switch (sub_) {
        case 0: end_u1(io); break;
        case 1: end_u2(io); break;
        default: end_announce(io, false); break;
      }
    } else {
      switch (sub_) {
        case 0: end_d1(io); break;
        case 1: end_d2(io); break;
        case 2: end_d3(io); break;
        case 3: end_d4(io); break;
        default: end_announce(io, true); break;
      }
    }
    if (++sub_ >= subs) {
      sub_ = 0;
      ++op_idx_;
    }
  }

  bool colored() const { return color_ != kNoColor; }
  std::uint32_t color() const { return color_; }
  std::uint32_t uncolored_neighbors() const { return nbr_uncolored_; }
  const BitVec& psi1() const { return psi1_; }
  const std::vector<D2SampleEvent>& sample_log() const { return sample_log_; }
  VertexId id() const { return id_; }

private:
  BitVec mask_of(std::uint64_t i) const {
    const auto& S = shared_->family->set(i);
    BitVec m(S.size());
    for (std::size_t pos = 0; pos < S.size(); ++pos)
      if (psi1_.get(S[pos])) m.set(pos);
    return m;
  }

  void begin_d1(RoundIO& io) {
    start_subphase(shared_->bits_t, io);
    trying_ = !colored();
    if (!trying_) return;
    i_v_ = io.rng().below(shared_->family->params().t);
    BitVec pl;
    pl.append_bits(i_v_, shared_->bits_t);
    queue_broadcast(io, pl);
  }

  void end_d1(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      nbr_trying_[p] = 0;
      if (const BitVec* rx = received(p)) {
        nbr_trying_[p] = 1;
        nbr_i_[p] = rx->get_bits(0, shared_->bits_t);
      }
    }
  }

  void begin_d2(RoundIO& io) {
    start_subphase(static_cast<int>(shared_->family->params().s), io);
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (nbr_trying_[p]) queue_payload(p, mask_of(nbr_i_[p]));
  }

  void end_d2(RoundIO& io) {
    if (!trying_) return;
    samp_ = mask_of(i_v_);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      const BitVec* rx = received(p);
      if (rx) samp_.and_with(*rx);
    }
    if (shared_->log_sampling) sample_log_.push_back({io.round(), i_v_, samp_});
  }

  void begin_d3(RoundIO& io, std::uint32_t x) {
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    start_subphase(static_cast<int>(s), io);
    x_mask_ = BitVec(s);
    if (!trying_) return;
    scratch_.clear();
    scan_set_bits(samp_, 0, s,
                  [&](std::size_t pos) { scratch_.push_back(static_cast<std::uint32_t>(pos)); });
    const std::uint64_t xx = std::min<std::uint64_t>(x, scratch_.size());
    if (xx == 0) {
      trying_ = false;
      return;
    }
    for (std::uint32_t j : io.rng().sample_subset(scratch_.size(), xx))
      x_mask_.set(scratch_[j]);
    queue_broadcast(io, x_mask_);
  }

  void end_d3(RoundIO& io) {
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      nbr_x_[p] = BitVec(s);
      if (!nbr_trying_[p]) continue;
      const BitVec* rx = received(p);
      if (rx)
        nbr_x_[p] = *rx;
      else
        nbr_trying_[p] = 0;  // trier bailed out on an empty sample
    }
  }

  void begin_d4(RoundIO& io) {
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    start_subphase(static_cast<int>(s), io);
    // Multiplicity of each tried color over the closed neighborhood view.
    clear_counts();
    auto count_trial = [&](std::uint64_t i, const BitVec& xm) {
      const auto& S = shared_->family->set(i);
      scan_set_bits(xm, 0, s, [&](std::size_t pos) {
        if (color_count_[S[pos]]++ == 0) touched_.push_back(S[pos]);
      });
    };
    if (trying_) count_trial(i_v_, x_mask_);
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (nbr_trying_[p]) count_trial(nbr_i_[p], nbr_x_[p]);
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (!nbr_trying_[p]) continue;
      const auto& S = shared_->family->set(nbr_i_[p]);
      BitVec conflict(s);
      scan_set_bits(nbr_x_[p], 0, s, [&](std::size_t pos) {
        if (color_count_[S[pos]] > 1) conflict.set(pos);
      });
      queue_payload(p, conflict);
    }
  }

  void end_d4(RoundIO& io) {
    just_adopted_ = false;
    if (!trying_) return;
    BitVec ok = x_mask_;
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (const BitVec* rx = received(p)) {
        BitVec inv = *rx;
        for (std::size_t w = 0; w < ok.size(); w += 64) {
          const int take = static_cast<int>(std::min<std::size_t>(64, ok.size() - w));
          std::uint64_t v = ok.get_bits(w, take) & ~inv.get_bits(w, take);
          for (int b = 0; b < take; ++b) ok.set(w + b, (v >> b) & 1);
        }
      }
    const auto s = static_cast<std::size_t>(shared_->family->params().s);
    std::size_t best = s;
    scan_set_bits(ok, 0, s, [&](std::size_t pos) {
      if (pos < best) best = pos;
    });
    if (best < s) {
      adopted_pos_ = static_cast<std::uint32_t>(best);
      color_ = shared_->family->set(i_v_)[best];
      psi1_.set(color_, false);
      just_adopted_ = true;
    }
  }

  void begin_u1(RoundIO& io) {
    start_subphase(shared_->bits_color, io);
    trying_ = !colored();
    my_try_ = kNoColor;
    if (!trying_) return;
    const std::size_t avail = psi1_.count();
    if (avail == 0) {
      trying_ = false;
      return;
    }
    my_try_ = static_cast<std::uint32_t>(psi1_.nth_set(io.rng().below(avail)));
    BitVec pl;
    pl.append_bits(my_try_, shared_->bits_color);
    queue_broadcast(io, pl);
  }

  void end_u1(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      nbr_try_[p] = kNoColor;
      if (const BitVec* rx = received(p))
        nbr_try_[p] = static_cast<std::uint32_t>(rx->get_bits(0, shared_->bits_color));
    }
  }

  void begin_u2(RoundIO& io) {
    start_subphase(1, io);
    clear_counts();
    auto bump = [&](std::uint32_t c) {
      if (c == kNoColor) return;
      if (color_count_[c]++ == 0) touched_.push_back(c);
    };
    bump(my_try_);
    for (std::uint32_t p = 0; p < io.degree(); ++p) bump(nbr_try_[p]);
    self_ok_ = trying_ && my_try_ != kNoColor && color_count_[my_try_] == 1;
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      const std::uint32_t c = nbr_try_[p];
      if (c == kNoColor) continue;
      BitVec pl;
      pl.append_bits(psi1_.get(c) && color_count_[c] == 1 ? 1 : 0, 1);
      queue_payload(p, pl);
    }
  }

  void end_u2(RoundIO& io) {
    just_adopted_ = false;
    if (!trying_ || my_try_ == kNoColor || !self_ok_) return;
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      const BitVec* rx = received(p);
      if (!rx || rx->get_bits(0, 1) != 1) return;
    }
    color_ = my_try_;
    psi1_.set(color_, false);
    just_adopted_ = true;
  }

  void begin_announce(RoundIO& io, int bits, std::uint32_t value) {
    start_subphase(bits, io);
    if (!just_adopted_) return;
    BitVec pl;
    pl.append_bits(1, 1);
    pl.append_bits(value, bits - 1);
    queue_broadcast(io, pl);
  }

  void end_announce(RoundIO& io, bool positional) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      const BitVec* rx = received(p);
      if (!rx || rx->get_bits(0, 1) == 0) continue;
      std::uint32_t c;
      if (positional) {
        const auto pos = static_cast<std::size_t>(rx->get_bits(1, shared_->bits_pos));
        c = shared_->family->set(nbr_i_[p])[pos];
      } else {
        c = static_cast<std::uint32_t>(rx->get_bits(1, shared_->bits_color));
      }
      if (psi1_.get(c)) psi1_.set(c, false);
      --nbr_uncolored_;
    }
    if (colored() && nbr_uncolored_ == 0) finished_ = true;
  }

  void clear_counts() {
    for (std::uint32_t c : touched_) color_count_[c] = 0;
    touched_.clear();
  }

  VertexId id_;
  const D2Shared* shared_;
  BitVec psi1_;
  std::uint32_t color_ = kNoColor;
  std::uint32_t nbr_uncolored_;
  std::size_t op_idx_ = 0;
  int sub_ = 0;

  bool trying_ = false;
  bool just_adopted_ = false;
  bool self_ok_ = false;
  std::uint64_t i_v_ = 0;
  std::uint32_t my_try_ = kNoColor;
  std::uint32_t adopted_pos_ = 0;
  BitVec samp_, x_mask_;
  std::vector<std::uint64_t> nbr_i_;
  std::vector<std::uint8_t> nbr_trying_;
  std::vector<BitVec> nbr_x_;
  std::vector<std::uint32_t> nbr_try_;
  std::vector<std::uint16_t> color_count_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t> scratch_;
  std::vector<D2SampleEvent> sample_log_;
};

// ---------------------------------------------------------------------------
// Driver

enum class D2Mode { budget_1plus_eps, budget_delta2_plus1_sparse, budget_log_c };

struct D2Options {
  D2Mode mode = D2Mode::budget_1plus_eps;
  double eps = 1.0;
  int c = 1;            // iterated-log depth for budget_log_c
  double c_c = 8.0;
  int reps_a = 4;
  int reps_b = 4;
  double nu = 0.0;      // 0 -> n^-3
  double eps_eff = 0.0; // sparse mode schedule scale; 0 -> 1/(32 e^3)
  int round_cap = 0;
  int bandwidth_mult = 1;
  std::uint64_t seed = 1;
  bool log_sampling = false;
};

struct D2Result {
  std::vector<std::uint32_t> colors;
  std::uint64_t palette = 0;
  std::shared_ptr<const RepFamily> family;  // the family the run sampled from
  RunReport report;
  bool family_clamped = false;
  std::uint64_t prefix_rounds = 0;
  std::vector<std::vector<D2SampleEvent>> sample_logs;  // per vertex, if enabled
};

namespace detail {

inline double iterated_log2(double x, int c) {
  for (int i = 0; i < c; ++i) x = std::log2(std::max(2.0, x));
  return x;
}

}  // namespace detail

/// `extra(round, nodes)` is called once per round after the step; tests
/// use it to snapshot per-round state for oracle comparisons.
template <class Extra>
D2Result color_d2_observed(const Graph& g, const D2Options& opts, Extra&& extra) {
  const std::uint32_t n = g.num_vertices();
  const std::uint32_t delta = g.max_degree();
  const std::uint64_t d2 = static_cast<std::uint64_t>(delta) * delta;
  std::uint64_t palette = 1;
  double slack_scale = 1.0;
  bool slack_round = false;
  switch (opts.mode) {
    case D2Mode::budget_1plus_eps:
      palette = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(std::ceil((1.0 + opts.eps) * static_cast<double>(d2))));
      slack_scale = opts.eps * static_cast<double>(d2);
      break;
    case D2Mode::budget_delta2_plus1_sparse: {
      palette = d2 + 1;
      const double ee = opts.eps_eff > 0.0 ? opts.eps_eff : 1.0 / (32.0 * std::exp(3.0));
      slack_scale = ee * static_cast<double>(std::max<std::uint64_t>(1, d2));
      slack_round = true;
      break;
    }
    case D2Mode::budget_log_c: {
      const double f = detail::iterated_log2(static_cast<double>(std::max(2u, n)), opts.c);
      palette = std::max<std::uint64_t>(
          d2 + 1, static_cast<std::uint64_t>(std::ceil(static_cast<double>(d2) * f)));
      slack_scale = static_cast<double>(palette - d2);
      break;
    }
  }
  const double ratio = static_cast<double>(palette) / static_cast<double>(std::max<std::uint64_t>(1, d2));
  const double nu =
      opts.nu > 0.0 ? opts.nu : std::pow(static_cast<double>(std::max(2u, n)), -3.0);

  D2Shared sh;
  sh.n = n;
  sh.delta = delta;
  sh.palette = palette;
  sh.log_sampling = opts.log_sampling;
  const double fam_delta =
      std::min(0.9, std::max(1e-9, slack_scale / (4.0 * ratio * static_cast<double>(
                                                                    std::max<std::uint64_t>(1, d2)))));
  const auto params = family_params_clamped(palette, 0.5, fam_delta, nu);
  sh.family = std::make_shared<const RepFamily>(
      RepFamily::implicit(params, opts.seed ^ 0xD15C0B07ULL));
  sh.bits_t = ceil_log2(params.t);
  sh.bits_color = ceil_log2(palette);
  sh.bits_pos = ceil_log2(params.s);
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
  std::uint64_t sched = 0;
  for (const auto& op : sh.prefix)
    sched += static_cast<std::uint64_t>(sh.op_rounds(op, cfg.bandwidth_bits));
  cfg.round_cap = opts.round_cap > 0 ? opts.round_cap : static_cast<int>(sched) + 20000;

  auto result = run_sim<D2Program>(
      g,
      [&](VertexId id, std::uint32_t degree) { return D2Program(id, degree, &sh); },
      cfg,
      [&](std::uint64_t round, const std::vector<D2Program>& nodes, TrajectoryPoint& pt) {
        std::uint64_t unc = 0;
        for (const auto& nd : nodes)
          if (!nd.colored()) ++unc;
        pt.uncolored = unc;
        extra(round, nodes);
      });

  D2Result out;
  out.palette = palette;
  out.family = sh.family;
  out.family_clamped = params.clamped;
  out.report = std::move(result.report);
  {
    std::vector<PhaseSpan> spans;
    std::uint64_t r = 0;
    for (const auto& op : sh.prefix) {
      const auto d = static_cast<std::uint64_t>(sh.op_rounds(op, cfg.bandwidth_bits));
      if (r >= out.report.rounds_used) break;
      if (!spans.empty() && spans.back().label == op.label)
        spans.back().last_round = std::min(r + d - 1, out.report.rounds_used - 1);
      else
        spans.push_back({op.label, r, std::min(r + d - 1, out.report.rounds_used - 1)});
      r += d;
    }
    out.prefix_rounds = std::min(r, out.report.rounds_used);
    if (r < out.report.rounds_used)
      spans.push_back({"fallback", r, out.report.rounds_used - 1});
    out.report.phases = std::move(spans);
  }
  out.colors.reserve(n);
  for (const auto& nd : result.nodes) out.colors.push_back(nd.color());
  if (opts.log_sampling) {
    out.sample_logs.reserve(n);
    for (const auto& nd : result.nodes) out.sample_logs.push_back(nd.sample_log());
  }
  return out;
}

inline D2Result color_d2(const Graph& g, const D2Options& opts) {
  return color_d2_observed(g, opts,
                           [](std::uint64_t, const std::vector<D2Program>&) {});
}

}  // namespace colsim

#endif  // COLSIM_D2COLOR_HPP

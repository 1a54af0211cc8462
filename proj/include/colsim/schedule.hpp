// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_SCHEDULE_HPP
#define COLSIM_SCHEDULE_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "colsim/graph.hpp"

namespace colsim {

/// One driver-level operation; compiled by each program kind into its
/// own wire sub-phases.
struct ColorOp {
  enum class Kind { single_try, multitrials };
  Kind kind = Kind::single_try;
  std::uint32_t x = 1;       // trial count for multitrials
  std::string label;
};

struct ScheduleParams {
  std::uint32_t x_max = 1;     // trial-count cap from the slack/degree ratio
  double slack_scale = 0.0;    // epsilon * Delta analogue in the cleanup formula
  double palette_ratio = 1.0;  // (1+eps), (2+eps), or measured palette/degree ratio
  double c_c = 8.0;
  double log2n = 1.0;
  int log_star_n = 1;
  int reps_a = 4;
  int reps_b = 4;
  bool slack_round = false;    // prepend one single-color try
};

/// Two-stage trial schedule: tetration growth, then the cleanup ramp.
/// Trailing fallback single-color tries are appended lazily by the
/// programs, not here.
inline std::vector<ColorOp> build_schedule(const ScheduleParams& sp) {
  std::vector<ColorOp> ops;
  if (sp.slack_round)
    ops.push_back({ColorOp::Kind::single_try, 1, "slack"});

  // Stage A: x = min(2^^i, x_max), stopping once the cap is reached.
  for (int i = 0; i <= sp.log_star_n; ++i) {
    const std::uint64_t tet = up_arrow(2, static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(sp.x_max) + 1);
    const auto x = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(tet, sp.x_max));
    for (int r = 0; r < sp.reps_a; ++r)
      ops.push_back({ColorOp::Kind::multitrials, std::max<std::uint32_t>(1, x),
                     "stageA." + std::to_string(i)});
    if (tet >= sp.x_max) break;
  }

  // Stage B: x = slack_scale * log^(i/log* n)(n) / (2 * ratio * C_c * log n),
  // clamped to [1, x_max].
  const int L = std::max(1, sp.log_star_n);
  for (int i = 0; i <= sp.log_star_n; ++i) {
    const double raw = sp.slack_scale *
                       std::pow(sp.log2n, static_cast<double>(i) / L) /
                       (2.0 * sp.palette_ratio * sp.c_c * sp.log2n);
    auto x = static_cast<std::uint32_t>(std::max(1.0, std::floor(raw)));
    x = std::min(x, std::max<std::uint32_t>(1, sp.x_max));
    for (int r = 0; r < sp.reps_b; ++r)
      ops.push_back({ColorOp::Kind::multitrials, x, "stageB." + std::to_string(i)});
  }
  return ops;
}

}  // namespace colsim

#endif  // COLSIM_SCHEDULE_HPP

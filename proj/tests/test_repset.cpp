// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "colsim/repset.hpp"

using namespace colsim;

namespace {

RepFamilyParams hand_params(std::uint64_t k, std::uint64_t s, std::uint64_t t,
                            double alpha = 0.5, double delta = 0.25, double nu = 0.125) {
  RepFamilyParams p;
  p.k = k;
  p.s = s;
  p.t = t;
  p.alpha = alpha;
  p.delta = delta;
  p.nu = nu;
  p.effective_nu = nu;
  return p;
}

}  // namespace

TEST_CASE("parameter derivation at the reference point") {
  auto p = family_params(1024, 0.5, 0.125, 0.125);
  CHECK(p.s == 333);  // ceil(3 ln32 / (0.25 * 0.125))
  CHECK_FALSE(p.clamped);
  CHECK(p.effective_nu == 0.125);
  // t is the max of the two lower bounds; here the exponential term dominates
  const double t1 = 3.0 * (1024.0 * std::log(2.0) + 1.0) *
                    std::exp(0.25 * 0.125 * 333.0 / 3.0);
  CHECK(p.t == static_cast<std::uint64_t>(std::ceil(t1)));
  CHECK(p.t > 60000);
  CHECK(p.t < 80000);
  const double t2 = 3.0 * 1024.0 * (std::log(2048.0) + 1.0) / (0.25 * 333.0);
  CHECK(static_cast<double>(p.t) >= t2);
}

TEST_CASE("smaller nu demands a larger sample size s") {
  auto a = family_params(4096, 0.5, 0.125, 0.125);
  auto b = family_params(4096, 0.5, 0.125, 0.001);
  CHECK(b.s > a.s);
}

TEST_CASE("universe too small for the requested parameters") {
  CHECK_THROWS_WITH_AS(static_cast<void>(family_params(64, 0.5, 0.125, 0.125)),
                       doctest::Contains("universe too small"), RepsetError);
  auto p = family_params_clamped(64, 0.5, 0.125, 0.125);
  CHECK(p.clamped);
  CHECK(p.s == 64);
  CHECK(p.effective_nu >= 0.125);
  CHECK(p.effective_nu <= 1.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(static_cast<void>(family_params(0, 0.5, 0.125, 0.125)), RepsetError);
  CHECK_THROWS_AS(static_cast<void>(family_params(64, 1.5, 0.125, 0.125)), RepsetError);
  CHECK_THROWS_AS(static_cast<void>(family_params(64, 0.5, 0.0, 0.125)), RepsetError);
  CHECK_THROWS_AS(static_cast<void>(family_params(64, 0.5, 0.125, 1.0)), RepsetError);
}

TEST_CASE("explicit family stores and indexes its sets") {
  auto f = RepFamily::explicit_from_sets(hand_params(8, 2, 2), {{0, 1}, {2, 3}});
  CHECK(f.is_explicit());
  CHECK(f.set(1) == std::vector<std::uint32_t>{2, 3});
  CHECK(f.set_mask(1).get(2));
  CHECK(f.set_mask(1).get(3));
  CHECK(f.set_mask(1).count() == 2);
  CHECK_THROWS_AS(static_cast<void>(f.set(2)), RepsetError);

  CHECK_THROWS_AS(RepFamily::explicit_from_sets(hand_params(8, 2, 2), {{0, 1}}), RepsetError);
  CHECK_THROWS_AS(RepFamily::explicit_from_sets(hand_params(8, 2, 2), {{0, 1}, {2}}),
                  RepsetError);
  CHECK_THROWS_AS(RepFamily::explicit_from_sets(hand_params(8, 2, 2), {{0, 1}, {3, 2}}),
                  RepsetError);
  CHECK_THROWS_AS(RepFamily::explicit_from_sets(hand_params(8, 2, 2), {{0, 1}, {2, 8}}),
                  RepsetError);
}

TEST_CASE("drawn explicit families are deterministic in the seed") {
  auto p = hand_params(64, 8, 20);
  auto a = RepFamily::draw_explicit(p, 11);
  auto b = RepFamily::draw_explicit(p, 11);
  auto c = RepFamily::draw_explicit(p, 12);
  bool same = true, differs = false;
  for (std::uint64_t i = 0; i < p.t; ++i) {
    same = same && (a.set(i) == b.set(i));
    differs = differs || (a.set(i) != c.set(i));
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("implicit family: determinism, memoization, mask consistency") {
  auto p = family_params(1024, 0.5, 0.125, 0.125);
  auto f = RepFamily::implicit(p, 777);
  auto g = RepFamily::implicit(p, 777);
  CHECK_FALSE(f.is_explicit());
  CHECK(f.family_seed() == 777);
  for (std::uint64_t i : {0ull, 5ull, 999ull}) {
    const auto& S = f.set(i);
    CHECK(S.size() == p.s);
    CHECK(S == g.set(i));
    const auto& m = f.set_mask(i);
    CHECK(m.count() == p.s);
    for (auto e : S) CHECK(m.get(e));
    CHECK(&f.set(i) == &f.set(i));  // memoized: stable address
  }
  auto h = RepFamily::implicit(p, 778);
  CHECK(f.set(0) != h.set(0));
}

TEST_CASE("degenerate family with s == k passes every probe") {
  std::vector<std::uint32_t> full(16);
  for (std::uint32_t i = 0; i < 16; ++i) full[i] = i;
  auto f = RepFamily::explicit_from_sets(hand_params(16, 16, 3), {full, full, full});
  auto rep = check_family(f, {{0, 1, 2, 3, 4, 5, 6, 7}, {3}, full});
  CHECK(rep.pass);
  CHECK(rep.elem_freq_min_ratio == doctest::Approx(1.0));
  CHECK(rep.elem_freq_max_ratio == doctest::Approx(1.0));
}

TEST_CASE("a family of identical sets fails its complement probe") {
  std::vector<std::vector<std::uint32_t>> sets(5, {0, 1, 2, 3});
  auto f = RepFamily::explicit_from_sets(hand_params(16, 4, 5), std::move(sets));
  std::vector<std::uint32_t> comp;
  for (std::uint32_t u = 4; u < 16; ++u) comp.push_back(u);
  auto rep = check_family(f, {comp});
  CHECK_FALSE(rep.pass);
  CHECK(rep.per_t[0].unusual_fraction == doctest::Approx(1.0));
}

TEST_CASE("a single-set family cannot be representative") {
  auto p = hand_params(64, 8, 1);
  auto f = RepFamily::draw_explicit(p, 3);
  auto probes = default_probe_sets(f, 4, 10);
  CHECK_FALSE(check_family(f, probes).pass);
}

TEST_CASE("check_family input validation") {
  auto f = RepFamily::draw_explicit(hand_params(64, 8, 20), 1);
  CHECK_THROWS_AS(static_cast<void>(check_family(f, {})), RepsetError);
  CHECK_THROWS_AS(static_cast<void>(check_family(f, {{64}})), RepsetError);
  auto p = family_params(1024, 0.5, 0.125, 0.125);
  auto impl = RepFamily::implicit(p, 5);
  CHECK_THROWS_AS(static_cast<void>(check_family(impl, {{0, 1, 2}})), RepsetError);
}

TEST_CASE("a fresh random draw at sane parameters verifies") {
  auto p = hand_params(256, 40, 1000);
  auto f = build_explicit_family(p, 2026, 3, 20);
  auto rep = check_family(f, default_probe_sets(f, 1, 20));
  CHECK(rep.pass);
  CHECK(rep.sets_probed == 1000);
}

TEST_CASE("implicit family verifies over sampled indices") {
  auto p = family_params(1024, 0.5, 0.125, 0.125);
  auto f = RepFamily::implicit(p, 42);
  auto probes = default_probe_sets(f, 9, 10);
  auto rep = check_family(f, probes, 400);
  CHECK(rep.sets_probed == 400);
  CHECK(rep.pass);
}

TEST_CASE("serialization round-trips; only explicit families serialize") {
  auto p = hand_params(100, 10, 30);
  auto f = RepFamily::draw_explicit(p, 8);
  std::stringstream ss;
  f.save(ss);
  auto g = RepFamily::load(ss);
  CHECK(g.params().k == 100);
  CHECK(g.params().s == 10);
  CHECK(g.params().t == 30);
  for (std::uint64_t i = 0; i < 30; ++i) CHECK(g.set(i) == f.set(i));

  std::stringstream bad("NOPE");
  CHECK_THROWS_AS(static_cast<void>(RepFamily::load(bad)), RepsetError);

  auto impl = RepFamily::implicit(family_params(1024, 0.5, 0.125, 0.125), 5);
  std::stringstream out;
  CHECK_THROWS_AS(impl.save(out), RepsetError);
}

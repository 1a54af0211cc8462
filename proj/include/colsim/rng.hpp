// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_RNG_HPP
#define COLSIM_RNG_HPP

#include <algorithm>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "colsim/bits.hpp"

namespace colsim {

namespace detail {

// Two rounds of the splitmix64 finalizer; full avalanche on 64 bits.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t key4(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  std::uint64_t h = mix64(a ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ b * 0x13198a2e03707345ULL);
  h = mix64(h ^ c * 0xa4093822299f31d0ULL);
  h = mix64(h ^ d * 0x082efa98ec4e6c89ULL);
  return h;
}

}  // namespace detail

/// Counter-based generator keyed by (seed, stream, round, draw index).
/// Stateless between draws apart from the counter, so two parties with
/// the same key always observe the same sequence. Streams are used for
/// node IDs; the round component keeps per-round draws independent
/// without any cross-round state.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  void set_round(std::uint64_t r) {
    round_ = r;
    counter_ = 0;
  }

  std::uint64_t next() { return detail::key4(seed_, stream_, round_, counter_++); }

  // Unbiased uniform draw from [0, k) via rejection.
  std::uint64_t below(std::uint64_t k) {
    if (k <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % k;
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  /// Sorted s-element subset of [0, k), uniform without replacement
  /// (Floyd's algorithm).
  std::vector<std::uint32_t> sample_subset(std::uint64_t k, std::uint64_t s) {
    if (s > k) throw std::invalid_argument("sample_subset: s > k");
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(s) * 2);
    for (std::uint64_t j = k - s; j < k; ++j) {
      const std::uint64_t t = below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint32_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Same subset distribution, returned as a k-bit mask.
  BitVec sample_subset_mask(std::uint64_t k, std::uint64_t s) {
    if (s > k) throw std::invalid_argument("sample_subset_mask: s > k");
    BitVec mask(static_cast<std::size_t>(k));
    for (std::uint64_t j = k - s; j < k; ++j) {
      const std::uint64_t t = below(j + 1);
      if (mask.get(static_cast<std::size_t>(t))) {
        mask.set(static_cast<std::size_t>(j));
      } else {
        mask.set(static_cast<std::size_t>(t));
      }
    }
    return mask;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t round_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace colsim

#endif  // COLSIM_RNG_HPP

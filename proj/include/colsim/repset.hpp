// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_REPSET_HPP
#define COLSIM_REPSET_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "colsim/bits.hpp"
#include "colsim/rng.hpp"

namespace colsim {

struct RepsetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parameters of an (alpha, delta, nu)-representative family over [k].
///   s = ceil(3 ln(4/nu) / (alpha^2 delta))
///   t = max( ceil(3 (k ln2 + 1) exp(alpha^2 delta s / 3)),
///            ceil(3 k (ln(2k) + 1) / (alpha^2 s)) )
struct RepFamilyParams {
  std::uint64_t k = 0;
  double alpha = 0.0;
  double delta = 0.0;
  double nu = 0.0;
  std::uint64_t s = 0;
  std::uint64_t t = 0;
  // When the requested nu would need s > k, s is clamped to k and the
  // guarantee level degrades to effective_nu; unclamped params have
  // effective_nu == nu.
  bool clamped = false;
  double effective_nu = 0.0;
};

namespace detail {

constexpr std::uint64_t kMaxFamilySize = std::uint64_t{1} << 62;

inline std::uint64_t family_t_for(std::uint64_t k, double alpha, double delta,
                                  std::uint64_t s) {
  const long double a2d = static_cast<long double>(alpha) * alpha * delta;
  const long double t1 =
      3.0L * (static_cast<long double>(k) * std::log(2.0L) + 1.0L) *
      std::exp(a2d * static_cast<long double>(s) / 3.0L);
  const long double t2 = 3.0L * static_cast<long double>(k) *
                         (std::log(2.0L * static_cast<long double>(k)) + 1.0L) /
                         (static_cast<long double>(alpha) * alpha *
                          static_cast<long double>(s));
  const long double t = std::max(std::ceil(t1), std::ceil(t2));
  if (t >= static_cast<long double>(kMaxFamilySize)) return kMaxFamilySize;
  return static_cast<std::uint64_t>(t);
}

inline std::uint64_t family_s_raw(double alpha, double delta, double nu) {
  const double v = 3.0 * std::log(4.0 / nu) / (alpha * alpha * delta);
  return static_cast<std::uint64_t>(std::ceil(v));
}

inline void validate_abc(std::uint64_t k, double alpha, double delta, double nu) {
  if (k == 0) throw RepsetError("family_params: k must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw RepsetError("family_params: alpha not in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw RepsetError("family_params: delta not in (0,1)");
  if (!(nu > 0.0 && nu < 1.0)) throw RepsetError("family_params: nu not in (0,1)");
}

}  // namespace detail

inline RepFamilyParams family_params(std::uint64_t k, double alpha, double delta, double nu) {
  detail::validate_abc(k, alpha, delta, nu);
  RepFamilyParams p;
  p.k = k;
  p.alpha = alpha;
  p.delta = delta;
  p.nu = nu;
  p.s = detail::family_s_raw(alpha, delta, nu);
  if (p.s > k)
    throw RepsetError("family_params: universe too small (s=" + std::to_string(p.s) +
                      " > k=" + std::to_string(k) + ")");
  p.t = detail::family_t_for(k, alpha, delta, p.s);
  p.effective_nu = nu;
  return p;
}

/// Like family_params, but clamps s to k when the requested nu is
/// unachievable at this universe size. With s == k every set is the
/// whole universe, which satisfies all three family properties for any
/// nu, so clamping trades sampling sparsity, not correctness.
inline RepFamilyParams family_params_clamped(std::uint64_t k, double alpha, double delta,
                                             double nu) {
  detail::validate_abc(k, alpha, delta, nu);
  RepFamilyParams p;
  p.k = k;
  p.alpha = alpha;
  p.delta = delta;
  p.nu = nu;
  p.s = detail::family_s_raw(alpha, delta, nu);
  p.effective_nu = nu;
  if (p.s > k) {
    p.s = k;
    p.clamped = true;
    p.effective_nu =
        std::min(1.0, std::max(nu, 4.0 * std::exp(-alpha * alpha * delta *
                                                  static_cast<double>(k) / 3.0)));
  }
  p.t = detail::family_t_for(k, alpha, delta, p.s);
  return p;
}

/// A representative family, either materialized (t stored sets) or
/// implicit (the i-th set is re-derived from (family_seed, i) on demand;
/// implicit lookups are memoized).
class RepFamily {
public:
  static RepFamily explicit_from_sets(RepFamilyParams params,
                                      std::vector<std::vector<std::uint32_t>> sets) {
    if (sets.size() != params.t)
      throw RepsetError("explicit family: set count differs from t");
    RepFamily f(std::move(params));
    f.sets_ = std::move(sets);
    f.masks_.reserve(f.sets_.size());
    for (auto& S : f.sets_) {
      if (S.size() != f.params_.s) throw RepsetError("explicit family: wrong set size");
      BitVec m(f.params_.k);
      std::uint32_t prev = 0;
      bool first = true;
      for (std::uint32_t e : S) {
        if (e >= f.params_.k) throw RepsetError("explicit family: element out of range");
        if (!first && e <= prev) throw RepsetError("explicit family: set not sorted/distinct");
        prev = e;
        first = false;
        m.set(e);
      }
      f.masks_.push_back(std::move(m));
    }
    return f;
  }

  /// One fresh random draw of t s-subsets (no verification).
  static RepFamily draw_explicit(const RepFamilyParams& params, std::uint64_t seed) {
    std::vector<std::vector<std::uint32_t>> sets;
    sets.reserve(params.t);
    for (std::uint64_t i = 0; i < params.t; ++i) {
      CounterRng rng(seed ^ 0x5E7FA417ULL, i);
      sets.push_back(rng.sample_subset(params.k, params.s));
    }
    return explicit_from_sets(params, std::move(sets));
  }

  static RepFamily implicit(RepFamilyParams params, std::uint64_t family_seed) {
    RepFamily f(std::move(params));
    f.family_seed_ = family_seed;
    return f;
  }

  const RepFamilyParams& params() const { return params_; }
  bool is_explicit() const { return !family_seed_.has_value(); }
  std::uint64_t family_seed() const { return family_seed_.value(); }

  /// The i-th set, sorted ascending. Wire masks over this set use this order.
  const std::vector<std::uint32_t>& set(std::uint64_t i) const {
    check_index(i);
    if (is_explicit()) return sets_[i];
    return cached(i).elems;
  }

  /// The i-th set as a k-bit mask.
  const BitVec& set_mask(std::uint64_t i) const {
    check_index(i);
    if (is_explicit()) return masks_[i];
    return cached(i).mask;
  }

  void save(std::ostream& out) const {
    if (!is_explicit()) throw RepsetError("save: only explicit families are serializable");
    out.write("CSRF", 4);
    auto w64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto wd = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    w64(params_.k);
    w64(params_.s);
    w64(params_.t);
    wd(params_.alpha);
    wd(params_.delta);
    wd(params_.nu);
    const int eb = ceil_log2(params_.k);
    BitVec packed;
    for (const auto& S : sets_)
      for (std::uint32_t e : S) packed.append_bits(e, eb);
    const std::uint64_t nbits = packed.size();
    w64(nbits);
    out.write(reinterpret_cast<const char*>(packed.words().data()),
              static_cast<std::streamsize>(packed.words().size() * 8));
  }

  static RepFamily load(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "CSRF") throw RepsetError("load: bad magic");
    auto r64 = [&]() {
      std::uint64_t v;
      in.read(reinterpret_cast<char*>(&v), 8);
      return v;
    };
    auto rd = [&]() {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      return v;
    };
    RepFamilyParams p;
    p.k = r64();
    p.s = r64();
    p.t = r64();
    p.alpha = rd();
    p.delta = rd();
    p.nu = rd();
    p.effective_nu = p.nu;
    const std::uint64_t nbits = r64();
    const int eb = ceil_log2(p.k);
    if (nbits != p.t * p.s * static_cast<std::uint64_t>(eb))
      throw RepsetError("load: size mismatch");
    std::vector<std::uint64_t> words((nbits + 63) / 64, 0);
    in.read(reinterpret_cast<char*>(words.data()),
            static_cast<std::streamsize>(words.size() * 8));
    if (!in) throw RepsetError("load: truncated file");
    BitVec packed;
    for (std::uint64_t w : words) packed.append_bits(w, 64);
    std::vector<std::vector<std::uint32_t>> sets(p.t);
    std::size_t pos = 0;
    for (auto& S : sets) {
      S.reserve(p.s);
      for (std::uint64_t j = 0; j < p.s; ++j) {
        S.push_back(static_cast<std::uint32_t>(packed.get_bits(pos, eb)));
        pos += static_cast<std::size_t>(eb);
      }
    }
    return explicit_from_sets(p, std::move(sets));
  }

private:
  explicit RepFamily(RepFamilyParams p) : params_(std::move(p)) {}

  void check_index(std::uint64_t i) const {
    if (i >= params_.t) throw RepsetError("set index out of range");
  }

  struct CachedSet {
    std::vector<std::uint32_t> elems;
    BitVec mask;
  };

  struct Cache {
    std::mutex mu;
    std::unordered_map<std::uint64_t, CachedSet> map;
  };

  const CachedSet& cached(std::uint64_t i) const {
    std::lock_guard<std::mutex> lk(cache_->mu);
    auto it = cache_->map.find(i);
    if (it != cache_->map.end()) return it->second;
    CounterRng rng(*family_seed_ ^ 0x5E7FA417ULL, i);
    CachedSet cs;
    cs.mask = rng.sample_subset_mask(params_.k, params_.s);
    cs.elems.reserve(params_.s);
    for (std::size_t b = 0; b < cs.mask.size(); ++b)
      if (cs.mask.get(b)) cs.elems.push_back(static_cast<std::uint32_t>(b));
    return cache_->map.emplace(i, std::move(cs)).first->second;
  }

  RepFamilyParams params_;
  std::vector<std::vector<std::uint32_t>> sets_;
  std::vector<BitVec> masks_;
  std::optional<std::uint64_t> family_seed_;
  mutable std::unique_ptr<Cache> cache_ = std::make_unique<Cache>();
};

// ---------------------------------------------------------------------------
// Verification (Monte-Carlo over caller-supplied probe sets T)

struct CheckReport {
  struct TResult {
    std::size_t t_size = 0;
    double unusual_fraction = 0.0;
    bool pass = false;
  };
  std::vector<TResult> per_t;
  double elem_freq_min_ratio = 0.0;  // min over u of freq / (s t / k)
  double elem_freq_max_ratio = 0.0;
  bool elem_freq_pass = false;       // Eq. 3
  bool pass = false;
  std::uint64_t sets_probed = 0;
};

/// Checks the three family properties against the supplied T samples.
/// For explicit families, intersections and element frequencies are
/// computed over all t sets; for implicit families, over probe_count
/// sampled indices (frequency bounds get a confidence-interval margin).
inline CheckReport check_family(const RepFamily& f,
                                const std::vector<std::vector<std::uint32_t>>& t_samples,
                                std::uint64_t probe_count = 0) {
  if (t_samples.empty()) throw RepsetError("check_family: no T samples supplied");
  const auto& p = f.params();
  const double nu = p.effective_nu;
  const double sd = static_cast<double>(p.s);
  const double kd = static_cast<double>(p.k);

  std::vector<std::uint64_t> indices;
  if (f.is_explicit()) {
    indices.resize(p.t);
    for (std::uint64_t i = 0; i < p.t; ++i) indices[i] = i;
  } else {
    if (probe_count == 0) throw RepsetError("check_family: implicit family needs probe_count");
    CounterRng rng(0x9c0ffee1ULL, 0);
    indices.reserve(probe_count);
    for (std::uint64_t i = 0; i < probe_count; ++i) indices.push_back(rng.below(p.t));
  }
  const auto nprobe = static_cast<double>(indices.size());

  std::vector<BitVec> t_masks;
  t_masks.reserve(t_samples.size());
  for (const auto& T : t_samples) {
    BitVec m(p.k);
    for (std::uint32_t u : T) {
      if (u >= p.k) throw RepsetError("check_family: T element out of range");
      m.set(u);
    }
    t_masks.push_back(std::move(m));
  }

  CheckReport rep;
  rep.sets_probed = indices.size();
  rep.per_t.resize(t_samples.size());

  std::vector<std::uint64_t> elem_hits(p.k, 0);
  for (std::uint64_t i : indices) {
    for (std::uint32_t u : f.set(i)) ++elem_hits[u];
  }

  auto check_one = [&](std::size_t ti) {
    const auto& tm = t_masks[ti];
    const std::size_t tsz = tm.count();
    const bool large = static_cast<double>(tsz) >= p.delta * kd - 1e-12;
    const double lo = (1.0 - p.alpha) * static_cast<double>(tsz) / kd * sd;
    const double hi = (1.0 + p.alpha) * static_cast<double>(tsz) / kd * sd;
    const double small_hi = (1.0 + p.alpha) * p.delta * sd;
    std::uint64_t unusual = 0;
    for (std::uint64_t i : indices) {
      const auto cnt = static_cast<double>(BitVec::and_count(f.set_mask(i), tm));
      const bool bad = large ? (cnt < lo - 1e-9 || cnt > hi + 1e-9)
                             : (cnt > small_hi + 1e-9);
      unusual += bad ? 1 : 0;
    }
    CheckReport::TResult r;
    r.t_size = tsz;
    r.unusual_fraction = static_cast<double>(unusual) / nprobe;
    r.pass = r.unusual_fraction <= nu + 1e-12;
    rep.per_t[ti] = r;
  };

  const std::size_t nthreads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                            t_samples.size());
  if (nthreads <= 1 || t_samples.size() < 4) {
    for (std::size_t ti = 0; ti < t_samples.size(); ++ti) check_one(ti);
  } else {
    std::vector<std::future<void>> futs;
    for (std::size_t th = 0; th < nthreads; ++th) {
      futs.push_back(std::async(std::launch::async, [&, th] {
        for (std::size_t ti = th; ti < t_masks.size(); ti += nthreads) check_one(ti);
      }));
    }
    for (auto& fu : futs) fu.get();
  }

  // Eq. 3: element frequency vs [1-alpha, 1+alpha] * s/k of probed sets.
  const double expect = sd / kd * nprobe;
  double margin = 0.0;
  if (!f.is_explicit()) {
    // 4-sigma binomial margin for the sampled estimate
    margin = 4.0 * std::sqrt(std::max(expect, 1.0));
  }
  rep.elem_freq_min_ratio = 1e300;
  rep.elem_freq_max_ratio = 0.0;
  rep.elem_freq_pass = true;
  for (std::uint64_t u = 0; u < p.k; ++u) {
    const auto h = static_cast<double>(elem_hits[u]);
    rep.elem_freq_min_ratio = std::min(rep.elem_freq_min_ratio, h / expect);
    rep.elem_freq_max_ratio = std::max(rep.elem_freq_max_ratio, h / expect);
    if (h < (1.0 - p.alpha) * expect - margin - 1e-9 ||
        h > (1.0 + p.alpha) * expect + margin + 1e-9)
      rep.elem_freq_pass = false;
  }

  rep.pass = rep.elem_freq_pass;
  for (const auto& r : rep.per_t) rep.pass = rep.pass && r.pass;
  return rep;
}

/// Probe sets for verification: random T per size class, plus structured
/// adversarial ones (complements and unions of family members).
inline std::vector<std::vector<std::uint32_t>> default_probe_sets(const RepFamily& f,
                                                                  std::uint64_t seed,
                                                                  std::size_t per_class) {
  const auto& p = f.params();
  CounterRng rng(seed ^ 0x7E57AB1E1ULL, 1);
  std::vector<std::vector<std::uint32_t>> out;
  const std::uint64_t dk = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(p.delta * static_cast<double>(p.k))));
  const std::uint64_t sizes[] = {dk, p.k / 4, p.k / 2, 3 * p.k / 4, p.k};
  for (std::uint64_t sz : sizes) {
    if (sz == 0 || sz > p.k) continue;
    for (std::size_t i = 0; i < per_class; ++i) out.push_back(rng.sample_subset(p.k, sz));
  }
  // Adversarial: complement of a family set, and a union of two sets.
  const std::uint64_t probes = std::min<std::uint64_t>(p.t, 4);
  for (std::uint64_t i = 0; i < probes; ++i) {
    const BitVec& m = f.set_mask(i);
    std::vector<std::uint32_t> comp;
    for (std::uint32_t u = 0; u < p.k; ++u)
      if (!m.get(u)) comp.push_back(u);
    if (!comp.empty()) out.push_back(std::move(comp));
  }
  if (p.t >= 2) {
    BitVec un = f.set_mask(0);
    const BitVec& m1 = f.set_mask(1);
    std::vector<std::uint32_t> u2;
    for (std::uint32_t u = 0; u < p.k; ++u)
      if (un.get(u) || m1.get(u)) u2.push_back(u);
    out.push_back(std::move(u2));
  }
  return out;
}

/// Draws fresh random families until one passes check_family.
inline RepFamily build_explicit_family(const RepFamilyParams& params, std::uint64_t seed,
                                       int max_attempts = 3, std::size_t probes_per_class = 50) {
  for (int a = 0; a < max_attempts; ++a) {
    RepFamily f = RepFamily::draw_explicit(params, seed + static_cast<std::uint64_t>(a));
    const auto probes = default_probe_sets(f, seed + 1000, probes_per_class);
    if (check_family(f, probes).pass) return f;
  }
  throw RepsetError("build_explicit_family: all attempts failed verification");
}

}  // namespace colsim

#endif  // COLSIM_REPSET_HPP

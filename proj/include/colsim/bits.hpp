// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_BITS_HPP
#define COLSIM_BITS_HPP

#include <bit>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace colsim {

/// Variable-length bit string, LSB-first within 64-bit words.
/// Doubles as a dynamic bitset over [0, size) for palette masks.
class BitVec {
public:
  BitVec() = default;
  explicit BitVec(std::size_t nbits) : len_(nbits), words_((nbits + 63) / 64, 0) {}

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  void clear() {
    len_ = 0;
    words_.clear();
  }

  // Appends the low `nbits` of `value`.
  void append_bits(std::uint64_t value, int nbits) {
    assert(nbits >= 0 && nbits <= 64);
    if (nbits == 0) return;
    if (nbits < 64) value &= (std::uint64_t{1} << nbits) - 1;
    const std::size_t word = len_ / 64;
    const int off = static_cast<int>(len_ % 64);
    if (word >= words_.size()) words_.push_back(0);
    words_[word] |= value << off;
    if (off + nbits > 64) {
      words_.push_back(value >> (64 - off));
    }
    len_ += static_cast<std::size_t>(nbits);
  }

  void append(const BitVec& other) {
    std::size_t pos = 0;
    while (pos < other.len_) {
      const int take = static_cast<int>(std::min<std::size_t>(64, other.len_ - pos));
      append_bits(other.get_bits(pos, take), take);
      pos += static_cast<std::size_t>(take);
    }
  }

  std::uint64_t get_bits(std::size_t pos, int nbits) const {
    assert(nbits >= 0 && nbits <= 64);
    assert(pos + static_cast<std::size_t>(nbits) <= len_);
    if (nbits == 0) return 0;
    const std::size_t word = pos / 64;
    const int off = static_cast<int>(pos % 64);
    std::uint64_t v = words_[word] >> off;
    if (off + nbits > 64) v |= words_[word + 1] << (64 - off);
    if (nbits < 64) v &= (std::uint64_t{1} << nbits) - 1;
    return v;
  }

  bool get(std::size_t i) const {
    assert(i < len_);
    return (words_[i / 64] >> (i % 64)) & 1;
  }

  void set(std::size_t i, bool v = true) {
    assert(i < len_);
    if (v)
      words_[i / 64] |= std::uint64_t{1} << (i % 64);
    else
      words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  // Index of the j-th set bit (0-based); size() if fewer than j+1 bits set.
  std::size_t nth_set(std::size_t j) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      const auto pc = static_cast<std::size_t>(std::popcount(words_[w]));
      if (j < pc) {
        std::uint64_t x = words_[w];
        for (std::size_t r = 0; r < j; ++r) x &= x - 1;
        return w * 64 + static_cast<std::size_t>(std::countr_zero(x));
      }
      j -= pc;
    }
    return len_;
  }

  void and_with(const BitVec& other) {
    assert(len_ == other.len_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  }

  static std::size_t and_count(const BitVec& a, const BitVec& b) {
    assert(a.len_ == b.len_);
    std::size_t c = 0;
    for (std::size_t w = 0; w < a.words_.size(); ++w)
      c += static_cast<std::size_t>(std::popcount(a.words_[w] & b.words_[w]));
    return c;
  }

  friend bool operator==(const BitVec& a, const BitVec& b) {
    if (a.len_ != b.len_) return false;
    for (std::size_t w = 0; w < a.words_.size(); ++w)
      if (a.words_[w] != b.words_[w]) return false;
    return true;
  }

  void zero() {
    for (auto& w : words_) w = 0;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

private:
  std::size_t len_ = 0;
  std::vector<std::uint64_t> words_;
};

class BitReader {
public:
  explicit BitReader(const BitVec& v) : v_(&v) {}

  std::uint64_t read(int nbits) {
    const std::uint64_t r = v_->get_bits(pos_, nbits);
    pos_ += static_cast<std::size_t>(nbits);
    return r;
  }

  std::size_t remaining() const { return v_->size() - pos_; }

private:
  const BitVec* v_;
  std::size_t pos_ = 0;
};

/// One per-edge, per-direction, per-round message. The engine enforces
/// bit_len <= B at send time; payloads longer than B travel as a
/// sequence of frames (see fragment()). Capacity is one machine word,
/// which covers every bandwidth B = ceil(log2 n) we simulate.
struct Frame {
  std::uint64_t data = 0;
  std::uint16_t bit_len = 0;
};

inline int ceil_log2(std::uint64_t x) {
  if (x <= 1) return x == 0 ? 0 : 1;  // 1 value still takes one bit on the wire
  return 64 - std::countl_zero(x - 1);
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// Splits `payload` into ceil(len/B) frames of at most B bits each.
inline std::vector<Frame> fragment(const BitVec& payload, int B) {
  if (B <= 0 || B > 64) throw std::invalid_argument("fragment: bandwidth out of range");
  if (payload.empty()) throw std::invalid_argument("fragment: empty payload");
  std::vector<Frame> out;
  std::size_t pos = 0;
  while (pos < payload.size()) {
    const int take = static_cast<int>(std::min<std::size_t>(B, payload.size() - pos));
    out.push_back(Frame{payload.get_bits(pos, take), static_cast<std::uint16_t>(take)});
    pos += static_cast<std::size_t>(take);
  }
  return out;
}

/// Fragment `idx` of `payload` under bandwidth B, without materializing the rest.
inline Frame fragment_at(const BitVec& payload, int B, int idx) {
  const std::size_t pos = static_cast<std::size_t>(idx) * static_cast<std::size_t>(B);
  assert(pos < payload.size());
  const int take = static_cast<int>(std::min<std::size_t>(B, payload.size() - pos));
  return Frame{payload.get_bits(pos, take), static_cast<std::uint16_t>(take)};
}

inline void defragment_into(BitVec& sink, const Frame& f) {
  sink.append_bits(f.data, f.bit_len);
}

/// Calls f(i) for every set bit i in payload[bitoff, bitoff+len).
/// Indices are relative to bitoff. Word-at-a-time scan.
template <class F>
inline void scan_set_bits(const BitVec& payload, std::size_t bitoff, std::size_t len, F&& f) {
  std::size_t done = 0;
  while (done < len) {
    const int take = static_cast<int>(std::min<std::size_t>(64, len - done));
    std::uint64_t w = payload.get_bits(bitoff + done, take);
    while (w) {
      f(done + static_cast<std::size_t>(std::countr_zero(w)));
      w &= w - 1;
    }
    done += static_cast<std::size_t>(take);
  }
}

}  // namespace colsim

#endif  // COLSIM_BITS_HPP

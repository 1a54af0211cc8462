// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "colsim/bits.hpp"

using namespace colsim;

TEST_CASE("append and read back arbitrary widths") {
  BitVec v;
  v.append_bits(0b1011, 4);
  v.append_bits(0x1234, 16);
  v.append_bits(0xFFFFFFFFFFFFFFFFull, 64);
  v.append_bits(1, 1);
  CHECK(v.size() == 85);
  CHECK(v.get_bits(0, 4) == 0b1011);
  CHECK(v.get_bits(4, 16) == 0x1234);
  CHECK(v.get_bits(20, 64) == 0xFFFFFFFFFFFFFFFFull);
  CHECK(v.get_bits(84, 1) == 1);

  BitReader r(v);
  CHECK(r.read(4) == 0b1011);
  CHECK(r.read(16) == 0x1234);
  CHECK(r.remaining() == 65);
}

TEST_CASE("bitset operations") {
  BitVec v(130);
  CHECK(v.count() == 0);
  v.set(0);
  v.set(64);
  v.set(129);
  CHECK(v.count() == 3);
  CHECK(v.get(64));
  CHECK(v.nth_set(0) == 0);
  CHECK(v.nth_set(1) == 64);
  CHECK(v.nth_set(2) == 129);
  CHECK(v.nth_set(3) == v.size());
  v.set(64, false);
  CHECK(v.count() == 2);

  BitVec w(130);
  w.set(0);
  w.set(100);
  CHECK(BitVec::and_count(v, w) == 1);
  v.and_with(w);
  CHECK(v.count() == 1);
  CHECK(v.get(0));

  v.zero();
  CHECK(v.count() == 0);
  CHECK(v.size() == 130);
}

TEST_CASE("equality compares length and content") {
  BitVec a, b;
  a.append_bits(5, 3);
  b.append_bits(5, 3);
  CHECK(a == b);
  b.append_bits(0, 1);
  CHECK_FALSE(a == b);
}

TEST_CASE("append concatenates bit strings") {
  BitVec a, b;
  a.append_bits(0x3, 2);
  for (int i = 0; i < 3; ++i) b.append_bits(0xDEADBEEFCAFEF00Dull, 64);
  a.append(b);
  CHECK(a.size() == 194);
  CHECK(a.get_bits(0, 2) == 0x3);
  CHECK(a.get_bits(2, 64) == 0xDEADBEEFCAFEF00Dull);
  CHECK(a.get_bits(66, 64) == 0xDEADBEEFCAFEF00Dull);
}

TEST_CASE("ceil_log2") {
  CHECK(ceil_log2(0) == 0);
  CHECK(ceil_log2(1) == 1);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);
}

TEST_CASE("fragment: exact fit is one frame") {
  BitVec p;
  p.append_bits(0xABC, 12);
  auto frames = fragment(p, 12);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].bit_len == 12);
  CHECK(frames[0].data == 0xABC);
}

TEST_CASE("fragment: 25 bits at B=12 gives frames of 12,12,1") {
  BitVec p;
  p.append_bits(0x1FFFFFF, 25);
  auto frames = fragment(p, 12);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].bit_len == 12);
  CHECK(frames[1].bit_len == 12);
  CHECK(frames[2].bit_len == 1);

  BitVec back;
  for (const auto& f : frames) defragment_into(back, f);
  CHECK(back == p);
}

TEST_CASE("fragment round-trips random payloads") {
  for (int len : {1, 7, 12, 13, 64, 65, 200}) {
    BitVec p;
    std::uint64_t x = 0x9E3779B97F4A7C15ull;
    for (int i = 0; i < len; ++i) {
      x ^= x << 13;
      x ^= x >> 7;
      p.append_bits(x & 1, 1);
    }
    for (int B : {1, 5, 12, 64}) {
      auto frames = fragment(p, B);
      CHECK(frames.size() == static_cast<std::size_t>((len + B - 1) / B));
      BitVec back;
      for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(frames[i].bit_len <= B);
        CHECK(frames[i].data == fragment_at(p, B, static_cast<int>(i)).data);
        defragment_into(back, frames[i]);
      }
      CHECK(back == p);
    }
  }
}

TEST_CASE("fragment rejects bad input") {
  BitVec empty;
  CHECK_THROWS(fragment(empty, 8));
  BitVec p;
  p.append_bits(1, 1);
  CHECK_THROWS(fragment(p, 0));
  CHECK_THROWS(fragment(p, 65));
}

TEST_CASE("scan_set_bits visits exactly the set positions in a window") {
  BitVec v;
  v.append_bits(0, 5);  // offset prefix
  BitVec mask(140);
  mask.set(0);
  mask.set(63);
  mask.set(64);
  mask.set(139);
  v.append(mask);
  std::vector<std::size_t> seen;
  scan_set_bits(v, 5, 140, [&](std::size_t pos) { seen.push_back(pos); });
  CHECK(seen == std::vector<std::size_t>{0, 63, 64, 139});
}

// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_PHASED_HPP
#define COLSIM_PHASED_HPP

#include <cassert>
#include <cstdint>
#include <vector>

#include "colsim/bits.hpp"
#include "colsim/sim.hpp"

namespace colsim {

/// CRTP base for protocols built from fixed-length sub-phases.
///
/// Every node agrees (from shared constants) on a sequence of
/// sub-phases; sub-phase q has one payload length L_q, occupies
/// ceil(L_q / B) consecutive rounds, and on each port a node either
/// sends the full L_q-bit payload (fragmented) or nothing. Payloads
/// sent in sub-phase q are fully delivered by the first round of
/// sub-phase q+1, where the derived class processes them.
///
/// Derived must provide:
///   void begin_subphase(RoundIO&);  // call start_subphase(L) once, then
///                                   // queue_payload(port, bits) as needed
///   void end_subphase(RoundIO&);    // consume received(port) payloads
/// and may use finished_ to signal completion to the engine.
template <class Derived>
class PhasedProgram {
public:
  explicit PhasedProgram(std::uint32_t degree)
      : tx_(degree), rx_(degree) {}

  void step(RoundIO& io) {
    for (std::uint32_t p = 0; p < io.degree(); ++p)
      if (const Frame* f = io.in(p)) defragment_into(rx_[p], *f);
    if (!started_) {
      started_ = true;
      self().begin_subphase(io);
    } else if (boundary_) {
      boundary_ = false;
      self().end_subphase(io);
      for (auto& b : rx_) b.clear();
      self().begin_subphase(io);
    }
    for (std::uint32_t p = 0; p < io.degree(); ++p) {
      if (tx_[p].empty()) continue;
      io.send(p, fragment_at(tx_[p], io.bandwidth(), subround_));
    }
    ++subround_;
    if (subround_ >= duration_) {
      boundary_ = true;
      subround_ = 0;
    }
  }

  bool finished() const { return finished_; }

protected:
  // Called exactly once from begin_subphase.
  void start_subphase(int payload_bits, const RoundIO& io) {
    assert(payload_bits >= 1);
    payload_bits_ = payload_bits;
    duration_ = ceil_div(payload_bits, io.bandwidth());
    for (auto& b : tx_) b.clear();
  }

  void queue_payload(std::uint32_t port, BitVec bits) {
    assert(static_cast<int>(bits.size()) == payload_bits_);
    tx_[port] = std::move(bits);
  }

  void queue_broadcast(const RoundIO& io, const BitVec& bits) {
    for (std::uint32_t p = 0; p < io.degree(); ++p) queue_payload(p, bits);
  }

  /// Payload received on `port` in the sub-phase just ended; nullptr if
  /// the neighbor sent nothing.
  const BitVec* received(std::uint32_t port) const {
    if (rx_[port].empty()) return nullptr;
    assert(static_cast<int>(rx_[port].size()) == payload_bits_);
    return &rx_[port];
  }

  bool finished_ = false;

private:
  Derived& self() { return static_cast<Derived&>(*this); }

  std::vector<BitVec> tx_, rx_;
  int payload_bits_ = 1;
  int duration_ = 1;
  int subround_ = 0;
  bool started_ = false;
  bool boundary_ = false;
};

}  // namespace colsim

#endif  // COLSIM_PHASED_HPP

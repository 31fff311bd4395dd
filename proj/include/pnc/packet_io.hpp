#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pnc/signal_model.hpp"

namespace pnc {

struct PacketTruth {
  Bits bits_a;
  Bits bits_b;
  std::vector<Complex2> h;  // rotated channel per symbol
  CfoPair cfo;
};

// One received packet as written by `pncsim simulate --dump-packet` and read
// by `pncsim detect`.
//
//   # N=<n>,T=<seconds>,N0=<n0>[,f_a_hz=<hz>,f_b_hz=<hz>]
//   n,r1_re,r1_im,r2_re,r2_im[,s_a,s_b,h_a_re,h_a_im,h_b_re,h_b_im]
//   0,...
//
// The ground-truth columns and CFOs are present together or not at all.
struct PacketRecord {
  double symbol_period = 1e-6;
  double n0 = 0.0;
  std::vector<Complex2> r;
  std::optional<PacketTruth> truth;
};

void write_packet_csv(std::ostream& out, const PacketRecord& p);
// Throws std::runtime_error with the offending line number.
PacketRecord read_packet_csv(std::istream& in);

PacketRecord make_record(const PacketScenario& scenario, const SimulatedPacket& pkt,
                         const SystemParams& params);

}  // namespace pnc

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pnc/types.hpp"

namespace pnc {

// Physical parameters shared by the simulator and the detectors.
struct SystemParams {
  double symbol_period = 1e-6;      // T, seconds
  double tone_offset = 0.5e6;       // delta f, Hz; 1/(2T) gives orthogonal tones
  std::size_t n_symbols = 128;      // N
  double n0 = 0.1;                  // per-branch complex noise variance
  double cfo_min = -10e3;           // Hz
  double cfo_max = 10e3;            // Hz

  // Defaults for a given symbol period: orthogonal tones, +-10 kHz CFO range.
  static SystemParams with_period(double t, std::size_t n, double n0);

  // -2 pi delta_f T: per-symbol CFSK phase step magnitude.
  double cfsk_step() const;
  // 2 pi T: phase accrued per symbol per Hz of CFO.
  double cfo_step() const;

  bool contains(CfoPair f) const;
  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct PacketScenario {
  Bits bits_a;
  Bits bits_b;
  cplx h_a{1.0, 0.0};  // pure channel gains
  cplx h_b{1.0, 0.0};
  CfoPair cfo;
  double phase_a = 0.0;  // initial RF phase offsets, radians
  double phase_b = 0.0;
  std::uint64_t seed = 0;  // noise seed

  BitPair bits_at(std::size_t n) const { return BitPair{bits_a[n], bits_b[n]}; }
  // Channel pair at n = 0 with the initial phases folded in.
  Complex2 initial_channel() const;
  void validate(const SystemParams& params) const;
};

// Phase-incorporated channel of one symbol.
struct RotatedChannelState {
  Complex2 h;
  std::size_t n = 0;
};

enum class ObservationModel {
  approx,  // r_n = Z_s h_n + w_n
  exact,   // includes the CFO-induced alpha/beta leakage terms
};

struct SimulatedPacket {
  std::vector<Complex2> r;
  std::vector<RotatedChannelState> channels;
};

// Phase accumulated by continuous-phase FSK before symbol n.
double cfsk_phase(const Bits& bits, std::size_t n, const SystemParams& params);

// Observation matrix: rows are correlator branches, columns are users.
CMatrix2 z_matrix(BitPair s);

// Per-symbol channel rotation h_{n+1} = G h_n for bits s and CFOs f.
CMatrix2 g_matrix(BitPair s, CfoPair f, const SystemParams& params);

// Correlator gain on the matched tone (alpha) and leakage into the other
// tone (beta) for a user with CFO f_u.
std::pair<cplx, cplx> alpha_beta(double f_u, const SystemParams& params);

// Sequence of rotated channels h_0..h_{N-1} of a scenario.
std::vector<RotatedChannelState> rotated_channels(const PacketScenario& scenario,
                                                  const SystemParams& params);

SimulatedPacket simulate_packet(const PacketScenario& scenario,
                                const SystemParams& params,
                                ObservationModel mode = ObservationModel::approx);

}  // namespace pnc

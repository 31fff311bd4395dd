#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pnc/bp_detector.hpp"
#include "pnc/signal_model.hpp"

namespace pnc {

// Everything the perfect coherent detector is told: the rotated channel of
// every symbol and the CFO pair that produced them.
struct PerfectSideInfo {
  std::vector<Complex2> h;
  CfoPair cfo;

  static PerfectSideInfo from_packet(const SimulatedPacket& pkt, CfoPair cfo);
};

// Per-symbol coherent detection with the true h_n.
DetectionResult perfcd_detect(const std::vector<Complex2>& r, const PerfectSideInfo& side,
                              double n0_det);

struct BruteForceResult {
  std::vector<std::array<double, 4>> pair_pmf;
  std::vector<double> xor_pmf;
  double log_evidence = 0.0;        // stacked route
  double log_evidence_chain = 0.0;  // sequential route
};

inline constexpr std::size_t kBruteForceMaxSymbols = 8;

// Exact posterior by enumerating all 4^N bit-pair sequences at a known CFO
// pair and integrating h_0 in closed form. Uses the same exponent convention
// and the same peak-one prior as the BP detector. Throws std::invalid_argument
// for N > 8 and NumericalError when a sequence leaves h_0 unidentified under a
// flat prior.
BruteForceResult brute_force_posterior(const std::vector<Complex2>& r, CfoPair f,
                                       const PriorSpec& prior, double n0_det,
                                       Convention convention, const SystemParams& params);

}  // namespace pnc

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pnc/scenario.hpp"

namespace pnc {

struct ResultRow {
  std::string scenario;
  double snr_db = 0.0;
  std::string detector;
  std::string gmr;  // "inf" for unreduced, "-" for perfcd
  std::string reduction;
  std::string prior;
  std::size_t packets = 0;  // packets that were detected
  std::size_t bit_errors = 0;
  double ber = 0.0;
  double ber_ci95 = 0.0;
  double mse_h = 0.0;
  double wall_seconds = 0.0;
  std::size_t failures = 0;  // packets aborted with a numerical error
};

struct SweepOptions {
  unsigned threads = 1;
  bool timing = true;  // false writes 0 to wall_seconds for byte-identical output
  std::function<void(const std::string&)> progress;
};

// Counter-based child seed: a pure function of (base, stream, index).
std::uint64_t child_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

// Packet k of a scenario: bits, channel, CFO, phases and noise seed. The same
// draw is used at every SNR point.
PacketScenario draw_packet(const Scenario& s, std::size_t k);

// CFO grid the BP detector uses for a packet whose true CFO is f.
std::vector<CfoPair> detector_grid(const Scenario& s, CfoPair f, const SystemParams& params);

DetectorConfig make_detector_config(const Scenario& s, const DetectorSpec& d,
                                    const PacketScenario& packet, const SystemParams& params);

// Runs one packet through one detector; returns XOR bit errors and the sum
// over symbols of |h_n - h_est[n]|^2.
struct PacketOutcome {
  std::size_t bit_errors = 0;
  double sq_error = 0.0;
  bool failed = false;
};
PacketOutcome run_packet(const Scenario& s, const DetectorSpec& d, const PacketScenario& packet,
                         const SimulatedPacket& pkt, const SystemParams& params);

std::vector<ResultRow> run_sweep(const Scenario& s, const SweepOptions& opts = {});

double ber_ci_halfwidth(std::size_t errors, std::size_t bits);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::string results_csv(const std::vector<ResultRow>& rows);

// SNR at which a BER-vs-SNR curve crosses target_ber, by linear interpolation
// of log10(BER) between the two bracketing points. Throws std::domain_error
// when no bracket with positive BERs exists.
double snr_at_ber(std::vector<std::pair<double, double>> curve, double target_ber);
double snr_gap_at_ber(const std::vector<ResultRow>& rows_a, const std::vector<ResultRow>& rows_b,
                      double target_ber);

// Rows of one detector label, in SNR order.
std::vector<ResultRow> rows_for(const std::vector<ResultRow>& rows, const std::string& detector);

}  // namespace pnc

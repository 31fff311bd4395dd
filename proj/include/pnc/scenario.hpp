#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pnc/bp_detector.hpp"
#include "pnc/signal_model.hpp"

namespace pnc {

// Malformed configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiscreteChannel {
  cplx h_a;
  cplx h_b;
  double probability = 0.0;
};

struct ChannelModel {
  enum class Kind { rayleigh, fixed, discrete };
  Kind kind = Kind::rayleigh;
  double var_a = 1.0;  // rayleigh: E|h_u|^2
  double var_b = 1.0;
  cplx h_a{1.0, 0.0};  // fixed
  cplx h_b{1.0, 0.0};
  std::vector<DiscreteChannel> table;

  // E|h_A|^2 and E|h_B|^2 under the model.
  std::pair<double, double> mean_power() const;
  std::pair<cplx, cplx> draw(std::mt19937_64& rng) const;
  void validate() const;
};

struct CfoModel {
  enum class Kind { fixed, uniform };
  Kind kind = Kind::uniform;
  CfoPair f;  // fixed
};

// Which CFO hypotheses the BP detector marginalizes over.
enum class GridMode {
  full,   // uniform lattice over the CFO range (true pair added for fixed CFOs)
  local,  // true pair plus its eight lattice neighbours
  known,  // the true pair only
};

struct DetectorSpec {
  enum class Kind { bpcd, perfcd };
  Kind kind = Kind::bpcd;
  std::size_t gmr = 4;
  Reduction reduction = Reduction::curtailment;
  // none, rayleigh (zero-mean Gaussian matched to the channel model's power)
  // or point (genie prior at the true h_0).
  PriorSpec::Kind prior = PriorSpec::Kind::rayleigh;

  // name:gmr:reduction:prior, or just "perfcd".
  static DetectorSpec parse(const std::string& text);
  std::string label() const;
};

struct Scenario {
  std::string id = "scenario";
  ChannelModel channel;
  CfoModel cfo;
  std::vector<double> snr_db;  // +inf means noiseless
  std::size_t packets = 2000;
  std::size_t n_symbols = 128;
  std::vector<DetectorSpec> detectors;
  std::uint64_t seed = 1;
  double cfo_grid_step_hz = 2500.0;
  GridMode grid = GridMode::full;
  Convention convention = Convention::corrected;
  ObservationModel observation = ObservationModel::approx;
  double symbol_period = 1e-6;
  double cfo_range_hz = 10e3;
  double point_spread = 1e-6;

  SystemParams params(double n0) const;
  void validate() const;
};

// Flat "key = value" text; '#' starts a comment. Throws ConfigError.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);
std::string describe(const Scenario& s);

// Accepts "1.5", "(re,im)", "re+imj", "re-imj", "imj".
cplx parse_complex(const std::string& text);

// Per-channel N0 for an SNR in dB (unit reference power); 0 for +inf.
double noise_from_snr_db(double snr_db);

}  // namespace pnc

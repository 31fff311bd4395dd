#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pnc/gaussian.hpp"
#include "pnc/signal_model.hpp"
#include "pnc/types.hpp"

namespace pnc {

// Exponent convention. `corrected` matches the circularly-symmetric noise
// density exp(-|w|^2 / N0); `paper_verbatim` uses exp(-|w|^2 / (2 N0)) and
// the real-Gaussian prior exponent. Both are run through the same formulas
// with a scale kappa applied to N0 and to the prior variances.
enum class Convention { corrected, paper_verbatim };

double convention_scale(Convention c);  // 1/2 or 1
double detector_noise(double n0, Convention c);
const char* to_string(Convention c);
Convention convention_from_string(const std::string& s);

struct PriorSpec {
  enum class Kind { none, rayleigh, point };
  Kind kind = Kind::none;
  // rayleigh: E|h_A|^2, E|h_B|^2 (zero mean, independent)
  double var_a = 1.0;
  double var_b = 1.0;
  // point: Gaussian around the initial channel pair h_0 with variance `spread`
  Complex2 center = Complex2::Zero();
  double spread = 1e-6;

  static PriorSpec none() { return {}; }
  static PriorSpec rayleigh(double var_a, double var_b);
  static PriorSpec point(const Complex2& h0, double spread);

  // The prior as a peak-one Gaussian function of h, under convention c.
  GaussianComponent component(Convention c) const;
  std::string label() const;
};

inline constexpr std::size_t kUnboundedGmr = std::numeric_limits<std::size_t>::max();

struct DetectorConfig {
  std::size_t gmr = 4;
  Reduction reduction = Reduction::curtailment;
  std::vector<CfoPair> cfo_grid;
  PriorSpec prior;
  double n0_det = 0.05;
  Convention convention = Convention::corrected;
  bool estimate_channels = true;

  // Fills n0_det from the channel N0 under `convention`.
  void set_noise(double n0) { n0_det = detector_noise(n0, convention); }
  // Throws std::invalid_argument.
  void validate(const SystemParams& params) const;
};

// One direction of the message recursion at a fixed CFO pair. messages[n]
// holds the normalized mixture and log_scale[n] the accumulated log
// normalizer, so the message itself is exp(log_scale[n]) * messages[n].
//
// Right pass: messages[n] is a function of h_n and summarizes r_0..r_{n-1}.
// Left pass: messages[n] is a function of h_{n+1} and summarizes
// r_{n+1}..r_{N-1}; messages[N-1] is flat.
struct PassResult {
  std::vector<Mixture> messages;
  std::vector<double> log_scale;
  std::vector<std::size_t> pooled_sizes;  // mixture size before each reduction
  std::size_t combines = 0;
};

PassResult right_pass(const std::vector<Complex2>& r, CfoPair f, const DetectorConfig& cfg,
                      const SystemParams& params);
PassResult left_pass(const std::vector<Complex2>& r, CfoPair f, const DetectorConfig& cfg,
                     const SystemParams& params);

// Per-symbol unnormalized log posteriors log p(s_n, r | f) for the four
// hypotheses, plus the moments needed for channel estimation.
struct PerFPosterior {
  std::vector<std::array<double, 4>> log_post;
  // Posterior mean of h_n given f (over all full-rank product components)
  // and the log mass it was computed from.
  std::vector<Complex2> h_mean;
  std::vector<double> h_log_mass;
  std::size_t combines = 0;  // combine calls made by the two passes
};

PerFPosterior posterior_per_f(const std::vector<Complex2>& r, CfoPair f,
                              const DetectorConfig& cfg, const SystemParams& params);

struct DetectionResult {
  Bits xor_bits;
  std::vector<double> xor_pmf;
  std::vector<std::array<double, 4>> pair_pmf;
  std::vector<Complex2> h_est;
  std::vector<double> per_f_loglik;
  std::size_t combines = 0;
};

// Fills xor_pmf and xor_bits from pair_pmf (ties go to 0).
void decide_xor(DetectionResult& result);

DetectionResult detect(const std::vector<Complex2>& r, const DetectorConfig& cfg,
                       const SystemParams& params);

// Mean over packets and symbols of |h_n - h_est[n]|^2.
double estimate_mse(const std::vector<std::vector<Complex2>>& estimates,
                    const std::vector<std::vector<Complex2>>& truths);

// Uniform lattice over the configured CFO range with the given step.
std::vector<CfoPair> uniform_cfo_grid(const SystemParams& params, double step_hz);
// `center` plus its eight lattice neighbours at +-step (mirrored inwards at
// the range boundary).
std::vector<CfoPair> local_cfo_grid(CfoPair center, const SystemParams& params,
                                    double step_hz);
// Appends f unless already present.
void insert_cfo(std::vector<CfoPair>& grid, CfoPair f);

}  // namespace pnc

#include "pnc/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace pnc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx unit_phasor(double phase) { return std::polar(1.0, phase); }

}  // namespace

SystemParams SystemParams::with_period(double t, std::size_t n, double n0) {
  SystemParams p;
  p.symbol_period = t;
  p.tone_offset = 1.0 / (2.0 * t);
  p.n_symbols = n;
  p.n0 = n0;
  return p;
}

double SystemParams::cfsk_step() const {
  return -kTwoPi * tone_offset * symbol_period;
}

double SystemParams::cfo_step() const { return kTwoPi * symbol_period; }

bool SystemParams::contains(CfoPair f) const {
  return f.f_a >= cfo_min && f.f_a <= cfo_max && f.f_b >= cfo_min &&
         f.f_b <= cfo_max;
}

void SystemParams::validate() const {
  if (!(symbol_period > 0.0)) {
    throw std::invalid_argument("symbol period must be positive");
  }
  if (n_symbols < 1) throw std::invalid_argument("packet needs at least one symbol");
  if (!(n0 >= 0.0)) throw std::invalid_argument("N0 must be non-negative");
  if (!(cfo_min <= cfo_max)) throw std::invalid_argument("empty CFO range");
}

Complex2 PacketScenario::initial_channel() const {
  return Complex2(h_a * unit_phasor(phase_a), h_b * unit_phasor(phase_b));
}

void PacketScenario::validate(const SystemParams& params) const {
  if (bits_a.size() != params.n_symbols || bits_b.size() != params.n_symbols) {
    throw std::invalid_argument("bit sequences must have exactly N entries");
  }
  for (std::size_t n = 0; n < params.n_symbols; ++n) {
    if (bits_a[n] > 1 || bits_b[n] > 1) {
      throw std::invalid_argument("bits must be 0 or 1");
    }
  }
  if (!params.contains(cfo)) throw std::invalid_argument("CFO outside configured range");
}

double cfsk_phase(const Bits& bits, std::size_t n, const SystemParams& params) {
  if (n > bits.size()) {
    throw std::out_of_range("cfsk_phase: index " + std::to_string(n) +
                            " out of range for " + std::to_string(bits.size()) +
                            " bits");
  }
  long sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += 2 * static_cast<long>(bits[i]) - 1;
  return kTwoPi * params.tone_offset * params.symbol_period * static_cast<double>(sum);
}

CMatrix2 z_matrix(BitPair s) {
  CMatrix2 z = CMatrix2::Zero();
  // Bit 0 lands on branch 1 (index 0), bit 1 on branch 2 (index 1).
  z(s.a, 0) = 1.0;
  z(s.b, 1) = 1.0;
  return z;
}

CMatrix2 g_matrix(BitPair s, CfoPair f, const SystemParams& params) {
  const double d1 = params.cfsk_step();
  const double d2 = params.cfo_step();
  CMatrix2 g = CMatrix2::Zero();
  g(0, 0) = unit_phasor(d1 * (1.0 - 2.0 * s.a) + d2 * f.f_a);
  g(1, 1) = unit_phasor(d1 * (1.0 - 2.0 * s.b) + d2 * f.f_b);
  return g;
}

std::pair<cplx, cplx> alpha_beta(double f_u, const SystemParams& params) {
  const double x = kTwoPi * f_u * params.symbol_period;
  const cplx j(0.0, 1.0);
  const cplx num = unit_phasor(x) - 1.0;
  // (e^{jx} - 1) / (jx) -> 1 as x -> 0; the series keeps precision near 0.
  cplx alpha = std::abs(x) < 1e-6 ? 1.0 + j * x / 2.0 - x * x / 6.0 : num / (j * x);
  cplx beta = num / (-j * kTwoPi + j * x);
  return {alpha, beta};
}

std::vector<RotatedChannelState> rotated_channels(const PacketScenario& scenario,
                                                  const SystemParams& params) {
  const std::size_t n_sym = params.n_symbols;
  std::vector<RotatedChannelState> out;
  out.reserve(n_sym);
  Complex2 h = scenario.initial_channel();
  for (std::size_t n = 0; n < n_sym; ++n) {
    out.push_back({h, n});
    h = g_matrix(scenario.bits_at(n), scenario.cfo, params) * h;
  }
  return out;
}

SimulatedPacket simulate_packet(const PacketScenario& scenario,
                                const SystemParams& params, ObservationModel mode) {
  params.validate();
  scenario.validate(params);

  SimulatedPacket pkt;
  pkt.channels = rotated_channels(scenario, params);
  pkt.r.reserve(params.n_symbols);

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(params.n0 / 2.0));

  const auto [alpha_a, beta_a] = alpha_beta(scenario.cfo.f_a, params);
  const auto [alpha_b, beta_b] = alpha_beta(scenario.cfo.f_b, params);
  const CMatrix2 alpha = Eigen::Vector2cd(alpha_a, alpha_b).asDiagonal();
  const CMatrix2 beta = Eigen::Vector2cd(beta_a, beta_b).asDiagonal();
  const CMatrix2 ones = CMatrix2::Ones();

  for (std::size_t n = 0; n < params.n_symbols; ++n) {
    const CMatrix2 z = z_matrix(scenario.bits_at(n));
    const Complex2& h = pkt.channels[n].h;
    Complex2 r;
    if (mode == ObservationModel::approx) {
      r = z * h;
    } else {
      r = (z * alpha + (ones - z) * beta) * h;
    }
    if (params.n0 > 0.0) {
      for (int k = 0; k < 2; ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        r(k) += cplx(re, im);
      }
    }
    pkt.r.push_back(r);
  }
  return pkt;
}

}  // namespace pnc

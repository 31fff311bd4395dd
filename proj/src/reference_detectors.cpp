#include "pnc/reference_detectors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "pnc/log_math.hpp"

namespace pnc {

PerfectSideInfo PerfectSideInfo::from_packet(const SimulatedPacket& pkt, CfoPair cfo) {
  PerfectSideInfo side;
  side.cfo = cfo;
  for (const auto& c : pkt.channels) side.h.push_back(c.h);
  return side;
}

DetectionResult perfcd_detect(const std::vector<Complex2>& r, const PerfectSideInfo& side,
                              double n0_det) {
  if (r.size() != side.h.size()) throw std::invalid_argument("side information length mismatch");
  if (!(n0_det > 0.0)) throw std::invalid_argument("detector noise must be positive");
  DetectionResult out;
  out.pair_pmf.resize(r.size());
  out.h_est = side.h;
  std::array<double, 4> e;
  for (std::size_t n = 0; n < r.size(); ++n) {
    for (int s = 0; s < 4; ++s) {
      e[s] = -(r[n] - z_matrix(BitPair::from_index(s)) * side.h[n]).squaredNorm() / (2.0 * n0_det);
    }
    const double total = log_sum_exp(e);
    for (int s = 0; s < 4; ++s) out.pair_pmf[n][s] = std::exp(e[s] - total);
  }
  decide_xor(out);
  return out;
}

namespace {

using Mat = Eigen::Matrix2cd;
using Vec = Eigen::Vector2cd;

struct GaussianPrior {
  Mat precision = Mat::Zero();
  Vec info = Vec::Zero();
  double log_const = 0.0;  // -1/2 mu* Lambda mu, so the peak is one
};

GaussianPrior make_prior(const PriorSpec& prior, Convention convention) {
  GaussianPrior g;
  const double k = convention_scale(convention);
  if (prior.kind == PriorSpec::Kind::rayleigh) {
    g.precision(0, 0) = 1.0 / (k * prior.var_a);
    g.precision(1, 1) = 1.0 / (k * prior.var_b);
  } else if (prior.kind == PriorSpec::Kind::point) {
    g.precision = Mat::Identity() / (k * prior.spread);
    g.info = g.precision * prior.center;
    g.log_const = -0.5 * std::real(prior.center.dot(g.info));
  }
  return g;
}

// log of the integral of exp(c - 1/2 h* L h + Re(b* h)) over C^2.
double log_gaussian_integral(const Mat& lambda, const Vec& b, double c) {
  Eigen::SelfAdjointEigenSolver<Mat> es(lambda);
  const auto& ev = es.eigenvalues();
  if (!(ev(0) > 1e-12 * ev.sum())) {
    throw NumericalError("brute force: information matrix is singular");
  }
  const Vec x = lambda.ldlt().solve(b);
  return c + 0.5 * std::real(b.dot(x)) - std::log(ev(0) * ev(1)) +
         2.0 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

BruteForceResult brute_force_posterior(const std::vector<Complex2>& r, CfoPair f,
                                       const PriorSpec& prior, double n0_det,
                                       Convention convention, const SystemParams& params) {
  const std::size_t n_sym = r.size();
  if (n_sym == 0 || n_sym > kBruteForceMaxSymbols) {
    throw std::invalid_argument("brute force supports 1..8 symbols");
  }
  if (!(n0_det > 0.0)) throw std::invalid_argument("detector noise must be positive");
  const GaussianPrior pr = make_prior(prior, convention);

  // Per-symbol phase factor of each user: d(s) multiplies h component-wise.
  std::array<Vec, 4> step;
  const double d1 = params.cfsk_step();
  const double d2 = params.cfo_step();
  for (int s = 0; s < 4; ++s) {
    const BitPair b = BitPair::from_index(s);
    step[s](0) = std::polar(1.0, d1 * (1.0 - 2.0 * b.a) + d2 * f.f_a);
    step[s](1) = std::polar(1.0, d1 * (1.0 - 2.0 * b.b) + d2 * f.f_b);
  }

  double energy = 0.0;
  for (const auto& x : r) energy += x.squaredNorm();
  const double g0 = -energy / (2.0 * n0_det) + pr.log_const;

  const std::size_t count = std::size_t{1} << (2 * n_sym);
  std::vector<double> log_ev(count);
  std::vector<double> log_ev_chain(count);
  std::vector<int> seq(n_sym);
  for (std::size_t code = 0; code < count; ++code) {
    for (std::size_t n = 0; n < n_sym; ++n) seq[n] = static_cast<int>((code >> (2 * n)) & 3);

    // Stacked route: every observation expressed in terms of h_0.
    Mat lambda = pr.precision;
    Vec eta = pr.info;
    Vec phase = Vec::Ones();
    for (std::size_t n = 0; n < n_sym; ++n) {
      const Mat zp = z_matrix(BitPair::from_index(seq[n])) * phase.asDiagonal();
      lambda += zp.adjoint() * zp / n0_det;
      eta += zp.adjoint() * r[n] / n0_det;
      phase = phase.cwiseProduct(step[seq[n]]);
    }
    log_ev[code] = log_gaussian_integral(lambda, eta, g0);

    // Sequential route: absorb each observation into the current channel
    // and carry the information forward to the next symbol.
    Mat j = pr.precision;
    Vec v = pr.info;
    for (std::size_t n = 0; n < n_sym; ++n) {
      const Mat z = z_matrix(BitPair::from_index(seq[n]));
      j += z.adjoint() * z / n0_det;
      v += z.adjoint() * r[n] / n0_det;
      if (n + 1 < n_sym) {
        const Mat g = step[seq[n]].asDiagonal();
        j = g * j * g.adjoint();
        v = g * v;
      }
    }
    log_ev_chain[code] = log_gaussian_integral(j, v, g0);
  }

  BruteForceResult out;
  out.log_evidence = log_sum_exp(log_ev);
  out.log_evidence_chain = log_sum_exp(log_ev_chain);
  out.pair_pmf.assign(n_sym, {0.0, 0.0, 0.0, 0.0});
  for (std::size_t code = 0; code < count; ++code) {
    const double p = std::exp(log_ev[code] - out.log_evidence);
    for (std::size_t n = 0; n < n_sym; ++n) out.pair_pmf[n][(code >> (2 * n)) & 3] += p;
  }
  out.xor_pmf.resize(n_sym);
  for (std::size_t n = 0; n < n_sym; ++n) {
    out.xor_pmf[n] = out.pair_pmf[n][1] + out.pair_pmf[n][2];
  }
  return out;
}

}  // namespace pnc

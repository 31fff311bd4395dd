#include "pnc/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "pnc/log_math.hpp"
#include "pnc/reference_detectors.hpp"
#include "pnc/scenario.hpp"
#include "pnc/sweep.hpp"

namespace pnc {

namespace {

cplx random_cplx(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng)};
}

Complex2 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  return {random_cplx(rng, scale), random_cplx(rng, scale)};
}

CMatrix2 random_precision(std::mt19937_64& rng, bool rank1) {
  CMatrix2 a;
  a << random_cplx(rng), random_cplx(rng), random_cplx(rng), random_cplx(rng);
  if (rank1) {
    a.col(1).setZero();
    return a * a.adjoint();
  }
  return a * a.adjoint() + 0.2 * CMatrix2::Identity();
}

GaussianComponent random_component(std::mt19937_64& rng, bool rank1 = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  const CMatrix2 p = random_precision(rng, rank1);
  return GaussianComponent(p, p * random_vec(rng), g(rng));
}

CMatrix2 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  CMatrix2 g = CMatrix2::Zero();
  g(0, 0) = std::polar(1.0, u(rng));
  g(1, 1) = std::polar(1.0, u(rng));
  return g;
}

double rel(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Trapezoidal rule over a 4-D real box around `center`; log of the integral.
template <class F>
double log_quadrature(F&& log_f, const Complex2& center, double half, int points) {
  const double step = 2.0 * half / (points - 1);
  const double ref = log_f(center);
  double sum = 0.0;
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      for (int k = 0; k < points; ++k) {
        for (int l = 0; l < points; ++l) {
          const Complex2 h = center + Complex2(cplx(-half + i * step, -half + j * step),
                                               cplx(-half + k * step, -half + l * step));
          sum += std::exp(log_f(h) - ref);
        }
      }
    }
  }
  return ref + std::log(sum) + 4.0 * std::log(step);
}

PacketScenario random_scenario(std::mt19937_64& rng, std::size_t n, CfoPair f) {
  std::bernoulli_distribution bit(0.5);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  PacketScenario s;
  for (std::size_t k = 0; k < n; ++k) {
    s.bits_a.push_back(bit(rng));
    s.bits_b.push_back(bit(rng));
  }
  s.h_a = random_cplx(rng, std::sqrt(0.5));
  s.h_b = random_cplx(rng, std::sqrt(0.5));
  s.cfo = f;
  s.phase_a = ph(rng);
  s.phase_b = ph(rng);
  s.seed = rng();
  return s;
}

PropertyCheck check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

PropertyCheck product_and_transform_laws(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto a = random_component(rng, t % 3 == 0);
    const auto b = random_component(rng, t % 4 == 0);
    const auto ab = combine(a, b);
    const CMatrix2 g = random_rotation(rng);
    const auto pb = pullback(a, g);
    const auto pf = pushforward(a, g);
    for (int k = 0; k < 100; ++k) {
      const Complex2 h = random_vec(rng);
      worst = std::max(worst, rel(ab.log_value(h), a.log_value(h) + b.log_value(h)));
      worst = std::max(worst, rel(pb.log_value(h), a.log_value(g * h)));
      worst = std::max(worst, rel(pf.log_value(h), a.log_value(g.adjoint() * h)));
    }
  }
  return check("gaussian product and transform laws", worst < 1e-9,
               "max log deviation " + sci(worst));
}

PropertyCheck moment_preservation(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Mixture m;
    for (int j = 0; j < 5; ++j) m.push_back(random_component(rng));
    normalize_weights(m);
    std::vector<double> mass;
    for (const auto& c : m) mass.push_back(integrate(c));
    const double total = log_sum_exp(mass);
    Complex2 mu = Complex2::Zero();
    CMatrix2 second = CMatrix2::Zero();
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double w = std::exp(mass[j] - total);
      const Complex2 mj = m[j].mean();
      mu += w * mj;
      second += w * (m[j].covariance() + mj * mj.adjoint());
    }
    const CMatrix2 cov = second - mu * mu.adjoint();
    const auto matched = moment_match(m);
    worst = std::max(worst, rel(integrate(matched), total));
    worst = std::max(worst, (matched.mean() - mu).norm());
    worst = std::max(worst, (matched.covariance() - cov).norm() / std::max(1.0, cov.norm()));
  }
  return check("moment matching preserves mass, mean and covariance", worst < 1e-9,
               "max deviation " + sci(worst));
}

PropertyCheck normalization_idempotence(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    Mixture m;
    for (int j = 0; j < 1 + t % 7; ++j) m.push_back(random_component(rng, j % 2 == 0));
    std::vector<double> before;
    for (const auto& c : m) before.push_back(c.log_weight());
    const double z1 = normalize_weights(m);
    const Mixture once = m;
    const double z2 = normalize_weights(m);
    worst = std::max(worst, std::abs(z1 - log_sum_exp(before)));
    worst = std::max(worst, std::abs(z2));
    for (std::size_t j = 0; j < m.size(); ++j) {
      worst = std::max(worst, std::abs(m[j].log_weight() - once[j].log_weight()));
    }
  }
  return check("weight normalization is idempotent", worst < 1e-10,
               "max deviation " + sci(worst));
}

PropertyCheck integrate_vs_quadrature(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    CMatrix2 q;
    q << cplx(1.0 + 0.3 * t, 0.0), cplx(0.2, -0.1), cplx(0.2, 0.1), cplx(0.8, 0.0);
    const auto a = GaussianComponent::from_moments(random_vec(rng, 0.5), q, -0.5 * t);
    const auto b = GaussianComponent::from_moments(random_vec(rng, 0.5), 2.0 * q, 0.3);
    const auto ab = combine(a, b);
    const double quad = log_quadrature(
        [&](const Complex2& h) { return a.log_value(h) + b.log_value(h); }, ab.mean(), 5.0, 37);
    worst = std::max(worst, rel(integrate(ab), quad));
  }
  return check("integrate agrees with numeric quadrature", worst < 1e-4,
               "max relative deviation " + sci(worst));
}

PropertyCheck constant_invariance(std::mt19937_64& rng) {
  SystemParams p = SystemParams::with_period(1e-6, 8, 0.2);
  const CfoPair f{-3000.0, 8000.0};
  const auto scenario = random_scenario(rng, p.n_symbols, f);
  const auto pkt = simulate_packet(scenario, p);
  DetectorConfig cfg;
  cfg.gmr = 4;
  cfg.cfo_grid = {f};
  cfg.prior = PriorSpec::rayleigh(1.0, 1.0);
  cfg.set_noise(p.n0);
  const auto post = posterior_per_f(pkt.r, f, cfg, p);
  const auto det = detect(pkt.r, cfg, p);
  double worst = 0.0;
  for (double c : {-300.0, -integration_constant(), 12.5, 900.0}) {
    for (std::size_t n = 0; n < p.n_symbols; ++n) {
      std::array<double, 4> v = post.log_post[n];
      for (auto& x : v) x += c;
      const double z = log_sum_exp(v);
      for (int s = 0; s < 4; ++s) {
        worst = std::max(worst, std::abs(std::exp(v[s] - z) - det.pair_pmf[n][s]));
      }
    }
  }
  return check("normalized PMFs ignore constant offsets", worst < 1e-10,
               "max deviation " + sci(worst));
}

PropertyCheck complexity_counter(std::mt19937_64& rng) {
  const std::size_t n_sym = 128;
  SystemParams p = SystemParams::with_period(1e-6, n_sym, 0.1);
  const CfoPair f{2500.0, -5000.0};
  const auto pkt = simulate_packet(random_scenario(rng, n_sym, f), p);
  bool ok = true;
  std::string detail;
  for (std::size_t gmr : {1u, 2u, 4u, 8u}) {
    DetectorConfig cfg;
    cfg.gmr = gmr;
    cfg.cfo_grid = {f};
    cfg.set_noise(p.n0);
    const auto pass = right_pass(pkt.r, f, cfg, p);
    std::size_t expected = 0, size = 1;
    for (std::size_t k = 0; k + 1 < n_sym; ++k) {
      expected += 4 * size;
      size = std::min(4 * size, gmr);
    }
    ok = ok && pass.combines == expected && pass.combines <= 4 * gmr * n_sym;
    detail += (detail.empty() ? "" : ", ") + ("gmr " + std::to_string(gmr)) + ": " +
              std::to_string(pass.combines) + " (4*gmr*N = " + std::to_string(4 * gmr * n_sym) +
              ")";
  }
  return check("combine count per pass and grid point", ok, detail);
}

PropertyCheck noiseless_perfcd(std::mt19937_64& rng) {
  const std::size_t n_sym = 128;
  SystemParams p = SystemParams::with_period(1e-6, n_sym, 0.0);
  std::uniform_real_distribution<double> cfo(-10e3, 10e3);
  std::size_t errors = 0, skipped = 0;
  for (int t = 0; t < 50; ++t) {
    const auto scenario = random_scenario(rng, n_sym, {cfo(rng), cfo(rng)});
    if (std::abs(scenario.h_a) < 1e-6 || std::abs(scenario.h_b) < 1e-6) {
      ++skipped;
      continue;
    }
    const auto pkt = simulate_packet(scenario, p);
    const auto res =
        perfcd_detect(pkt.r, PerfectSideInfo::from_packet(pkt, scenario.cfo), 1e-6);
    for (std::size_t n = 0; n < n_sym; ++n) {
      errors += res.xor_bits[n] != (scenario.bits_a[n] ^ scenario.bits_b[n]);
    }
  }
  return check("noiseless perfect coherent detection has no errors", errors == 0,
               std::to_string(errors) + " errors in " + std::to_string((50 - skipped) * n_sym) +
                   " bits");
}

PropertyCheck seed_determinism(std::uint64_t seed) {
  Scenario s;
  s.id = "determinism";
  s.seed = seed;
  s.packets = 6;
  s.n_symbols = 24;
  s.snr_db = {5.0, 15.0};
  s.grid = GridMode::local;
  s.detectors = {DetectorSpec::parse("bpcd:4:curtailment:rayleigh"),
                 DetectorSpec::parse("bpcd:2:hybrid:none"), DetectorSpec::parse("perfcd")};
  SweepOptions one;
  one.timing = false;
  SweepOptions three = one;
  three.threads = 3;
  const std::string a = results_csv(run_sweep(s, one));
  const std::string b = results_csv(run_sweep(s, one));
  const std::string c = results_csv(run_sweep(s, three));
  return check("same seed gives byte-identical CSV", a == b && a == c,
               a == b ? (a == c ? "repeat and 3-thread runs identical" : "thread count changed output")
                      : "repeat run differs");
}

}  // namespace

OracleCheckReport run_oracle_check(const OracleCheckOptions& opts) {
  if (opts.snr_db.empty() || opts.conventions.empty()) {
    throw std::invalid_argument("oracle check needs at least one SNR and one convention");
  }
  std::vector<PriorSpec> priors;
  if (opts.without_prior) priors.push_back(PriorSpec::none());
  if (opts.with_prior) priors.push_back(PriorSpec::rayleigh(1.0, 1.0));
  if (priors.empty()) throw std::invalid_argument("oracle check needs at least one prior mode");

  OracleCheckReport report;
  std::mt19937_64 rng(opts.seed);
  const CfoPair f{6000.0, 100.0};
  for (std::size_t n_sym : opts.n_values) {
    if (n_sym < 1 || n_sym > kBruteForceMaxSymbols) {
      throw std::invalid_argument("oracle check supports 1 <= N <= 8");
    }
    for (std::size_t t = 0; t < opts.trials; ++t) {
      const double snr = opts.snr_db[t % opts.snr_db.size()];
      const SystemParams p = SystemParams::with_period(1e-6, n_sym, noise_from_snr_db(snr));
      const auto pkt = simulate_packet(random_scenario(rng, n_sym, f), p);
      for (Convention conv : opts.conventions) {
        for (const auto& prior : priors) {
          DetectorConfig cfg;
          cfg.gmr = kUnboundedGmr;
          cfg.cfo_grid = {f};
          cfg.prior = prior;
          cfg.convention = conv;
          cfg.set_noise(std::max(p.n0, 1e-6));
          const auto det = detect(pkt.r, cfg, p);
          const auto bf = brute_force_posterior(pkt.r, f, prior, cfg.n0_det, conv, p);
          for (std::size_t n = 0; n < n_sym; ++n) {
            for (int s = 0; s < 4; ++s) {
              report.max_pmf_deviation = std::max(
                  report.max_pmf_deviation, std::abs(det.pair_pmf[n][s] - bf.pair_pmf[n][s]));
            }
          }
          report.max_evidence_deviation = std::max(
              report.max_evidence_deviation, rel(det.per_f_loglik[0], bf.log_evidence));
          ++report.instances;
        }
      }
    }
  }
  report.passed = report.max_pmf_deviation <= opts.tolerance;
  return report;
}

std::vector<PropertyCheck> run_property_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PropertyCheck> out;
  out.push_back(product_and_transform_laws(rng));
  out.push_back(moment_preservation(rng));
  out.push_back(normalization_idempotence(rng));
  out.push_back(integrate_vs_quadrature(rng));
  out.push_back(constant_invariance(rng));
  out.push_back(complexity_counter(rng));
  out.push_back(noiseless_perfcd(rng));
  out.push_back(seed_determinism(seed));
  return out;
}

}  // namespace pnc

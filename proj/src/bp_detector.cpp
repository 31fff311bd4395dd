#include "pnc/bp_detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pnc/log_math.hpp"

namespace pnc {

double convention_scale(Convention c) { return c == Convention::corrected ? 0.5 : 1.0; }

double detector_noise(double n0, Convention c) { return convention_scale(c) * n0; }

const char* to_string(Convention c) {
  return c == Convention::corrected ? "corrected" : "paper_verbatim";
}

Convention convention_from_string(const std::string& s) {
  if (s == "corrected") return Convention::corrected;
  if (s == "paper_verbatim" || s == "paper") return Convention::paper_verbatim;
  throw std::invalid_argument("unknown convention: " + s);
}

PriorSpec PriorSpec::rayleigh(double var_a, double var_b) {
  PriorSpec p;
  p.kind = Kind::rayleigh;
  p.var_a = var_a;
  p.var_b = var_b;
  return p;
}

PriorSpec PriorSpec::point(const Complex2& h0, double spread) {
  PriorSpec p;
  p.kind = Kind::point;
  p.center = h0;
  p.spread = spread;
  return p;
}

GaussianComponent PriorSpec::component(Convention c) const {
  const double k = convention_scale(c);
  switch (kind) {
    case Kind::none:
      return GaussianComponent::flat();
    case Kind::rayleigh: {
      CMatrix2 p = CMatrix2::Zero();
      p(0, 0) = 1.0 / (k * var_a);
      p(1, 1) = 1.0 / (k * var_b);
      return GaussianComponent(p, Complex2::Zero(), 0.0);
    }
    case Kind::point: {
      CMatrix2 cov = CMatrix2::Identity() * (k * spread);
      return GaussianComponent::from_moments(center, cov, 0.0);
    }
  }
  throw std::logic_error("unknown prior kind");
}

std::string PriorSpec::label() const {
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::rayleigh:
      return "rayleigh";
    case Kind::point:
      return "point";
  }
  return "?";
}

void DetectorConfig::validate(const SystemParams& params) const {
  if (gmr < 1) throw std::invalid_argument("gmr must be at least 1");
  if (reduction == Reduction::hybrid && gmr < 2) {
    throw std::invalid_argument("hybrid reduction needs gmr >= 2");
  }
  if (cfo_grid.empty()) throw std::invalid_argument("CFO grid is empty");
  for (const auto& f : cfo_grid) {
    if (!params.contains(f)) throw std::invalid_argument("CFO grid point outside range");
  }
  if (!(n0_det > 0.0)) throw std::invalid_argument("detector noise must be positive");
  if (prior.kind == PriorSpec::Kind::rayleigh && !(prior.var_a > 0.0 && prior.var_b > 0.0)) {
    throw std::invalid_argument("prior variances must be positive");
  }
  if (prior.kind == PriorSpec::Kind::point && !(prior.spread > 0.0)) {
    throw std::invalid_argument("point prior spread must be positive");
  }
}

namespace {

using LikTable = std::vector<std::array<GaussianComponent, 4>>;

LikTable likelihood_table(const std::vector<Complex2>& r, double n0_det) {
  LikTable t(r.size());
  for (std::size_t n = 0; n < r.size(); ++n) {
    for (int s = 0; s < 4; ++s) t[n][s] = likelihood_component(BitPair::from_index(s), r[n], n0_det);
  }
  return t;
}

std::array<CMatrix2, 4> rotations(CfoPair f, const SystemParams& params) {
  std::array<CMatrix2, 4> g;
  for (int s = 0; s < 4; ++s) g[s] = g_matrix(BitPair::from_index(s), f, params);
  return g;
}

void check_input(const std::vector<Complex2>& r, const SystemParams& params) {
  if (r.size() != params.n_symbols) {
    throw std::invalid_argument("observation length does not match N");
  }
}

PassResult run_right(const LikTable& lik, const std::array<CMatrix2, 4>& g,
                     const GaussianComponent& start, const DetectorConfig& cfg) {
  const std::size_t n_sym = lik.size();
  PassResult out;
  out.messages.resize(n_sym);
  out.log_scale.assign(n_sym, 0.0);
  out.messages[0] = {start};
  out.log_scale[0] = normalize_weights(out.messages[0]);
  for (std::size_t n = 0; n + 1 < n_sym; ++n) {
    const Mixture& prev = out.messages[n];
    Mixture pool;
    pool.reserve(4 * prev.size());
    for (int s = 0; s < 4; ++s) {
      for (const auto& c : prev) {
        pool.push_back(pushforward(combine(lik[n][s], c), g[s]));
        ++out.combines;
      }
    }
    out.pooled_sizes.push_back(pool.size());
    double z = 0.0;
    out.messages[n + 1] = reduce(pool, cfg.gmr, cfg.reduction, &z);
    out.log_scale[n + 1] = out.log_scale[n] + z;
  }
  return out;
}

PassResult run_left(const LikTable& lik, const std::array<CMatrix2, 4>& g,
                    const DetectorConfig& cfg) {
  const std::size_t n_sym = lik.size();
  PassResult out;
  out.messages.resize(n_sym);
  out.log_scale.assign(n_sym, 0.0);
  out.messages[n_sym - 1] = {GaussianComponent::flat()};
  for (std::size_t n = n_sym - 1; n-- > 0;) {
    const Mixture& next = out.messages[n + 1];
    Mixture pool;
    pool.reserve(4 * next.size());
    for (int s = 0; s < 4; ++s) {
      for (const auto& c : next) {
        pool.push_back(combine(lik[n + 1][s], pullback(c, g[s])));
        ++out.combines;
      }
    }
    out.pooled_sizes.push_back(pool.size());
    double z = 0.0;
    out.messages[n] = reduce(pool, cfg.gmr, cfg.reduction, &z);
    out.log_scale[n] = out.log_scale[n + 1] + z;
  }
  return out;
}

GaussianComponent right_start(const DetectorConfig& cfg) {
  return cfg.prior.kind == PriorSpec::Kind::point ? cfg.prior.component(cfg.convention)
                                                  : GaussianComponent::flat();
}

}  // namespace

PassResult right_pass(const std::vector<Complex2>& r, CfoPair f, const DetectorConfig& cfg,
                      const SystemParams& params) {
  check_input(r, params);
  return run_right(likelihood_table(r, cfg.n0_det), rotations(f, params), right_start(cfg), cfg);
}

PassResult left_pass(const std::vector<Complex2>& r, CfoPair f, const DetectorConfig& cfg,
                     const SystemParams& params) {
  check_input(r, params);
  return run_left(likelihood_table(r, cfg.n0_det), rotations(f, params), cfg);
}

namespace {

PerFPosterior assemble(const LikTable& lik, const std::array<CMatrix2, 4>& g,
                       const DetectorConfig& cfg) {
  const std::size_t n_sym = lik.size();
  const PassResult right = run_right(lik, g, right_start(cfg), cfg);
  const PassResult left = run_left(lik, g, cfg);

  // The zero-mean Rayleigh prior is invariant under the diagonal rotations,
  // so it can be applied at every symbol. The point prior sits on h_0 and was
  // folded into the right pass.
  const bool node_prior = cfg.prior.kind == PriorSpec::Kind::rayleigh;
  const GaussianComponent prior = node_prior ? cfg.prior.component(cfg.convention)
                                             : GaussianComponent::flat();

  PerFPosterior out;
  out.log_post.resize(n_sym);
  out.h_mean.assign(n_sym, Complex2::Zero());
  out.h_log_mass.assign(n_sym, kNegInf);
  out.combines = right.combines + left.combines;

  std::vector<double> terms;
  std::vector<double> mass_terms;
  std::vector<Complex2> means;
  for (std::size_t n = 0; n < n_sym; ++n) {
    const double scale = right.log_scale[n] + left.log_scale[n];
    Mixture base;
    base.reserve(right.messages[n].size());
    for (const auto& c : right.messages[n]) base.push_back(node_prior ? combine(prior, c) : c);
    mass_terms.clear();
    means.clear();
    for (int s = 0; s < 4; ++s) {
      terms.clear();
      for (const auto& rc : base) {
        const GaussianComponent with_obs = combine(rc, lik[n][s]);
        for (const auto& lc : left.messages[n]) {
          const GaussianComponent product = combine(with_obs, pullback(lc, g[s]));
          const auto v = try_integrate(product);
          if (!v) continue;
          terms.push_back(*v);
          if (cfg.estimate_channels) {
            mass_terms.push_back(*v);
            means.push_back(product.mean());
          }
        }
      }
      out.log_post[n][s] = terms.empty() ? kNegInf : scale + log_sum_exp(terms);
    }
    if (!mass_terms.empty()) {
      const double total = log_sum_exp(mass_terms);
      Complex2 mean = Complex2::Zero();
      for (std::size_t k = 0; k < means.size(); ++k) {
        mean += std::exp(mass_terms[k] - total) * means[k];
      }
      out.h_mean[n] = mean;
      out.h_log_mass[n] = scale + total;
    }
  }
  return out;
}

}  // namespace

PerFPosterior posterior_per_f(const std::vector<Complex2>& r, CfoPair f,
                              const DetectorConfig& cfg, const SystemParams& params) {
  check_input(r, params);
  return assemble(likelihood_table(r, cfg.n0_det), rotations(f, params), cfg);
}

void decide_xor(DetectionResult& result) {
  const std::size_t n_sym = result.pair_pmf.size();
  result.xor_pmf.resize(n_sym);
  result.xor_bits.resize(n_sym);
  for (std::size_t n = 0; n < n_sym; ++n) {
    const auto& p = result.pair_pmf[n];
    result.xor_pmf[n] = p[1] + p[2];
    result.xor_bits[n] = result.xor_pmf[n] > p[0] + p[3] ? 1 : 0;
  }
}

DetectionResult detect(const std::vector<Complex2>& r, const DetectorConfig& cfg,
                       const SystemParams& params) {
  check_input(r, params);
  cfg.validate(params);
  const std::size_t n_sym = r.size();
  const std::size_t n_f = cfg.cfo_grid.size();
  const LikTable lik = likelihood_table(r, cfg.n0_det);

  std::vector<PerFPosterior> per_f;
  per_f.reserve(n_f);
  DetectionResult out;
  out.per_f_loglik.resize(n_f);
  for (std::size_t i = 0; i < n_f; ++i) {
    per_f.push_back(assemble(lik, rotations(cfg.cfo_grid[i], params), cfg));
    out.per_f_loglik[i] = log_sum_exp(per_f.back().log_post[0]);
    out.combines += per_f.back().combines;
  }

  out.pair_pmf.resize(n_sym);
  out.h_est.assign(n_sym, Complex2::Zero());
  std::vector<double> acc(n_f);
  for (std::size_t n = 0; n < n_sym; ++n) {
    std::array<double, 4> joint;
    for (int s = 0; s < 4; ++s) {
      for (std::size_t i = 0; i < n_f; ++i) acc[i] = per_f[i].log_post[n][s];
      joint[s] = log_sum_exp(acc);
    }
    const double total = log_sum_exp(joint);
    if (total == kNegInf || std::isnan(total)) {
      std::ostringstream msg;
      msg << "degenerate posterior at symbol " << n << " (every hypothesis improper on all "
          << n_f << " CFO grid points)";
      throw NumericalError(msg.str());
    }
    for (int s = 0; s < 4; ++s) out.pair_pmf[n][s] = std::exp(joint[s] - total);

    if (cfg.estimate_channels) {
      for (std::size_t i = 0; i < n_f; ++i) acc[i] = per_f[i].h_log_mass[n];
      const double mass = log_sum_exp(acc);
      if (mass != kNegInf) {
        Complex2 h = Complex2::Zero();
        for (std::size_t i = 0; i < n_f; ++i) {
          if (acc[i] != kNegInf) h += std::exp(acc[i] - mass) * per_f[i].h_mean[n];
        }
        out.h_est[n] = h;
      }
    }
  }
  decide_xor(out);
  return out;
}

double estimate_mse(const std::vector<std::vector<Complex2>>& estimates,
                    const std::vector<std::vector<Complex2>>& truths) {
  if (estimates.size() != truths.size()) throw std::invalid_argument("packet count mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (estimates[k].size() != truths[k].size()) {
      throw std::invalid_argument("symbol count mismatch");
    }
    for (std::size_t n = 0; n < truths[k].size(); ++n) {
      sum += (truths[k][n] - estimates[k][n]).squaredNorm();
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("no symbols");
  return sum / static_cast<double>(count);
}

std::vector<CfoPair> uniform_cfo_grid(const SystemParams& params, double step_hz) {
  if (!(step_hz > 0.0)) throw std::invalid_argument("CFO grid step must be positive");
  std::vector<double> axis;
  const double span = params.cfo_max - params.cfo_min;
  const auto points = static_cast<std::size_t>(std::floor(span / step_hz + 1e-9)) + 1;
  for (std::size_t i = 0; i < points; ++i) axis.push_back(params.cfo_min + i * step_hz);
  std::vector<CfoPair> grid;
  for (double fa : axis) {
    for (double fb : axis) grid.push_back({fa, fb});
  }
  return grid;
}

std::vector<CfoPair> local_cfo_grid(CfoPair center, const SystemParams& params,
                                    double step_hz) {
  if (!(step_hz > 0.0)) throw std::invalid_argument("CFO grid step must be positive");
  auto axis = [&](double c) {
    std::array<double, 3> v{c, c - step_hz, c + step_hz};
    if (v[1] < params.cfo_min) v[1] = c + 2.0 * step_hz;
    if (v[2] > params.cfo_max) v[2] = c - 2.0 * step_hz;
    return v;
  };
  const auto ax = axis(center.f_a);
  const auto bx = axis(center.f_b);
  std::vector<CfoPair> grid;
  for (double fa : ax) {
    for (double fb : bx) {
      const CfoPair f{fa, fb};
      if (params.contains(f)) insert_cfo(grid, f);
    }
  }
  return grid;
}

void insert_cfo(std::vector<CfoPair>& grid, CfoPair f) {
  if (std::find(grid.begin(), grid.end(), f) == grid.end()) grid.push_back(f);
}

}  // namespace pnc

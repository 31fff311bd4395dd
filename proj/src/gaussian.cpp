#include "pnc/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pnc/log_math.hpp"
#include "pnc/signal_model.hpp"

namespace pnc {

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kUnitaryTolerance = 1e-9;

// Eigen-structure of a 2x2 Hermitian matrix [[a, c], [conj(c), d]].
struct HermitianEig {
  double trace;
  double det;
  double hi;
  double lo;
};

HermitianEig eig(const CMatrix2& p) {
  const double a = p(0, 0).real();
  const double d = p(1, 1).real();
  const cplx c = p(0, 1);
  HermitianEig e;
  e.trace = a + d;
  e.det = a * d - std::norm(c);
  const double half_gap = 0.5 * (a - d);
  e.hi = 0.5 * e.trace + std::sqrt(half_gap * half_gap + std::norm(c));
  // det / hi keeps the small eigenvalue accurate when P is near-singular.
  e.lo = e.hi > 0.0 ? e.det / e.hi : 0.0;
  return e;
}

bool full_rank(const HermitianEig& e) {
  return e.trace > 0.0 && e.lo > kRankTolerance * e.trace;
}

CMatrix2 inverse_hermitian(const CMatrix2& p, double det) {
  CMatrix2 inv;
  inv(0, 0) = p(1, 1) / det;
  inv(1, 1) = p(0, 0) / det;
  inv(0, 1) = -p(0, 1) / det;
  inv(1, 0) = -p(1, 0) / det;
  return inv;
}

// Unit eigenvector of the dominant eigenvalue.
Complex2 dominant_vector(const CMatrix2& p, double hi) {
  const cplx c = p(0, 1);
  const double a = p(0, 0).real();
  const double d = p(1, 1).real();
  Complex2 u(c, hi - a);
  Complex2 v(hi - d, std::conj(c));
  Complex2 best = u.squaredNorm() >= v.squaredNorm() ? u : v;
  const double nrm = best.norm();
  if (nrm == 0.0) return a >= d ? Complex2(1.0, 0.0) : Complex2(0.0, 1.0);
  return best / nrm;
}

double quad_inverse(const CMatrix2& p, const Complex2& eta, double det) {
  return std::real(eta.dot(inverse_hermitian(p, det) * eta));
}

void check_unitary_diagonal(const CMatrix2& g) {
  if (std::abs(g(0, 1)) > kUnitaryTolerance || std::abs(g(1, 0)) > kUnitaryTolerance ||
      std::abs(std::abs(g(0, 0)) - 1.0) > kUnitaryTolerance ||
      std::abs(std::abs(g(1, 1)) - 1.0) > kUnitaryTolerance) {
    throw std::invalid_argument("rotation must be diagonal with unit-modulus entries");
  }
}

}  // namespace

double integration_constant() { return 2.0 * std::log(2.0 * std::numbers::pi); }

GaussianComponent::GaussianComponent(const CMatrix2& precision, const Complex2& info,
                                     double log_const)
    : precision_(precision), info_(info), log_const_(log_const) {
  symmetrize();
}

GaussianComponent GaussianComponent::flat() { return GaussianComponent(); }

GaussianComponent GaussianComponent::from_moments(const Complex2& mean,
                                                  const CMatrix2& covariance,
                                                  double log_weight) {
  const HermitianEig e = eig(covariance);
  if (!full_rank(e)) throw std::domain_error("covariance must be full rank");
  const CMatrix2 precision = inverse_hermitian(covariance, e.det);
  const Complex2 info = precision * mean;
  const double quad = std::real(mean.dot(info));
  return GaussianComponent(precision, info, log_weight - 0.5 * quad);
}

void GaussianComponent::symmetrize() {
  precision_(0, 0) = precision_(0, 0).real();
  precision_(1, 1) = precision_(1, 1).real();
  const cplx off = 0.5 * (precision_(0, 1) + std::conj(precision_(1, 0)));
  precision_(0, 1) = off;
  precision_(1, 0) = std::conj(off);
}

double GaussianComponent::log_value(const Complex2& h) const {
  const double quad = std::real(h.dot(precision_ * h));
  const double lin = std::real(info_.dot(h));
  return log_const_ - 0.5 * quad + lin;
}

double GaussianComponent::log_weight() const {
  const HermitianEig e = eig(precision_);
  if (!(e.trace > 0.0)) return log_const_;
  if (full_rank(e)) return log_const_ + 0.5 * quad_inverse(precision_, info_, e.det);
  const Complex2 v = dominant_vector(precision_, e.hi);
  return log_const_ + 0.5 * std::norm(v.dot(info_)) / e.hi;
}

bool GaussianComponent::is_full_rank() const { return full_rank(eig(precision_)); }

Complex2 GaussianComponent::mean() const { return covariance() * info_; }

CMatrix2 GaussianComponent::covariance() const {
  const HermitianEig e = eig(precision_);
  if (!full_rank(e)) throw std::domain_error("singular precision has no covariance");
  return inverse_hermitian(precision_, e.det);
}

GaussianComponent likelihood_component(BitPair s, const Complex2& r, double n0_det) {
  if (!(n0_det > 0.0)) {
    throw std::invalid_argument("detector noise parameter must be positive");
  }
  const CMatrix2 z = z_matrix(s);
  return GaussianComponent((z.adjoint() * z) / n0_det, (z.adjoint() * r) / n0_det,
                           -r.squaredNorm() / (2.0 * n0_det));
}

GaussianComponent combine(const GaussianComponent& a, const GaussianComponent& b) {
  GaussianComponent out;
  out.precision_ = a.precision_ + b.precision_;
  out.info_ = a.info_ + b.info_;
  out.log_const_ = a.log_const_ + b.log_const_;
  out.symmetrize();
  return out;
}

GaussianComponent pullback(const GaussianComponent& c, const CMatrix2& g) {
  check_unitary_diagonal(g);
  const Complex2 d = g.diagonal();
  GaussianComponent out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.precision_(i, j) = std::conj(d(i)) * c.precision_(i, j) * d(j);
    out.info_(i) = std::conj(d(i)) * c.info_(i);
  }
  out.log_const_ = c.log_const_;
  out.symmetrize();
  return out;
}

GaussianComponent pushforward(const GaussianComponent& c, const CMatrix2& g) {
  check_unitary_diagonal(g);
  const Complex2 d = g.diagonal();
  GaussianComponent out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.precision_(i, j) = d(i) * c.precision_(i, j) * std::conj(d(j));
    out.info_(i) = d(i) * c.info_(i);
  }
  out.log_const_ = c.log_const_;
  out.symmetrize();
  return out;
}

GaussianComponent transform(const GaussianComponent& c, const CMatrix2& g,
                            TransformDirection direction) {
  return direction == TransformDirection::pullback ? pullback(c, g) : pushforward(c, g);
}

double normalize_weights(Mixture& m) {
  std::vector<double> w;
  w.reserve(m.size());
  for (const auto& c : m) w.push_back(c.log_weight());
  const double lse = log_sum_exp(w);
  if (lse == kNegInf || std::isnan(lse)) {
    throw NumericalError("cannot normalize a mixture whose weights are all zero");
  }
  for (auto& c : m) c.shift_log(-lse);
  return lse;
}

std::optional<double> try_integrate(const GaussianComponent& c) {
  const HermitianEig e = eig(c.precision());
  if (!full_rank(e)) return std::nullopt;
  return c.log_const() + 0.5 * quad_inverse(c.precision(), c.info(), e.det) -
         std::log(e.det) + integration_constant();
}

double integrate(const GaussianComponent& c) {
  auto v = try_integrate(c);
  if (!v) throw NumericalError("improper component, cannot integrate");
  return *v;
}

namespace {

// The reductions below leave weights as they are; the public wrappers
// renormalize.
Mixture curtail_raw(const Mixture& m, std::size_t gmr) {
  if (gmr < 1) throw std::invalid_argument("curtail needs gmr >= 1");
  if (m.size() <= gmr) return m;
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) w[i] = m[i].log_weight();
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return w[x] > w[y]; });
  idx.resize(gmr);
  std::sort(idx.begin(), idx.end());
  Mixture out;
  out.reserve(gmr);
  for (std::size_t i : idx) out.push_back(m[i]);
  return out;
}

}  // namespace

Mixture curtail(const Mixture& m, std::size_t gmr) {
  Mixture out = curtail_raw(m, gmr);
  normalize_weights(out);
  return out;
}

GaussianComponent moment_match(const Mixture& m) {
  if (m.empty()) throw std::domain_error("moment match of an empty mixture");
  std::vector<double> log_mass(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    auto v = try_integrate(m[j]);
    if (!v) throw std::domain_error("moment match undefined for a singular component");
    log_mass[j] = *v;
  }
  const double total = log_sum_exp(log_mass);
  if (m.size() == 1) return m.front();

  std::vector<Complex2> means(m.size());
  Complex2 mu = Complex2::Zero();
  for (std::size_t j = 0; j < m.size(); ++j) {
    means[j] = m[j].mean();
    mu += std::exp(log_mass[j] - total) * means[j];
  }
  CMatrix2 cov = CMatrix2::Zero();
  for (std::size_t j = 0; j < m.size(); ++j) {
    const Complex2 d = means[j] - mu;
    cov += std::exp(log_mass[j] - total) * (m[j].covariance() + d * d.adjoint());
  }
  const HermitianEig e = eig(cov);
  // Integral of a component with peak logw is logw + log det(cov) + C.
  const double log_weight = total - std::log(e.det) - integration_constant();
  return GaussianComponent::from_moments(mu, cov, log_weight);
}

namespace {

std::vector<std::size_t> heaviest_first(const Mixture& m) {
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) w[i] = m[i].log_weight();
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return w[x] > w[y]; });
  return idx;
}

bool all_full_rank(const Mixture& m) {
  return std::all_of(m.begin(), m.end(), [](const auto& c) { return c.is_full_rank(); });
}

Mixture hybrid_reduce_raw(const Mixture& m, std::size_t gmr) {
  if (gmr < 2) throw std::invalid_argument("hybrid reduction needs gmr >= 2");
  if (m.size() <= gmr) return m;
  const auto order = heaviest_first(m);
  Mixture rest;
  rest.reserve(m.size() - gmr + 1);
  for (std::size_t k = gmr - 1; k < order.size(); ++k) rest.push_back(m[order[k]]);
  if (!all_full_rank(rest)) return curtail_raw(m, gmr);

  std::vector<std::size_t> keep(order.begin(), order.begin() + (gmr - 1));
  std::sort(keep.begin(), keep.end());
  Mixture out;
  out.reserve(gmr);
  for (std::size_t i : keep) out.push_back(m[i]);
  out.push_back(moment_match(rest));
  return out;
}

Mixture gaussian_approx_reduce_raw(const Mixture& m, std::size_t fallback_gmr) {
  if (!all_full_rank(m)) return curtail_raw(m, fallback_gmr);
  return Mixture{moment_match(m)};
}

}  // namespace

Mixture hybrid_reduce(const Mixture& m, std::size_t gmr) {
  Mixture out = hybrid_reduce_raw(m, gmr);
  normalize_weights(out);
  return out;
}

Mixture gaussian_approx_reduce(const Mixture& m, std::size_t fallback_gmr) {
  Mixture out = gaussian_approx_reduce_raw(m, fallback_gmr);
  normalize_weights(out);
  return out;
}

Mixture reduce(const Mixture& m, std::size_t gmr, Reduction method, double* log_scale) {
  Mixture out;
  switch (method) {
    case Reduction::curtailment:
      out = curtail_raw(m, gmr);
      break;
    case Reduction::gaussian_approx:
      out = gaussian_approx_reduce_raw(m, gmr);
      break;
    case Reduction::hybrid:
      out = hybrid_reduce_raw(m, gmr);
      break;
  }
  const double z = normalize_weights(out);
  if (log_scale) *log_scale = z;
  return out;
}

const char* to_string(Reduction r) {
  switch (r) {
    case Reduction::curtailment:
      return "curtailment";
    case Reduction::gaussian_approx:
      return "gaussian_approx";
    case Reduction::hybrid:
      return "hybrid";
  }
  return "?";
}

Reduction reduction_from_string(const std::string& s) {
  if (s == "curtailment" || s == "curtail") return Reduction::curtailment;
  if (s == "gaussian_approx" || s == "ga") return Reduction::gaussian_approx;
  if (s == "hybrid") return Reduction::hybrid;
  throw std::invalid_argument("unknown reduction method: " + s);
}

}  // namespace pnc

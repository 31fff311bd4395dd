#pragma once

#include <optional>
#include <vector>

#include "pnc/types.hpp"

namespace pnc {

// log of the integral of exp(-1/2 h* h) over C^2 (four real dimensions).
// Appears in every integral and cancels in every normalized PMF.
double integration_constant();

// A weighted Gaussian function of the channel pair h in information form:
//
//   value(h) = exp(log_const - 1/2 h* P h + Re(eta* h))
//
// P (the precision) is Hermitian positive semidefinite and may be singular,
// which is the case for likelihoods of the (0,0) and (1,1) hypotheses. The
// log weight is the peak of log value(h) over h, i.e. the log coefficient in
// the mean form exp(logw - 1/2 (h - mu)* P (h - mu)); it stays finite for
// singular P as long as eta lies in the range of P.
class GaussianComponent {
 public:
  GaussianComponent() = default;
  GaussianComponent(const CMatrix2& precision, const Complex2& info, double log_const);

  // The empty product: P = 0, eta = 0, value 1 everywhere.
  static GaussianComponent flat();
  // Built from a full-rank covariance, a mean, and the log weight (peak).
  static GaussianComponent from_moments(const Complex2& mean, const CMatrix2& covariance,
                                        double log_weight);

  const CMatrix2& precision() const { return precision_; }
  const Complex2& info() const { return info_; }
  double log_const() const { return log_const_; }

  double log_value(const Complex2& h) const;
  double log_weight() const;
  // Smallest eigenvalue above 1e-12 * trace.
  bool is_full_rank() const;
  // Both require full rank.
  Complex2 mean() const;
  CMatrix2 covariance() const;

  void shift_log(double delta) { log_const_ += delta; }

 private:
  void symmetrize();

  CMatrix2 precision_ = CMatrix2::Zero();
  Complex2 info_ = Complex2::Zero();
  double log_const_ = 0.0;

  friend GaussianComponent combine(const GaussianComponent&, const GaussianComponent&);
  friend GaussianComponent pullback(const GaussianComponent&, const CMatrix2&);
  friend GaussianComponent pushforward(const GaussianComponent&, const CMatrix2&);
};

using Mixture = std::vector<GaussianComponent>;

enum class TransformDirection {
  pullback,     // result(h) = c(G h); used by the backward recursion
  pushforward,  // result(h) = c(G^-1 h); used by the forward recursion
};

enum class Reduction { curtailment, gaussian_approx, hybrid };

// exp(-|r - Z_s h|^2 / (2 n0_det)) as a Gaussian function of h.
GaussianComponent likelihood_component(BitPair s, const Complex2& r, double n0_det);

// Pointwise product.
GaussianComponent combine(const GaussianComponent& a, const GaussianComponent& b);

// G must be diagonal with unit-modulus entries; anything else throws
// std::invalid_argument.
GaussianComponent transform(const GaussianComponent& c, const CMatrix2& g,
                            TransformDirection direction);
GaussianComponent pullback(const GaussianComponent& c, const CMatrix2& g);
GaussianComponent pushforward(const GaussianComponent& c, const CMatrix2& g);

// Rescales so that the log weights sum to one in the exp domain. Returns the
// subtracted log normalizer. Throws NumericalError if every weight is -inf.
double normalize_weights(Mixture& m);

// log of the integral of the component over C^2; nullopt when the precision
// is singular (improper component).
std::optional<double> try_integrate(const GaussianComponent& c);
// Throwing variant of try_integrate.
double integrate(const GaussianComponent& c);

// Keeps the gmr heaviest components (ties: lowest index), preserving their
// relative order, renormalized.
Mixture curtail(const Mixture& m, std::size_t gmr);

// Single Gaussian with the zeroth, first and second moments of the mixture.
// Every component must be full rank (std::domain_error otherwise).
GaussianComponent moment_match(const Mixture& m);

// Keeps the gmr-1 heaviest components and moment-matches the rest into one.
// If the remainder holds a singular component, falls back to curtail.
Mixture hybrid_reduce(const Mixture& m, std::size_t gmr);

// Moment-matches the whole mixture; falls back to curtail(m, fallback_gmr)
// when any component is singular.
Mixture gaussian_approx_reduce(const Mixture& m, std::size_t fallback_gmr);

// Dispatches to one of the reductions above. Output is normalized; if
// log_scale is given it receives the log normalizer that was divided out, so
// the unnormalized reduced mixture is exp(*log_scale) times the result.
Mixture reduce(const Mixture& m, std::size_t gmr, Reduction method,
               double* log_scale = nullptr);

const char* to_string(Reduction r);
Reduction reduction_from_string(const std::string& s);

}  // namespace pnc

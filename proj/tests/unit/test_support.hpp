#pragma once

#include <cmath>
#include <random>

#include "pnc/gaussian.hpp"
#include "pnc/types.hpp"

namespace pnc::testing {

inline cplx random_cplx(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng)};
}

inline Complex2 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  return {random_cplx(rng, scale), random_cplx(rng, scale)};
}

// Random Hermitian PSD matrix A A* (+ ridge). rank1 drops the second column.
inline CMatrix2 random_precision(std::mt19937_64& rng, bool rank1 = false,
                                 double ridge = 0.2) {
  CMatrix2 a;
  a << random_cplx(rng), random_cplx(rng), random_cplx(rng), random_cplx(rng);
  if (rank1) {
    a.col(1).setZero();
    return a * a.adjoint();
  }
  return a * a.adjoint() + ridge * CMatrix2::Identity();
}

inline GaussianComponent random_component(std::mt19937_64& rng, bool rank1 = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  const CMatrix2 p = random_precision(rng, rank1);
  // eta in the range of P keeps the peak finite.
  const Complex2 eta = p * random_vec(rng);
  return GaussianComponent(p, eta, g(rng));
}

inline CMatrix2 random_unitary_diag(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  CMatrix2 g = CMatrix2::Zero();
  g(0, 0) = std::polar(1.0, u(rng));
  g(1, 1) = std::polar(1.0, u(rng));
  return g;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Trapezoidal quadrature of exp(log_f) over a 4-D box centred at `center`,
// half-width `half` per real coordinate. Returns the log of the integral.
template <class F>
double log_quadrature(F&& log_f, const Complex2& center, double half, int points) {
  const double step = 2.0 * half / (points - 1);
  // Shift by the value at the centre to avoid overflow.
  const double ref = log_f(center);
  double sum = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x0 = -half + i * step;
    for (int j = 0; j < points; ++j) {
      const double y0 = -half + j * step;
      for (int k = 0; k < points; ++k) {
        const double x1 = -half + k * step;
        for (int l = 0; l < points; ++l) {
          const double y1 = -half + l * step;
          const Complex2 h = center + Complex2(cplx(x0, y0), cplx(x1, y1));
          sum += std::exp(log_f(h) - ref);
        }
      }
    }
  }
  return ref + std::log(sum) + 4.0 * std::log(step);
}

}  // namespace pnc::testing

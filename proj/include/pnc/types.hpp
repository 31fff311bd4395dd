#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pnc {

using cplx = std::complex<double>;

// Pair of complex scalars: correlator outputs r_n, channel pairs h_n, means,
// information vectors. Index 0 is user A / branch 1, index 1 is user B /
// branch 2.
using Complex2 = Eigen::Vector2cd;
using CMatrix2 = Eigen::Matrix2cd;

using Bits = std::vector<std::uint8_t>;

// The bits of both users in one symbol period. Hypotheses are indexed as
// 2*a + b, so index 0 = (0,0), 1 = (0,1), 2 = (1,0), 3 = (1,1).
struct BitPair {
  std::uint8_t a = 0;
  std::uint8_t b = 0;

  static constexpr BitPair from_index(int idx) {
    return BitPair{static_cast<std::uint8_t>((idx >> 1) & 1),
                   static_cast<std::uint8_t>(idx & 1)};
  }
  constexpr int index() const { return 2 * a + b; }
  constexpr int xor_bit() const { return a ^ b; }
  friend constexpr bool operator==(BitPair, BitPair) = default;
};

inline constexpr std::array<BitPair, 4> kAllBitPairs = {
    BitPair{0, 0}, BitPair{0, 1}, BitPair{1, 0}, BitPair{1, 1}};

// A pair of carrier frequency offsets in Hz.
struct CfoPair {
  double f_a = 0.0;
  double f_b = 0.0;
  friend constexpr bool operator==(CfoPair, CfoPair) = default;
};

// Raised for non-recoverable numerical conditions (improper posteriors,
// singular systems). The CLI maps it to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pnc

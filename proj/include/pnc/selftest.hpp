#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnc/bp_detector.hpp"

namespace pnc {

// BP detector (one-point grid, no reduction) against the brute-force
// posterior on random Rayleigh instances.
struct OracleCheckOptions {
  std::vector<std::size_t> n_values{2, 3, 4, 5, 6};
  std::size_t trials = 200;  // per N
  std::vector<double> snr_db{0.0, 10.0, 20.0};
  std::vector<Convention> conventions{Convention::corrected, Convention::paper_verbatim};
  bool with_prior = true;
  bool without_prior = true;
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
};

struct OracleCheckReport {
  std::size_t instances = 0;  // detector runs compared
  double max_pmf_deviation = 0.0;
  double max_evidence_deviation = 0.0;
  bool passed = false;
};

OracleCheckReport run_oracle_check(const OracleCheckOptions& opts);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// The exact-tolerance property checks behind `pncsim selftest`.
std::vector<PropertyCheck> run_property_suite(std::uint64_t seed = 1);

}  // namespace pnc

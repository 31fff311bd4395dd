#include <doctest.h>

#include <cmath>
#include <random>

#include "pnc/log_math.hpp"
#include "pnc/reference_detectors.hpp"
#include "unit/test_support.hpp"

using namespace pnc;
using namespace pnc::testing;

TEST_CASE("perfcd examples") {
  {
    const Complex2 h(cplx(0.8, -0.3), cplx(-0.2, 1.1));
    const std::vector<Complex2> r{z_matrix({0, 1}) * h};
    const auto d = perfcd_detect(r, {{h}, {}}, 0.05);
    CHECK(d.xor_bits[0] == 1);
  }
  {
    const std::vector<Complex2> r{Complex2(1.0, 1.0)};
    const auto d = perfcd_detect(r, {{Complex2(1.0, 1.0)}, {}}, 0.5);
    CHECK(d.pair_pmf[0][1] == doctest::Approx(d.pair_pmf[0][2]));
    CHECK(d.xor_pmf[0] == doctest::Approx(2.0 * d.pair_pmf[0][1]));
    CHECK(d.xor_bits[0] == 1);
  }
  {
    // |hA + hB|^2 = |hA|^2 + |hB|^2 when hA and hB are orthogonal.
    const std::vector<Complex2> r{Complex2::Zero()};
    const auto d = perfcd_detect(r, {{Complex2(cplx(1.0, 0.0), cplx(0.0, 1.0))}, {}}, 0.3);
    for (double x : d.pair_pmf[0]) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(d.xor_bits[0] == 0);
  }
  CHECK_THROWS_AS(perfcd_detect({Complex2::Zero()}, {{}, {}}, 0.1), std::invalid_argument);
}

TEST_CASE("perfcd is error free on noiseless data and symmetric in the users") {
  std::mt19937_64 rng(1);
  auto p = SystemParams::with_period(1e-6, 128, 0.0);
  std::bernoulli_distribution bit(0.5);
  std::uniform_real_distribution<double> f(-1e4, 1e4);
  for (int trial = 0; trial < 50; ++trial) {
    PacketScenario s;
    for (std::size_t n = 0; n < p.n_symbols; ++n) {
      s.bits_a.push_back(bit(rng));
      s.bits_b.push_back(bit(rng));
    }
    s.h_a = random_cplx(rng);
    s.h_b = random_cplx(rng);
    if (std::abs(s.h_a) < 1e-6 || std::abs(s.h_b) < 1e-6) continue;
    s.cfo = {f(rng), f(rng)};
    const auto pkt = simulate_packet(s, p);
    const auto d = perfcd_detect(pkt.r, PerfectSideInfo::from_packet(pkt, s.cfo), 1e-9);
    std::size_t errors = 0;
    for (std::size_t n = 0; n < p.n_symbols; ++n) errors += d.xor_bits[n] != (s.bits_a[n] ^ s.bits_b[n]);
    CHECK(errors == 0);

    PacketScenario swapped = s;
    std::swap(swapped.bits_a, swapped.bits_b);
    std::swap(swapped.h_a, swapped.h_b);
    std::swap(swapped.cfo.f_a, swapped.cfo.f_b);
    std::swap(swapped.phase_a, swapped.phase_b);
    auto noisy = p;
    noisy.n0 = 0.2;
    s.seed = swapped.seed = 77 + trial;
    const auto a = simulate_packet(s, noisy);
    const auto b = simulate_packet(swapped, noisy);
    const auto da = perfcd_detect(a.r, PerfectSideInfo::from_packet(a, s.cfo), 0.1);
    const auto db = perfcd_detect(b.r, PerfectSideInfo::from_packet(b, swapped.cfo), 0.1);
    for (std::size_t n = 0; n < p.n_symbols; ++n) {
      CHECK(std::abs(da.xor_pmf[n] - db.xor_pmf[n]) < 1e-12);
    }
  }
}

TEST_CASE("brute force single symbol against quadrature") {
  std::mt19937_64 rng(2);
  const auto p = SystemParams::with_period(1e-6, 1, 0.5);
  const std::vector<Complex2> r{random_vec(rng)};
  const double n0_det = 0.5;
  const auto prior = PriorSpec::rayleigh(1.0, 1.0);
  const auto bf = brute_force_posterior(r, {0.0, 0.0}, prior, n0_det, Convention::paper_verbatim, p);
  std::array<double, 4> logq;
  for (int s = 0; s < 4; ++s) {
    const BitPair b = BitPair::from_index(s);
    logq[s] = log_quadrature(
        [&](const Complex2& h) {
          return -(r[0] - z_matrix(b) * h).squaredNorm() / (2.0 * n0_det) - 0.5 * h.squaredNorm();
        },
        Complex2::Zero(), 7.0, 41);
  }
  const double total = log_sum_exp(logq);
  for (int s = 0; s < 4; ++s) {
    CHECK(std::abs(bf.pair_pmf[0][s] - std::exp(logq[s] - total)) < 1e-4);
  }
  CHECK(rel_diff(bf.log_evidence, total) < 1e-4);
}

TEST_CASE("brute force is symmetric under user relabelling") {
  std::mt19937_64 rng(3);
  for (double tone : {0.5e6, 0.3e6}) {
    auto p = SystemParams::with_period(1e-6, 5, 0.1);
    p.tone_offset = tone;
    std::vector<Complex2> r;
    for (int n = 0; n < 5; ++n) r.push_back(random_vec(rng));
    std::vector<Complex2> r_swapped = r;
    // Swapping the users leaves the branch outputs unchanged.
    const auto a = brute_force_posterior(r, {3000.0, -1000.0}, PriorSpec::rayleigh(1.0, 4.0), 0.05,
                                         Convention::corrected, p);
    const auto b = brute_force_posterior(r_swapped, {-1000.0, 3000.0},
                                         PriorSpec::rayleigh(4.0, 1.0), 0.05,
                                         Convention::corrected, p);
    for (int n = 0; n < 5; ++n) {
      CHECK(std::abs(a.xor_pmf[n] - b.xor_pmf[n]) < 1e-12);
      CHECK(std::abs(a.pair_pmf[n][1] - b.pair_pmf[n][2]) < 1e-12);
    }
    CHECK(std::abs(a.log_evidence - a.log_evidence_chain) < 1e-9);
  }
}

TEST_CASE("brute force preconditions") {
  const auto p = SystemParams::with_period(1e-6, 9, 0.1);
  std::vector<Complex2> r(9, Complex2::Zero());
  CHECK_THROWS_AS(brute_force_posterior(r, {}, PriorSpec::none(), 0.1, Convention::corrected, p),
                  std::invalid_argument);
  const auto p1 = SystemParams::with_period(1e-6, 1, 0.1);
  std::vector<Complex2> r1(1, Complex2(1.0, 0.5));
  CHECK_THROWS_AS(brute_force_posterior(r1, {}, PriorSpec::none(), 0.1, Convention::corrected, p1),
                  NumericalError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pnc/signal_model.hpp"
#include "unit/test_support.hpp"

using namespace pnc;

namespace {

SystemParams unit_params(std::size_t n, double n0 = 0.0) {
  // T = 1, delta_f = 1/2 keeps delta_f * T = 1/2.
  return SystemParams::with_period(1.0, n, n0);
}

PacketScenario scenario_with(Bits a, Bits b, cplx ha, cplx hb) {
  PacketScenario s;
  s.bits_a = std::move(a);
  s.bits_b = std::move(b);
  s.h_a = ha;
  s.h_b = hb;
  return s;
}

}  // namespace

TEST_CASE("cfsk phase accumulates +-pi per symbol") {
  const auto p = unit_params(2);
  CHECK(cfsk_phase({0, 1}, 0, p) == 0.0);
  CHECK(cfsk_phase({1, 1}, 0, p) == 0.0);
  CHECK(cfsk_phase({1, 1}, 1, p) == doctest::Approx(std::numbers::pi));
  // Oracle: 2 pi * (1/2) * ((2*1-1) + (2*1-1)) = 2 pi. The phase after the
  // last bit (n = N) is defined; n = N + 1 is not.
  CHECK(cfsk_phase({1, 1}, 2, p) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(cfsk_phase({0, 1}, 2, p) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cfsk_phase({0, 1}, 3, p), std::out_of_range);
}

TEST_CASE("observation matrices") {
  CHECK(z_matrix({0, 0}) == (CMatrix2() << 1, 1, 0, 0).finished());
  CHECK(z_matrix({0, 1}) == (CMatrix2() << 1, 0, 0, 1).finished());
  CHECK(z_matrix({1, 0}) == (CMatrix2() << 0, 1, 1, 0).finished());
  CHECK(z_matrix({1, 1}) == (CMatrix2() << 0, 0, 1, 1).finished());
}

TEST_CASE("rotation matrices") {
  const auto p = unit_params(4);
  for (BitPair s : {BitPair{0, 0}, BitPair{1, 1}}) {
    const CMatrix2 g = g_matrix(s, {0.0, 0.0}, p);
    CHECK(std::abs(g(0, 0) - cplx(-1.0, 0.0)) < 1e-12);
    CHECK(std::abs(g(1, 1) - cplx(-1.0, 0.0)) < 1e-12);
    CHECK(g(0, 1) == cplx(0.0));
  }
  const auto desk = SystemParams::with_period(1e-6, 8, 0.1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> f(-1e4, 1e4);
  for (int i = 0; i < 20; ++i) {
    const CMatrix2 g = g_matrix(BitPair::from_index(i % 4), {f(rng), f(rng)}, desk);
    CHECK(std::abs(std::abs(g(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(g(1, 1)) - 1.0) < 1e-14);
  }
}

TEST_CASE("alpha and beta") {
  const auto p = SystemParams::with_period(1e-6, 1, 0.0);
  auto [a0, b0] = alpha_beta(0.0, p);
  CHECK(std::abs(a0 - cplx(1.0)) < 1e-15);
  CHECK(std::abs(b0) < 1e-15);

  // Direct evaluation of the closed forms at 10 kHz.
  const double x = 2.0 * std::numbers::pi * 1e4 * 1e-6;
  const cplx j(0.0, 1.0);
  const cplx alpha_ref = (std::exp(j * x) - 1.0) / (j * x);
  const cplx beta_ref = (std::exp(j * x) - 1.0) / (-j * 2.0 * std::numbers::pi + j * x);
  auto [a, b] = alpha_beta(1e4, p);
  CHECK(std::abs(a - alpha_ref) < 1e-14);
  CHECK(std::abs(b - beta_ref) < 1e-14);
  CHECK(std::abs(std::abs(a) - 1.0) < 1e-3);
  // |beta| is 0.01009 here, a hair above 0.01.
  CHECK(std::abs(b) == doctest::Approx(0.0100944).epsilon(1e-4));

  // The small-x series matches the closed form where both are accurate.
  auto [as, bs] = alpha_beta(1e-4, p);
  const double xs = 2.0 * std::numbers::pi * 1e-4 * 1e-6;
  CHECK(std::abs(as - (std::exp(j * xs) - 1.0) / (j * xs)) < 1e-9);
  (void)bs;
}

TEST_CASE("noiseless packets follow r = Z h") {
  const auto p = unit_params(1);
  const cplx ha(0.3, -1.2), hb(0.7, 0.4);
  {
    auto pkt = simulate_packet(scenario_with({0}, {1}, ha, hb), p);
    CHECK(std::abs(pkt.r[0](0) - ha) < 1e-15);
    CHECK(std::abs(pkt.r[0](1) - hb) < 1e-15);
  }
  {
    auto pkt = simulate_packet(scenario_with({0}, {0}, ha, hb), p);
    CHECK(std::abs(pkt.r[0](0) - (ha + hb)) < 1e-15);
    CHECK(std::abs(pkt.r[0](1)) < 1e-15);
  }
}

TEST_CASE("exact model collapses to the approximate one at zero CFO") {
  auto p = SystemParams::with_period(1e-6, 32, 0.0);
  std::mt19937_64 rng(11);
  PacketScenario s;
  std::bernoulli_distribution bit(0.5);
  for (std::size_t n = 0; n < p.n_symbols; ++n) {
    s.bits_a.push_back(bit(rng));
    s.bits_b.push_back(bit(rng));
  }
  s.h_a = testing::random_cplx(rng);
  s.h_b = testing::random_cplx(rng);
  s.phase_a = 0.4;
  s.phase_b = -2.0;
  const auto approx = simulate_packet(s, p, ObservationModel::approx);
  const auto exact = simulate_packet(s, p, ObservationModel::exact);
  for (std::size_t n = 0; n < p.n_symbols; ++n) {
    CHECK((approx.r[n] - exact.r[n]).norm() < 1e-12);
  }
}

TEST_CASE("channel rotation and observation invariants") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution bit(0.5);
  std::uniform_real_distribution<double> f(-1e4, 1e4);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  auto p = SystemParams::with_period(1e-6, 40, 0.0);
  // Odd tone spacing so the rotation depends on the bits.
  p.tone_offset = 0.3e6;
  for (int trial = 0; trial < 10; ++trial) {
    PacketScenario s;
    for (std::size_t n = 0; n < p.n_symbols; ++n) {
      s.bits_a.push_back(bit(rng));
      s.bits_b.push_back(bit(rng));
    }
    s.h_a = testing::random_cplx(rng);
    s.h_b = testing::random_cplx(rng);
    s.cfo = {f(rng), f(rng)};
    s.phase_a = ph(rng);
    s.phase_b = ph(rng);
    const auto pkt = simulate_packet(s, p);
    CMatrix2 product = CMatrix2::Identity();
    for (std::size_t n = 0; n < p.n_symbols; ++n) {
      const Complex2& h = pkt.channels[n].h;
      CHECK(std::abs(std::abs(h(0)) - std::abs(s.h_a)) < 1e-12);
      CHECK(std::abs(std::abs(h(1)) - std::abs(s.h_b)) < 1e-12);
      CHECK((pkt.r[n] - z_matrix(s.bits_at(n)) * h).norm() < 1e-12);
      // Composition of rotations equals the closed-form phase of h_n.
      CHECK((product * s.initial_channel() - h).norm() < 1e-10);
      const double theta_a = cfsk_phase(s.bits_a, n, p) + p.cfo_step() * s.cfo.f_a * n;
      CHECK(std::abs(h(0) - s.h_a * std::polar(1.0, theta_a + s.phase_a)) < 1e-9);
      product = g_matrix(s.bits_at(n), s.cfo, p) * product;
    }
  }
}

TEST_CASE("noise generation is reproducible and has the requested variance") {
  auto p = SystemParams::with_period(1e-6, 4000, 0.25);
  PacketScenario s;
  s.bits_a.assign(p.n_symbols, 0);
  s.bits_b.assign(p.n_symbols, 1);
  s.h_a = 0.0;
  s.h_b = 0.0;
  s.seed = 1234;
  const auto a = simulate_packet(s, p);
  const auto b = simulate_packet(s, p);
  double power = 0.0;
  for (std::size_t n = 0; n < p.n_symbols; ++n) {
    CHECK(a.r[n] == b.r[n]);
    power += a.r[n].squaredNorm();
  }
  // Per-branch variance N0: mean |w|^2 = 0.25, estimator std ~ 0.25/sqrt(8000).
  CHECK(power / (2.0 * p.n_symbols) == doctest::Approx(0.25).epsilon(0.03));
  s.seed = 1235;
  CHECK(simulate_packet(s, p).r[0] != a.r[0]);
}

TEST_CASE("scenario validation") {
  auto p = SystemParams::with_period(1e-6, 2, 0.1);
  auto s = scenario_with({0, 1}, {1}, 1.0, 1.0);
  CHECK_THROWS_AS(simulate_packet(s, p), std::invalid_argument);
  s.bits_b = {1, 2};
  CHECK_THROWS_AS(simulate_packet(s, p), std::invalid_argument);
  s.bits_b = {1, 0};
  s.cfo = {2e4, 0.0};
  CHECK_THROWS_AS(simulate_packet(s, p), std::invalid_argument);
}

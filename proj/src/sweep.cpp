#include "pnc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <mutex>
#include <thread>

#include "pnc/reference_detectors.hpp"

namespace pnc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::uint64_t child_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

PacketScenario draw_packet(const Scenario& s, std::size_t k) {
  std::mt19937_64 rng(child_seed(s.seed, 0, k));
  PacketScenario p;
  std::bernoulli_distribution bit(0.5);
  p.bits_a.resize(s.n_symbols);
  p.bits_b.resize(s.n_symbols);
  for (std::size_t n = 0; n < s.n_symbols; ++n) {
    p.bits_a[n] = bit(rng);
    p.bits_b[n] = bit(rng);
  }
  std::tie(p.h_a, p.h_b) = s.channel.draw(rng);
  if (s.cfo.kind == CfoModel::Kind::fixed) {
    p.cfo = s.cfo.f;
  } else {
    std::uniform_real_distribution<double> f(-s.cfo_range_hz, s.cfo_range_hz);
    p.cfo.f_a = f(rng);
    p.cfo.f_b = f(rng);
  }
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  p.phase_a = phase(rng);
  p.phase_b = phase(rng);
  p.seed = child_seed(s.seed, 1, k);
  return p;
}

std::vector<CfoPair> detector_grid(const Scenario& s, CfoPair f, const SystemParams& params) {
  switch (s.grid) {
    case GridMode::known:
      return {f};
    case GridMode::local:
      return local_cfo_grid(f, params, s.cfo_grid_step_hz);
    case GridMode::full: {
      auto grid = uniform_cfo_grid(params, s.cfo_grid_step_hz);
      if (s.cfo.kind == CfoModel::Kind::fixed) insert_cfo(grid, f);
      return grid;
    }
  }
  return {f};
}

DetectorConfig make_detector_config(const Scenario& s, const DetectorSpec& d,
                                    const PacketScenario& packet, const SystemParams& params) {
  DetectorConfig cfg;
  cfg.gmr = d.gmr;
  cfg.reduction = d.reduction;
  cfg.convention = s.convention;
  // A noiseless run still needs a proper likelihood; use a small floor.
  cfg.set_noise(std::max(params.n0, 1e-6));
  cfg.cfo_grid = detector_grid(s, packet.cfo, params);
  switch (d.prior) {
    case PriorSpec::Kind::none:
      cfg.prior = PriorSpec::none();
      break;
    case PriorSpec::Kind::rayleigh: {
      const auto [pa, pb] = s.channel.mean_power();
      cfg.prior = PriorSpec::rayleigh(pa, pb);
      break;
    }
    case PriorSpec::Kind::point:
      cfg.prior = PriorSpec::point(packet.initial_channel(), s.point_spread);
      break;
  }
  return cfg;
}

PacketOutcome run_packet(const Scenario& s, const DetectorSpec& d, const PacketScenario& packet,
                         const SimulatedPacket& pkt, const SystemParams& params) {
  PacketOutcome out;
  DetectionResult res;
  try {
    if (d.kind == DetectorSpec::Kind::perfcd) {
      res = perfcd_detect(pkt.r, PerfectSideInfo::from_packet(pkt, packet.cfo),
                          detector_noise(std::max(params.n0, 1e-6), s.convention));
    } else {
      res = detect(pkt.r, make_detector_config(s, d, packet, params), params);
    }
  } catch (const NumericalError&) {
    out.failed = true;
    return out;
  }
  for (std::size_t n = 0; n < params.n_symbols; ++n) {
    out.bit_errors += res.xor_bits[n] != (packet.bits_a[n] ^ packet.bits_b[n]);
    out.sq_error += (pkt.channels[n].h - res.h_est[n]).squaredNorm();
  }
  return out;
}

double ber_ci_halfwidth(std::size_t errors, std::size_t bits) {
  if (bits == 0) return 0.0;
  const double p = static_cast<double>(errors) / static_cast<double>(bits);
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(bits));
}

std::vector<ResultRow> run_sweep(const Scenario& s, const SweepOptions& opts) {
  s.validate();
  const std::size_t n_det = s.detectors.size();
  const unsigned threads = std::max(1u, opts.threads);
  std::vector<ResultRow> rows;

  for (double snr : s.snr_db) {
    const SystemParams params = s.params(noise_from_snr_db(snr));
    // outcomes[k * n_det + d]
    std::vector<PacketOutcome> outcomes(s.packets * n_det);
    std::vector<double> seconds(threads * n_det, 0.0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&](unsigned tid) {
      try {
        for (std::size_t k = next++; k < s.packets && !stop; k = next++) {
          const PacketScenario packet = draw_packet(s, k);
          const SimulatedPacket pkt = simulate_packet(packet, params, s.observation);
          for (std::size_t d = 0; d < n_det; ++d) {
            const auto t0 = std::chrono::steady_clock::now();
            outcomes[k * n_det + d] = run_packet(s, s.detectors[d], packet, pkt, params);
            seconds[tid * n_det + d] +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    };
    if (threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (std::size_t d = 0; d < n_det; ++d) {
      const DetectorSpec& spec = s.detectors[d];
      ResultRow row;
      row.scenario = s.id;
      row.snr_db = snr;
      row.detector = spec.label();
      const bool bp = spec.kind == DetectorSpec::Kind::bpcd;
      row.gmr = !bp ? "-" : spec.gmr == kUnboundedGmr ? "inf" : std::to_string(spec.gmr);
      row.reduction = bp ? to_string(spec.reduction) : "-";
      row.prior = bp ? PriorSpec{spec.prior}.label() : "-";
      double sq = 0.0;
      for (std::size_t k = 0; k < s.packets; ++k) {
        const auto& o = outcomes[k * n_det + d];
        if (o.failed) {
          ++row.failures;
          continue;
        }
        ++row.packets;
        row.bit_errors += o.bit_errors;
        sq += o.sq_error;
      }
      const std::size_t bits = row.packets * s.n_symbols;
      row.ber = bits ? static_cast<double>(row.bit_errors) / static_cast<double>(bits) : 0.0;
      row.ber_ci95 = ber_ci_halfwidth(row.bit_errors, bits);
      row.mse_h = bits ? sq / static_cast<double>(bits) : 0.0;
      if (opts.timing) {
        for (unsigned t = 0; t < threads; ++t) row.wall_seconds += seconds[t * n_det + d];
      }
      rows.push_back(row);
      if (opts.progress) {
        std::ostringstream msg;
        msg << s.id << " snr=" << snr << " " << row.detector << " ber=" << row.ber
            << " mse=" << row.mse_h << " failures=" << row.failures;
        opts.progress(msg.str());
      }
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "scenario,snr_db,detector,gmr,reduction,prior,packets,bit_errors,ber,ber_ci95,mse_h,"
         "wall_seconds,failures\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << fmt(r.snr_db) << ',' << r.detector << ',' << r.gmr << ','
        << r.reduction << ',' << r.prior << ',' << r.packets << ',' << r.bit_errors << ','
        << fmt(r.ber) << ',' << fmt(r.ber_ci95) << ',' << fmt(r.mse_h) << ','
        << fmt(r.wall_seconds) << ',' << r.failures << '\n';
  }
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_results_csv(out, rows);
  return out.str();
}

double snr_at_ber(std::vector<std::pair<double, double>> curve, double target_ber) {
  if (!(target_ber > 0.0)) throw std::domain_error("target BER must be positive");
  std::sort(curve.begin(), curve.end());
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto [x0, y0] = curve[i];
    const auto [x1, y1] = curve[i + 1];
    if (!(y0 > 0.0 && y1 > 0.0)) continue;
    if (y0 >= target_ber && y1 <= target_ber) {
      if (y0 == y1) return x0;
      const double l0 = std::log10(y0), l1 = std::log10(y1), lt = std::log10(target_ber);
      return x0 + (lt - l0) * (x1 - x0) / (l1 - l0);
    }
  }
  throw std::domain_error("target BER is not bracketed by the curve");
}

double snr_gap_at_ber(const std::vector<ResultRow>& rows_a, const std::vector<ResultRow>& rows_b,
                      double target_ber) {
  auto curve = [](const std::vector<ResultRow>& rows) {
    std::vector<std::pair<double, double>> c;
    for (const auto& r : rows) c.emplace_back(r.snr_db, r.ber);
    return c;
  };
  return snr_at_ber(curve(rows_a), target_ber) - snr_at_ber(curve(rows_b), target_ber);
}

std::vector<ResultRow> rows_for(const std::vector<ResultRow>& rows, const std::string& detector) {
  std::vector<ResultRow> out;
  for (const auto& r : rows) {
    if (r.detector == detector) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.snr_db < b.snr_db; });
  return out;
}

}  // namespace pnc

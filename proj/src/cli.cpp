#include "pnc/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "pnc/packet_io.hpp"
#include "pnc/reference_detectors.hpp"
#include "pnc/scenario.hpp"
#include "pnc/selftest.hpp"
#include "pnc/sweep.hpp"

namespace pnc {

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
  bool paper_convention = false;
  bool no_timing = false;
};

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw UsageError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string num(double v, const char* f = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Scenario load_with_overrides(const std::string& path, const Globals& g) {
  Scenario s = load_scenario(path);
  if (g.seed) s.seed = *g.seed;
  if (g.paper_convention) s.convention = Convention::paper_verbatim;
  s.validate();
  return s;
}

int cmd_simulate(const Globals& g, const std::string& config, const std::string& dump_path,
                 std::size_t dump_index, bool quiet) {
  const Scenario s = load_with_overrides(config, g);
  if (!dump_path.empty()) {
    if (dump_index >= s.packets) throw UsageError("--dump-index is beyond the packet count");
    std::ofstream f(dump_path);
    if (!f) throw UsageError("cannot open '" + dump_path + "'");
    const SystemParams params = s.params(noise_from_snr_db(s.snr_db.front()));
    const PacketScenario packet = draw_packet(s, dump_index);
    write_packet_csv(f, make_record(packet, simulate_packet(packet, params, s.observation),
                                    params));
  }
  if (!quiet) std::cerr << describe(s);
  SweepOptions opts;
  opts.threads = g.threads;
  opts.timing = !g.no_timing;
  if (!quiet) opts.progress = [](const std::string& m) { std::cerr << m << '\n'; };
  const auto rows = run_sweep(s, opts);
  Output out(g.out);
  write_results_csv(out.stream(), rows);
  std::size_t failures = 0;
  for (const auto& r : rows) failures += r.failures;
  if (failures > 0) {
    std::cerr << "warning: " << failures << " packet detections aborted with a numerical error\n";
  }
  return kOk;
}

int cmd_detect(const Globals& g, const std::string& in_path, const std::string& config,
               const std::string& detector_text) {
  Scenario s = load_scenario(config);
  if (g.paper_convention) s.convention = Convention::paper_verbatim;
  std::ifstream in(in_path);
  if (!in) throw UsageError("cannot open packet file '" + in_path + "'");
  PacketRecord rec;
  try {
    rec = read_packet_csv(in);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  if (rec.r.empty()) throw UsageError("packet has no symbols");
  s.n_symbols = rec.r.size();
  s.symbol_period = rec.symbol_period;

  const DetectorSpec spec =
      detector_text.empty() ? s.detectors.front() : DetectorSpec::parse(detector_text);
  const SystemParams params = s.params(rec.n0);

  // The detector only sees the scenario's CFO and channel through the grid and
  // the point prior; both need the ground truth.
  PacketScenario packet;
  packet.bits_a.assign(s.n_symbols, 0);
  packet.bits_b.assign(s.n_symbols, 0);
  if (rec.truth) {
    packet.bits_a = rec.truth->bits_a;
    packet.bits_b = rec.truth->bits_b;
    packet.cfo = rec.truth->cfo;
    packet.h_a = rec.truth->h.front()(0);
    packet.h_b = rec.truth->h.front()(1);
  } else {
    if (spec.kind == DetectorSpec::Kind::perfcd) throw UsageError("perfcd needs ground truth");
    if (spec.prior == PriorSpec::Kind::point) throw UsageError("point prior needs ground truth");
    if (s.grid != GridMode::full) throw UsageError("cfo_grid local/known needs ground truth");
  }

  DetectionResult res;
  if (spec.kind == DetectorSpec::Kind::perfcd) {
    PerfectSideInfo side{rec.truth->h, rec.truth->cfo};
    res = perfcd_detect(rec.r, side, detector_noise(std::max(rec.n0, 1e-6), s.convention));
  } else {
    DetectorConfig cfg = make_detector_config(s, spec, packet, params);
    res = detect(rec.r, cfg, params);
  }

  Output out(g.out);
  std::ostream& os = out.stream();
  os << "# detector=" << spec.label() << ",convention=" << to_string(s.convention) << '\n';
  os << "# xor_bits=";
  for (auto b : res.xor_bits) os << int(b);
  os << '\n';
  if (rec.truth) {
    std::size_t errors = 0;
    for (std::size_t n = 0; n < rec.r.size(); ++n) {
      errors += res.xor_bits[n] != (rec.truth->bits_a[n] ^ rec.truth->bits_b[n]);
    }
    os << "# xor_errors=" << errors << '\n';
  }
  os << "n,xor_bit,p_xor,p00,p01,p10,p11,h_a_re,h_a_im,h_b_re,h_b_im\n";
  for (std::size_t n = 0; n < rec.r.size(); ++n) {
    os << n << ',' << int(res.xor_bits[n]) << ',' << num(res.xor_pmf[n]);
    for (double p : res.pair_pmf[n]) os << ',' << num(p);
    const Complex2& h = res.h_est[n];
    os << ',' << num(h(0).real()) << ',' << num(h(0).imag()) << ',' << num(h(1).real()) << ','
       << num(h(1).imag()) << '\n';
  }
  return kOk;
}

int cmd_oracle(const Globals& g, std::size_t n, std::size_t trials) {
  OracleCheckOptions opts;
  if (n > 0) opts.n_values = {n};
  opts.trials = trials;
  if (g.seed) opts.seed = *g.seed;
  if (g.paper_convention) opts.conventions = {Convention::paper_verbatim};
  for (std::size_t v : opts.n_values) {
    if (v > kBruteForceMaxSymbols) throw UsageError("--n must be at most 8");
  }
  const auto report = run_oracle_check(opts);
  Output out(g.out);
  out.stream() << "instances " << report.instances << '\n'
               << "max_pmf_deviation " << num(report.max_pmf_deviation, "%.3e") << '\n'
               << "max_evidence_deviation " << num(report.max_evidence_deviation, "%.3e")
               << '\n'
               << (report.passed ? "PASS" : "FAIL") << " (tolerance "
               << num(opts.tolerance, "%.0e") << ")\n";
  return report.passed ? kOk : kNumerical;
}

int cmd_selftest(const Globals& g) {
  const auto checks = run_property_suite(g.seed.value_or(1));
  Output out(g.out);
  bool ok = true;
  for (const auto& c : checks) {
    out.stream() << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? kOk : kNumerical;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Bit-level physical-layer network coding simulator"};
  app.name("pncsim");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Base random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_flag("--paper-convention", g.paper_convention,
               "Use the exp(-|w|^2/(2N0)) exponent convention");
  app.add_flag("--no-timing", g.no_timing, "Write 0 to wall_seconds");

  std::string config, dump_path;
  std::size_t dump_index = 0;
  bool quiet = false;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo sweep and write result CSV");
  sim->add_option("config", config, "Scenario file")->required();
  sim->add_option("--dump-packet", dump_path, "Also write one packet (first SNR point) as CSV");
  sim->add_option("--dump-index", dump_index, "Packet index for --dump-packet");
  sim->add_flag("-q,--quiet", quiet, "No progress output");

  std::string in_path, det_config, detector;
  auto* det = app.add_subcommand("detect", "Detect one packet from a packet CSV");
  det->add_option("--in", in_path, "Packet CSV")->required();
  det->add_option("--config", det_config, "Scenario file (detector and grid settings)")
      ->required();
  det->add_option("--detector", detector, "Detector spec; default: first in the config");

  std::size_t n = 0, trials = 200;
  auto* oracle = app.add_subcommand("oracle-check", "Compare BP against brute force");
  oracle->add_option("--n", n, "Packet length (default: 2..6)")->check(CLI::Range(1, 8));
  oracle->add_option("--trials", trials, "Random instances per packet length")
      ->check(CLI::PositiveNumber);

  auto* self = app.add_subcommand("selftest", "Run the property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*sim) return cmd_simulate(g, config, dump_path, dump_index, quiet);
    if (*det) return cmd_detect(g, in_path, det_config, detector);
    if (*oracle) return cmd_oracle(g, n, trials);
    if (*self) return cmd_selftest(g);
  } catch (const ConfigError& e) {
    std::cerr << "pncsim: config error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "pncsim: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "pncsim: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "pncsim: invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "pncsim: error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}

}  // namespace pnc

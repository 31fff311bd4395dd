#include "pnc/packet_io.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pnc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::runtime_error("packet csv line " + std::to_string(line) + ": " + what);
}

double number(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) fail(line, "bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "bad number '" + s + "'");
  }
}

const char* kBase = "n,r1_re,r1_im,r2_re,r2_im";
const char* kTruth = ",s_a,s_b,h_a_re,h_a_im,h_b_re,h_b_im";

}  // namespace

void write_packet_csv(std::ostream& out, const PacketRecord& p) {
  out << "# N=" << p.r.size() << ",T=" << fmt(p.symbol_period) << ",N0=" << fmt(p.n0);
  if (p.truth) out << ",f_a_hz=" << fmt(p.truth->cfo.f_a) << ",f_b_hz=" << fmt(p.truth->cfo.f_b);
  out << '\n' << kBase << (p.truth ? kTruth : "") << '\n';
  for (std::size_t n = 0; n < p.r.size(); ++n) {
    out << n << ',' << fmt(p.r[n](0).real()) << ',' << fmt(p.r[n](0).imag()) << ','
        << fmt(p.r[n](1).real()) << ',' << fmt(p.r[n](1).imag());
    if (p.truth) {
      const auto& t = *p.truth;
      out << ',' << int(t.bits_a[n]) << ',' << int(t.bits_b[n]) << ',' << fmt(t.h[n](0).real())
          << ',' << fmt(t.h[n](0).imag()) << ',' << fmt(t.h[n](1).real()) << ','
          << fmt(t.h[n](1).imag());
    }
    out << '\n';
  }
}

PacketRecord read_packet_csv(std::istream& in) {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) fail(lineno, "missing '# N=...' header");
  std::map<std::string, std::string> meta;
  for (const auto& kv : split(line.substr(2), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(lineno, "bad header field '" + kv + "'");
    meta[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const char* k : {"N", "T", "N0"}) {
    if (!meta.count(k)) fail(lineno, std::string("header lacks ") + k);
  }
  PacketRecord p;
  const double n_sym = number(meta["N"], lineno);
  p.symbol_period = number(meta["T"], lineno);
  p.n0 = number(meta["N0"], lineno);
  const bool has_f = meta.count("f_a_hz") && meta.count("f_b_hz");

  ++lineno;
  if (!std::getline(in, line)) fail(lineno, "missing column header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool has_truth = line == std::string(kBase) + kTruth;
  if (!has_truth && line != kBase) fail(lineno, "unexpected column header");
  if (has_truth != has_f) fail(lineno, "ground truth columns and CFOs must come together");
  if (has_truth) {
    p.truth.emplace();
    p.truth->cfo = {number(meta["f_a_hz"], 1), number(meta["f_b_hz"], 1)};
  }

  const std::size_t cols = has_truth ? 11 : 5;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != cols) fail(lineno, "expected " + std::to_string(cols) + " columns");
    if (number(f[0], lineno) != static_cast<double>(p.r.size())) fail(lineno, "symbol index out of order");
    p.r.emplace_back(cplx(number(f[1], lineno), number(f[2], lineno)),
                     cplx(number(f[3], lineno), number(f[4], lineno)));
    if (has_truth) {
      const double a = number(f[5], lineno), b = number(f[6], lineno);
      if ((a != 0 && a != 1) || (b != 0 && b != 1)) fail(lineno, "bits must be 0 or 1");
      p.truth->bits_a.push_back(static_cast<std::uint8_t>(a));
      p.truth->bits_b.push_back(static_cast<std::uint8_t>(b));
      p.truth->h.emplace_back(cplx(number(f[7], lineno), number(f[8], lineno)),
                              cplx(number(f[9], lineno), number(f[10], lineno)));
    }
  }
  if (static_cast<double>(p.r.size()) != n_sym) {
    throw std::runtime_error("packet csv: header says N=" + meta["N"] + " but found " +
                             std::to_string(p.r.size()) + " rows");
  }
  return p;
}

PacketRecord make_record(const PacketScenario& scenario, const SimulatedPacket& pkt,
                         const SystemParams& params) {
  PacketRecord p;
  p.symbol_period = params.symbol_period;
  p.n0 = params.n0;
  p.r = pkt.r;
  PacketTruth t;
  t.bits_a = scenario.bits_a;
  t.bits_b = scenario.bits_b;
  t.cfo = scenario.cfo;
  for (const auto& c : pkt.channels) t.h.push_back(c.h);
  p.truth = std::move(t);
  return p;
}

}  // namespace pnc

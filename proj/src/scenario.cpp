#include "pnc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <set>
#include <sstream>

namespace pnc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits on `sep` outside parentheses.
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + text + "'");
  }
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) {
    throw ConfigError("bad count for " + key + ": '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

cplx parse_complex(const std::string& text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '(') {
    std::istringstream in(t);
    cplx v;
    in >> v;
    if (!in || in.peek() != EOF) throw ConfigError("bad complex number: '" + text + "'");
    return v;
  }
  static const std::string num = R"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)";
  static const std::regex real_only("^[+-]?" + num + "$");
  static const std::regex imag_only("^([+-]?(?:" + num + ")?)[ij]$");
  static const std::regex both("^([+-]?" + num + ")([+-](?:" + num + ")?)[ij]$");
  auto coeff = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return std::stod(t);
  };
  std::smatch m;
  if (std::regex_match(t, real_only)) return {std::stod(t), 0.0};
  if (std::regex_match(t, m, imag_only)) return {0.0, coeff(m[1].str())};
  if (std::regex_match(t, m, both)) return {std::stod(m[1].str()), coeff(m[2].str())};
  throw ConfigError("bad complex number: '" + text + "'");
}

double noise_from_snr_db(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

std::pair<double, double> ChannelModel::mean_power() const {
  switch (kind) {
    case Kind::rayleigh:
      return {var_a, var_b};
    case Kind::fixed:
      return {std::norm(h_a), std::norm(h_b)};
    case Kind::discrete: {
      double a = 0.0, b = 0.0;
      for (const auto& e : table) {
        a += e.probability * std::norm(e.h_a);
        b += e.probability * std::norm(e.h_b);
      }
      return {a, b};
    }
  }
  return {1.0, 1.0};
}

std::pair<cplx, cplx> ChannelModel::draw(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::rayleigh: {
      std::normal_distribution<double> g(0.0, 1.0);
      const double sa = std::sqrt(var_a / 2.0);
      const double sb = std::sqrt(var_b / 2.0);
      const double ar = g(rng), ai = g(rng), br = g(rng), bi = g(rng);
      return {cplx(sa * ar, sa * ai), cplx(sb * br, sb * bi)};
    }
    case Kind::fixed:
      return {h_a, h_b};
    case Kind::discrete: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double x = u(rng);
      double acc = 0.0;
      for (const auto& e : table) {
        acc += e.probability;
        if (x < acc) return {e.h_a, e.h_b};
      }
      return {table.back().h_a, table.back().h_b};
    }
  }
  return {h_a, h_b};
}

void ChannelModel::validate() const {
  if (kind == Kind::rayleigh && !(var_a > 0.0 && var_b > 0.0)) {
    throw ConfigError("Rayleigh variances must be positive");
  }
  if (kind == Kind::discrete) {
    if (table.empty()) throw ConfigError("discrete channel model needs discrete_table");
    double total = 0.0;
    for (const auto& e : table) {
      if (!(e.probability >= 0.0)) throw ConfigError("negative probability in discrete_table");
      total += e.probability;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("discrete_table probabilities must sum to 1");
  }
}

DetectorSpec DetectorSpec::parse(const std::string& text) {
  const auto parts = split_top(text, ':');
  DetectorSpec d;
  if (parts[0] == "perfcd") {
    if (parts.size() != 1) throw ConfigError("perfcd takes no parameters: '" + text + "'");
    d.kind = Kind::perfcd;
    return d;
  }
  if (parts[0] != "bpcd") throw ConfigError("unknown detector '" + parts[0] + "'");
  if (parts.size() != 4) throw ConfigError("detector must be name:gmr:reduction:prior, got '" + text + "'");
  if (parts[1] == "inf") {
    d.gmr = kUnboundedGmr;
  } else {
    d.gmr = parse_count("detector gmr", parts[1]);
    if (d.gmr < 1) throw ConfigError("detector gmr must be at least 1");
  }
  try {
    d.reduction = reduction_from_string(parts[2]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (d.reduction == Reduction::hybrid && d.gmr < 2) throw ConfigError("hybrid needs gmr >= 2");
  if (parts[3] == "none") {
    d.prior = PriorSpec::Kind::none;
  } else if (parts[3] == "rayleigh" || parts[3] == "prior") {
    d.prior = PriorSpec::Kind::rayleigh;
  } else if (parts[3] == "point") {
    d.prior = PriorSpec::Kind::point;
  } else {
    throw ConfigError("unknown prior '" + parts[3] + "'");
  }
  return d;
}

std::string DetectorSpec::label() const {
  if (kind == Kind::perfcd) return "perfcd";
  std::ostringstream out;
  out << "bpcd:" << (gmr == kUnboundedGmr ? std::string("inf") : std::to_string(gmr)) << ':'
      << to_string(reduction) << ':' << PriorSpec{prior}.label();
  return out.str();
}

SystemParams Scenario::params(double n0) const {
  SystemParams p = SystemParams::with_period(symbol_period, n_symbols, n0);
  p.cfo_min = -cfo_range_hz;
  p.cfo_max = cfo_range_hz;
  return p;
}

void Scenario::validate() const {
  channel.validate();
  if (snr_db.empty()) throw ConfigError("snr_db_list is empty");
  if (packets < 1) throw ConfigError("packets must be at least 1");
  if (n_symbols < 1) throw ConfigError("n_symbols must be at least 1");
  if (detectors.empty()) throw ConfigError("no detectors configured");
  if (!(cfo_grid_step_hz > 0.0)) throw ConfigError("cfo_grid_step_hz must be positive");
  if (!(symbol_period > 0.0)) throw ConfigError("symbol_period must be positive");
  if (!(cfo_range_hz >= 0.0)) throw ConfigError("cfo_range_hz must be non-negative");
  if (!(point_spread > 0.0)) throw ConfigError("point_spread must be positive");
  if (cfo.kind == CfoModel::Kind::fixed) {
    if (!params(1.0).contains(cfo.f)) throw ConfigError("fixed CFO outside the CFO range");
  }
  for (const auto& d : detectors) {
    if (d.kind == DetectorSpec::Kind::bpcd && d.prior == PriorSpec::Kind::none && n_symbols < 2) {
      throw ConfigError("prior-free detection needs at least two symbols");
    }
  }
}

Scenario parse_scenario(std::istream& in) {
  static const std::set<std::string> known = {
      "scenario",      "channel_model",  "h_a",         "h_b",          "sigma2_a",
      "sigma2_b",      "discrete_table", "cfo_mode",    "f_a_hz",       "f_b_hz",
      "snr_db_list",   "packets",        "n_symbols",   "detectors",    "seed",
      "cfo_grid_step_hz", "cfo_grid",    "convention",  "observation",  "symbol_period",
      "cfo_range_hz",  "point_spread"};
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (kv.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }

  Scenario s;
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("scenario")) s.id = *v;
  if (auto v = get("channel_model")) {
    if (*v == "rayleigh") {
      s.channel.kind = ChannelModel::Kind::rayleigh;
    } else if (*v == "fixed") {
      s.channel.kind = ChannelModel::Kind::fixed;
    } else if (*v == "discrete") {
      s.channel.kind = ChannelModel::Kind::discrete;
    } else {
      throw ConfigError("unknown channel_model '" + *v + "'");
    }
  }
  if (auto v = get("h_a")) s.channel.h_a = parse_complex(*v);
  if (auto v = get("h_b")) s.channel.h_b = parse_complex(*v);
  if (auto v = get("sigma2_a")) s.channel.var_a = parse_double("sigma2_a", *v);
  if (auto v = get("sigma2_b")) s.channel.var_b = parse_double("sigma2_b", *v);
  if (auto v = get("discrete_table")) {
    for (const auto& entry : split_top(*v, ';')) {
      if (entry.empty()) continue;
      const auto f = split_top(entry, ',');
      if (f.size() != 3) throw ConfigError("discrete_table entry must be hA,hB,p: '" + entry + "'");
      s.channel.table.push_back(
          {parse_complex(f[0]), parse_complex(f[1]), parse_double("discrete_table", f[2])});
    }
  }
  if (auto v = get("cfo_mode")) {
    if (*v == "fixed") {
      s.cfo.kind = CfoModel::Kind::fixed;
    } else if (*v == "uniform") {
      s.cfo.kind = CfoModel::Kind::uniform;
    } else {
      throw ConfigError("unknown cfo_mode '" + *v + "'");
    }
  }
  if (auto v = get("f_a_hz")) s.cfo.f.f_a = parse_double("f_a_hz", *v);
  if (auto v = get("f_b_hz")) s.cfo.f.f_b = parse_double("f_b_hz", *v);
  if (auto v = get("snr_db_list")) {
    for (const auto& x : split_top(*v, ',')) {
      if (!x.empty()) s.snr_db.push_back(parse_double("snr_db_list", x));
    }
  }
  if (auto v = get("packets")) s.packets = parse_count("packets", *v);
  if (auto v = get("n_symbols")) s.n_symbols = parse_count("n_symbols", *v);
  if (auto v = get("detectors")) {
    for (const auto& x : split_top(*v, ',')) {
      if (!x.empty()) s.detectors.push_back(DetectorSpec::parse(x));
    }
  }
  if (auto v = get("seed")) {
    try {
      std::size_t pos = 0;
      s.seed = std::stoull(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument(*v);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + *v + "'");
    }
  }
  if (auto v = get("cfo_grid_step_hz")) s.cfo_grid_step_hz = parse_double("cfo_grid_step_hz", *v);
  if (auto v = get("cfo_grid")) {
    if (*v == "full") {
      s.grid = GridMode::full;
    } else if (*v == "local") {
      s.grid = GridMode::local;
    } else if (*v == "known") {
      s.grid = GridMode::known;
    } else {
      throw ConfigError("unknown cfo_grid '" + *v + "'");
    }
  }
  if (auto v = get("convention")) {
    try {
      s.convention = convention_from_string(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto v = get("observation")) {
    if (*v == "approx") {
      s.observation = ObservationModel::approx;
    } else if (*v == "exact") {
      s.observation = ObservationModel::exact;
    } else {
      throw ConfigError("unknown observation '" + *v + "'");
    }
  }
  if (auto v = get("symbol_period")) s.symbol_period = parse_double("symbol_period", *v);
  if (auto v = get("cfo_range_hz")) s.cfo_range_hz = parse_double("cfo_range_hz", *v);
  if (auto v = get("point_spread")) s.point_spread = parse_double("point_spread", *v);
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_scenario(in);
}

std::string describe(const Scenario& s) {
  std::ostringstream out;
  out << "scenario " << s.id << ": N=" << s.n_symbols << ", packets/point=" << s.packets
      << ", SNRs=" << s.snr_db.size() << ", detectors=";
  for (std::size_t i = 0; i < s.detectors.size(); ++i) {
    out << (i ? "," : "") << s.detectors[i].label();
  }
  return out.str();
}

}  // namespace pnc

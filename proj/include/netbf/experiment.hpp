#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "netbf/channel.hpp"
#include "netbf/dlsolver.hpp"
#include "netbf/montecarlo.hpp"

namespace netbf {

/// Malformed configuration text; line and column are 1-based.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct ConfigValue {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

/// "section.key" -> value. Keys before any header live in section "".
using ConfigTable = std::map<std::string, ConfigValue>;

inline ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const std::size_t col = first + 1;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string_view::npos) throw ConfigError(lineno, col, "unterminated section header");
      if (const auto extra = line.find_first_not_of(" \t\r", close + 1); extra != std::string_view::npos)
        throw ConfigError(lineno, extra + 1, "text after section header");
      section = std::string(trim(line.substr(first + 1, close - first - 1)));
      if (section.empty()) throw ConfigError(lineno, col + 1, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(lineno, col, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(lineno, col, "missing key");
    const std::string_view rest = line.substr(eq + 1);
    const auto vstart = rest.find_first_not_of(" \t\r");
    const std::string value(trim(rest));
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) throw ConfigError(lineno, col, "duplicate key '" + full + "'");
    table[full] = {value, lineno, vstart == std::string_view::npos ? eq + 2 : eq + 2 + vstart};
  }
  return table;
}

struct ExperimentConfig {
  std::vector<Scheme> schemes;
  Topology topology = Topology::unit_variance(2);
  double start_db = 0.0;
  double stop_db = 20.0;
  double step_db = 2.5;
  /// P_i = relay_power_scale[i] * P; empty means all ones.
  std::vector<double> relay_power_scale;
  double source_power_scale = 1.0;
  std::uint64_t trials_per_point = 100000;
  std::uint64_t min_errors = 0;
  std::uint64_t max_trials = 0;
  /// 0 = one per hardware thread.
  unsigned workers = 1;
  std::uint64_t seed = 1;
  IterationControl ctrl{};
  int b1 = 16;
  std::vector<double> target_bler{1e-2, 1e-3};
  std::optional<std::pair<double, double>> slope_window;
  std::filesystem::path output = "out";

  void validate() const {
    if (schemes.empty()) throw std::invalid_argument("no schemes selected");
    topology.validate();
    if (!(step_db > 0.0)) throw std::invalid_argument("step_db must be positive");
    if (stop_db < start_db) throw std::invalid_argument("power sweep is empty");
    if (!relay_power_scale.empty() && relay_power_scale.size() != topology.relay_count)
      throw std::invalid_argument("relay power overrides must name every relay");
    for (double s : relay_power_scale)
      if (!(s >= 0.0)) throw std::invalid_argument("relay power scale must be >= 0");
    if (!(source_power_scale > 0.0)) throw std::invalid_argument("source power scale must be positive");
    if (trials_per_point == 0) throw std::invalid_argument("trials must be positive");
    if (b1 < 1 || b1 > 64) throw std::invalid_argument("b1 must be 1..64");
    ctrl.validate();
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string{} : cur.substr(b, e - b + 1));
  }
  return out;
}

inline double to_double(const ConfigValue& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v.text, &used);
  } catch (const std::exception&) {
    throw ConfigError(v.line, v.column, "expected a number, got '" + v.text + "'");
  }
  if (used != v.text.size()) throw ConfigError(v.line, v.column + used, "trailing characters after number");
  return x;
}

inline std::uint64_t to_count(const ConfigValue& v) {
  const double x = to_double(v);
  if (x < 0.0 || x != std::floor(x) || x > 1.8e19) throw ConfigError(v.line, v.column, "expected a non-negative integer");
  return static_cast<std::uint64_t>(x);
}

}  // namespace detail

/// Builds a config from parsed key/value pairs. Unknown keys are errors.
inline ExperimentConfig config_from_table(const ConfigTable& t) {
  using detail::to_count;
  using detail::to_double;
  ExperimentConfig c;
  auto get = [&](const char* key) -> const ConfigValue* {
    auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
  };
  static const char* known[] = {
      "experiment.schemes",       "experiment.seed",        "experiment.trials",       "experiment.min_errors",
      "experiment.max_trials",    "experiment.workers",     "experiment.output",       "experiment.target_bler",
      "experiment.slope_window",  "topology.kind",          "topology.relays",         "topology.path_loss_exponent",
      "topology.distance",        "topology.disk_radius",   "power.start_db",          "power.stop_db",
      "power.step_db",            "power.relay_scale",      "power.source_scale",      "solver.iter",
      "solver.thre",              "solver.relative",        "feedback.b1",
  };
  for (const auto& [k, v] : t)
    if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return k == s; }) == std::end(known))
      throw ConfigError(v.line, 1, "unknown key '" + k + "'");

  const ConfigValue* schemes = get("experiment.schemes");
  if (!schemes) throw ConfigError(1, 1, "missing experiment.schemes");
  for (const auto& name : detail::split_list(schemes->text)) {
    try {
      c.schemes.push_back(scheme_from_string(name));
    } catch (const std::invalid_argument&) {
      throw ConfigError(schemes->line, schemes->column, "unknown scheme '" + name + "'");
    }
  }

  std::size_t relays = 2;
  if (auto v = get("topology.relays")) relays = static_cast<std::size_t>(to_count(*v));
  TopologyKind kind = TopologyKind::UnitVariance;
  if (auto v = get("topology.kind")) {
    try {
      kind = topology_kind_from_string(v->text);
    } catch (const std::invalid_argument&) {
      throw ConfigError(v->line, v->column, "unknown topology '" + v->text + "'");
    }
  }
  switch (kind) {
    case TopologyKind::UnitVariance: c.topology = Topology::unit_variance(relays); break;
    case TopologyKind::Triangle: c.topology = Topology::triangle(relays); break;
    case TopologyKind::Line: c.topology = Topology::line(relays); break;
    case TopologyKind::RandomDisk: c.topology = Topology::random_disk(relays); break;
  }
  if (auto v = get("topology.path_loss_exponent")) c.topology.path_loss_exponent = to_double(*v);
  if (auto v = get("topology.distance")) c.topology.tx_rx_distance = to_double(*v);
  if (auto v = get("topology.disk_radius")) c.topology.disk_radius = to_double(*v);

  if (auto v = get("power.start_db")) c.start_db = to_double(*v);
  if (auto v = get("power.stop_db")) c.stop_db = to_double(*v);
  if (auto v = get("power.step_db")) c.step_db = to_double(*v);
  if (auto v = get("power.source_scale")) c.source_power_scale = to_double(*v);
  if (auto v = get("power.relay_scale")) {
    for (const auto& s : detail::split_list(v->text)) c.relay_power_scale.push_back(to_double({s, v->line, v->column}));
  }

  if (auto v = get("experiment.seed")) c.seed = to_count(*v);
  if (auto v = get("experiment.trials")) c.trials_per_point = to_count(*v);
  if (auto v = get("experiment.min_errors")) c.min_errors = to_count(*v);
  if (auto v = get("experiment.max_trials")) c.max_trials = to_count(*v);
  if (auto v = get("experiment.workers")) c.workers = static_cast<unsigned>(to_count(*v));
  if (auto v = get("experiment.output")) c.output = v->text;
  if (auto v = get("experiment.target_bler")) {
    c.target_bler.clear();
    for (const auto& s : detail::split_list(v->text)) c.target_bler.push_back(to_double({s, v->line, v->column}));
  }
  if (auto v = get("experiment.slope_window")) {
    const auto parts = detail::split_list(v->text);
    if (parts.size() != 2) throw ConfigError(v->line, v->column, "slope_window needs two values");
    c.slope_window = {to_double({parts[0], v->line, v->column}), to_double({parts[1], v->line, v->column})};
  }
  if (auto v = get("solver.iter")) c.ctrl.iter = static_cast<int>(to_count(*v));
  if (auto v = get("solver.thre")) c.ctrl.thre = to_double(*v);
  if (auto v = get("solver.relative")) {
    if (v->text != "true" && v->text != "false" && v->text != "1" && v->text != "0")
      throw ConfigError(v->line, v->column, "expected true or false");
    c.ctrl.relative = v->text == "true" || v->text == "1";
  }
  if (auto v = get("feedback.b1")) c.b1 = static_cast<int>(to_count(*v));

  // Semantic checks, reported at the offending key.
  auto require = [&](bool ok, const char* key, const std::string& msg) {
    if (ok) return;
    const ConfigValue* v = get(key);
    throw ConfigError(v ? v->line : 1, v ? v->column : 1, msg);
  };
  require(c.topology.relay_count >= 1, "topology.relays", "relays must be >= 1");
  require(c.topology.tx_rx_distance > 0.0, "topology.distance", "distance must be positive");
  require(c.topology.path_loss_exponent >= 0.0, "topology.path_loss_exponent", "path-loss exponent must be >= 0");
  require(kind != TopologyKind::RandomDisk || (c.topology.disk_radius > 0.0 && c.topology.disk_radius < 1.0),
          "topology.disk_radius", "disk radius must lie in (0,1)");
  require(c.step_db > 0.0, "power.step_db", "step_db must be positive");
  require(c.stop_db >= c.start_db, "power.stop_db", "stop_db is below start_db");
  require(c.relay_power_scale.empty() || c.relay_power_scale.size() == c.topology.relay_count, "power.relay_scale",
          "relay_scale needs one entry per relay");
  for (double x : c.relay_power_scale) require(x >= 0.0, "power.relay_scale", "relay_scale entries must be >= 0");
  require(c.source_power_scale > 0.0, "power.source_scale", "source_scale must be positive");
  require(c.trials_per_point > 0, "experiment.trials", "trials must be positive");
  require(c.b1 >= 1 && c.b1 <= 64, "feedback.b1", "b1 must be 1..64");
  require(c.ctrl.iter >= 1, "solver.iter", "iter must be >= 1");
  require(c.ctrl.thre > 0.0, "solver.thre", "thre must be positive");
  for (double t : c.target_bler) require(t > 0.0 && t < 1.0, "experiment.target_bler", "target_bler must lie in (0,1)");
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_table(parse_config_text(ss.str()));
}

/// Power (dB) at which a curve first falls to target, interpolating
/// log10(bler) linearly in dB between neighbouring points.
inline std::optional<double> power_at_bler(const BlerCurve& c, double target) {
  if (!(target > 0.0)) return std::nullopt;
  const double lt = std::log10(target);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    const double a = c.bler[k], b = c.bler[k + 1];
    if (!(a >= target && b <= target)) continue;
    if (a == target) return c.power_db[k];
    if (b <= 0.0) return std::nullopt;
    const double la = std::log10(a), lb = std::log10(b);
    if (la == lb) return c.power_db[k];
    return c.power_db[k] + (lt - la) / (lb - la) * (c.power_db[k + 1] - c.power_db[k]);
  }
  return std::nullopt;
}

/// Horizontal distance in dB at target; positive when a needs less power.
/// Empty when either curve does not bracket the target.
inline std::optional<double> gap_at_bler(const BlerCurve& a, const BlerCurve& b, double target) {
  const auto pa = power_at_bler(a, target);
  const auto pb = power_at_bler(b, target);
  if (!pa || !pb) return std::nullopt;
  return *pb - *pa;
}

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const char* kCsvHeader = "scheme,topology,R,p_db,trials,errors,bler,ci_low,ci_high,seed\n";

inline std::string curve_csv(const BlerCurve& c, const Topology& topo) {
  std::string out = kCsvHeader;
  for (std::size_t k = 0; k < c.size(); ++k) {
    out += std::string(to_string(c.scheme)) + "," + std::string(to_string(topo.kind)) + "," +
           std::to_string(topo.relay_count) + "," + format_real(c.power_db[k]) + "," + std::to_string(c.trials[k]) +
           "," + std::to_string(c.errors[k]) + "," + format_real(c.bler[k]) + "," + format_real(c.ci95[k].first) +
           "," + format_real(c.ci95[k].second) + "," + std::to_string(c.seed.seed) + "\n";
  }
  return out;
}

inline std::string csv_file_name(Scheme s, const Topology& topo) {
  return std::string(to_string(s)) + "_" + std::string(to_string(topo.kind)) + ".csv";
}

/// Gap and slope report, one line per item.
inline std::string summary_text(const std::vector<BlerCurve>& curves, const ExperimentConfig& cfg) {
  std::string out;
  char buf[256];
  for (double target : cfg.target_bler) {
    for (std::size_t i = 0; i < curves.size(); ++i) {
      for (std::size_t j = i + 1; j < curves.size(); ++j) {
        const auto g = gap_at_bler(curves[i], curves[j], target);
        const std::string a(to_string(curves[i].scheme)), b(to_string(curves[j].scheme));
        if (g)
          std::snprintf(buf, sizeof buf, "gap %s vs %s at %g: %.3f dB\n", a.c_str(), b.c_str(), target, *g);
        else
          std::snprintf(buf, sizeof buf, "gap %s vs %s at %g: not computable\n", a.c_str(), b.c_str(), target);
        out += buf;
      }
    }
  }
  const double lo = cfg.slope_window ? cfg.slope_window->first : cfg.start_db;
  const double hi = cfg.slope_window ? cfg.slope_window->second : cfg.stop_db;
  for (const auto& c : curves) {
    const std::string a(to_string(c.scheme));
    try {
      std::snprintf(buf, sizeof buf, "diversity %s over [%g, %g] dB: %.3f\n", a.c_str(), lo, hi,
                    diversity_slope(c, lo, hi));
    } catch (const EstimationError& e) {
      std::snprintf(buf, sizeof buf, "diversity %s over [%g, %g] dB: not computable (%s)\n", a.c_str(), lo, hi,
                    e.what());
    }
    out += buf;
  }
  return out;
}

inline std::vector<BlerCurve> run_curves(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto sweep = power_sweep(cfg.start_db, cfg.stop_db, cfg.step_db, cfg.topology.relay_count,
                                 cfg.relay_power_scale, cfg.source_power_scale);
  McOptions opt;
  opt.trials_per_point = cfg.trials_per_point;
  opt.min_errors = cfg.min_errors;
  opt.max_trials = cfg.max_trials;
  opt.workers = cfg.workers != 0 ? cfg.workers : std::max(1U, std::thread::hardware_concurrency());
  opt.trial.ctrl = cfg.ctrl;
  std::vector<BlerCurve> curves;
  for (Scheme s : cfg.schemes) curves.push_back(estimate_bler(s, cfg.topology, sweep, opt, {cfg.seed, 0}));
  return curves;
}

/// Runs every scheme and writes one CSV per scheme plus summary.txt under
/// cfg.output.
inline std::vector<BlerCurve> run(const ExperimentConfig& cfg) {
  auto curves = run_curves(cfg);
  std::filesystem::create_directories(cfg.output);
  auto write = [](const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + p.string());
  };
  for (const auto& c : curves) write(cfg.output / csv_file_name(c.scheme, cfg.topology), curve_csv(c, cfg.topology));
  write(cfg.output / "summary.txt", summary_text(curves, cfg));
  return curves;
}

}  // namespace netbf

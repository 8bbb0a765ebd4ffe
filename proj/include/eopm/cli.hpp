/*
 * cli.hpp - command-line front end.
 *
 * Subcommands:
 *   spectrum           one-photon output spectrum (quantum or classical-naive)
 *   classical-compare  both models joined by output mode
 *   unitarity          orthonormality defects of the D matrix over a grid
 *   oracle-check       closed form against an independent oracle over a grid
 *   multitone          K-tone spectra with a deviation report against the exact oracle
 *
 * Every output starts with a '#'-prefixed header holding the tool version and
 * the fully resolved configuration. Exit codes: 0 ok, 1 check failed,
 * 2 invalid configuration, 3 numerical failure, 4 unphysical mode.
 */

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "eopm/classical_pm.hpp"
#include "eopm/errors.hpp"
#include "eopm/modes.hpp"
#include "eopm/multitone.hpp"
#include "eopm/oracle.hpp"
#include "eopm/scattering.hpp"

namespace eopm::cli {

inline constexpr const char* kToolName = "eopm";
inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kNumericError = 3,
  kDomainError = 4,
};

/// Bad user input, reported with exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Output tables
// ---------------------------------------------------------------------------

using Cell = std::variant<std::int64_t, double>;

struct Table {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return format_double(std::get<double>(c));
}

inline void write_csv(std::ostream& os, const Table& t) {
  os << "# tool=" << kToolName << ' ' << kVersion << '\n';
  os << "# command=" << t.command << '\n';
  for (const auto& [k, v] : t.config) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

inline void write_json(std::ostream& os, const Table& t) {
  nlohmann::ordered_json j;
  j["tool"] = std::string(kToolName) + " " + kVersion;
  j["command"] = t.command;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.config) cfg[k] = v;
  j["config"] = cfg;
  j["columns"] = t.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      std::visit([&r](auto v) { r.push_back(v); }, c);
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  os << j.dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Shared options
// ---------------------------------------------------------------------------

struct CommonOptions {
  std::string config_path;
  std::string output = "-";
  std::string format = "csv";
  unsigned threads = 1;
};

struct ToneOptions {
  std::int64_t n0 = 1;
  double m = 0.0;
  double theta = 0.0;
  double phi_b = 0.0;
  std::int64_t step = 1;
};

namespace detail {

inline void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--config", c.config_path, "flat key=value file; command-line flags take precedence");
  sub->add_option("--output,-o", c.output, "output path, '-' for stdout")->capture_default_str();
  sub->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads for sweeps, 0 = all cores")->capture_default_str();
}

inline void add_tone(CLI::App* sub, ToneOptions& t, bool with_n0) {
  if (with_n0) sub->add_option("--n0", t.n0, "input mode index")->capture_default_str();
  sub->add_option("--m", t.m, "modulation index")->capture_default_str();
  sub->add_option("--theta", t.theta, "tone phase [rad]")->capture_default_str();
  sub->add_option("--phi-b", t.phi_b, "bias phase [rad]")->capture_default_str();
  sub->add_option("--N", t.step, "frequency step in mode units")->capture_default_str();
}

inline unsigned resolve_threads(unsigned t) {
  if (t != 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// computed independently, so results do not depend on the worker count.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline ModulatorSpec make_spec(const ToneOptions& t) {
  try {
    return ModulatorSpec::make(t.m, t.theta, t.step, t.phi_b);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

inline ModeIndex make_mode(std::int64_t n0) {
  require(n0 >= 1, "n0 must be >= 1");
  return ModeIndex(n0);
}

inline void check_tail_tol(double tol) {
  require(tol > 0.0 && tol <= kMaxTailTolerance, "tail-tol must lie in (0, 1e-6]");
}

inline void append_spec(Table& t, const ToneOptions& o, const ModulatorSpec& s) {
  t.config.emplace_back("n0", std::to_string(o.n0));
  t.config.emplace_back("m", format_double(s.tone.m));
  t.config.emplace_back("theta", format_double(s.tone.theta));
  t.config.emplace_back("phi-b", format_double(s.phi_b));
  t.config.emplace_back("N", std::to_string(s.tone.step));
}

inline std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

inline std::string join(const std::vector<std::int64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

/// Reads a flat key=value file into (key, value) pairs in file order.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#' || body[0] == ';') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return out;
}

// Splices config-file entries in front of the command-line flags. Keys that
// also appear on the command line are dropped so the flags win.
inline std::vector<std::string> apply_config(const std::vector<std::string>& args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") {
      if (eq != std::string::npos) {
        path = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  if (path.empty() || args.empty()) return args;

  std::vector<std::string> out{args.front()};
  for (const auto& [k, v] : read_config_file(path)) {
    if (k == "config" || given.contains(k)) continue;
    out.push_back("--" + k);
    out.push_back(v);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SpectrumOptions {
  CommonOptions common;
  ToneOptions tone;
  double tail_tol = 1e-12;
  std::string model = "quantum";
  int q_window = -1;  // < 0: carson_window(m, 40)
};

inline int resolved_q_window(const SpectrumOptions& o, const ModulatorSpec& s) {
  if (o.q_window >= 0) {
    detail::require(o.q_window >= carson_window(s.tone.m, 0), "q-window must be >= ceil(m) + 1");
    return o.q_window;
  }
  return carson_window(s.tone.m, kDefaultSafety);
}

inline Table cmd_spectrum(const SpectrumOptions& o) {
  const ModulatorSpec spec = detail::make_spec(o.tone);
  const ModeIndex n0 = detail::make_mode(o.tone.n0);
  detail::check_tail_tol(o.tail_tol);
  detail::require(o.model == "quantum" || o.model == "classical-naive", "model must be quantum or classical-naive");

  Table t;
  t.command = "spectrum";
  detail::append_spec(t, o.tone, spec);
  t.config.emplace_back("model", o.model);
  t.columns = {"mode", "q_offset", "amp_re", "amp_im", "prob", "physical"};
  const std::int64_t step = spec.tone.step;

  if (o.model == "quantum") {
    t.config.emplace_back("tail-tol", format_double(o.tail_tol));
    for (const auto& l : scatter_single_photon(n0, spec, o.tail_tol)) {
      const std::int64_t mode = l.mode.value();
      t.rows.push_back({mode, (mode - n0.value()) / step, l.amplitude.real(), l.amplitude.imag(), l.probability,
                        std::int64_t{1}});
    }
  } else {
    const int w = resolved_q_window(o, spec);
    t.config.emplace_back("q-window", std::to_string(w));
    for (const auto& l : naive_scatter_single_photon(n0, spec, w)) {
      t.rows.push_back({l.mode, (l.mode - n0.value()) / step, l.amplitude.real(), l.amplitude.imag(),
                        std::norm(l.amplitude), std::int64_t{l.physical ? 1 : 0}});
    }
  }
  return t;
}

inline Table cmd_classical_compare(const SpectrumOptions& o) {
  const ModulatorSpec spec = detail::make_spec(o.tone);
  const ModeIndex n0 = detail::make_mode(o.tone.n0);
  detail::check_tail_tol(o.tail_tol);
  const int w = resolved_q_window(o, spec);

  struct Pair {
    cplx classical{};
    cplx quantum{};
  };
  std::map<std::int64_t, Pair> joined;
  for (const auto& l : naive_scatter_single_photon(n0, spec, w)) joined[l.mode].classical = l.amplitude;
  for (const auto& l : scatter_single_photon(n0, spec, o.tail_tol)) joined[l.mode.value()].quantum = l.amplitude;

  Table t;
  t.command = "classical-compare";
  detail::append_spec(t, o.tone, spec);
  t.config.emplace_back("tail-tol", format_double(o.tail_tol));
  t.config.emplace_back("q-window", std::to_string(w));
  t.columns = {"mode",       "q_offset",   "classical_re", "classical_im", "classical_prob",
               "quantum_re", "quantum_im", "quantum_prob", "physical"};
  for (const auto& [mode, p] : joined) {
    t.rows.push_back({mode, (mode - n0.value()) / spec.tone.step, p.classical.real(), p.classical.imag(),
                      std::norm(p.classical), p.quantum.real(), p.quantum.imag(), std::norm(p.quantum),
                      std::int64_t{mode >= 1 ? 1 : 0}});
  }
  return t;
}

struct UnitarityOptions {
  CommonOptions common;
  ToneOptions tone;
  std::int64_t p0_max = 12;
  std::int64_t q0_max = 12;
  std::int64_t q_max = -1;  // < 0: carson_window(m, 40) + max(p0_max, q0_max)
  double threshold = 1e-10;
};

struct CheckResult {
  Table table;
  bool passed = true;
};

inline CheckResult cmd_unitarity(const UnitarityOptions& o) {
  const ModulatorSpec spec = detail::make_spec(o.tone);
  detail::require(o.p0_max >= 1 && o.q0_max >= 1, "p0-max and q0-max must be >= 1");
  detail::require(o.threshold >= 0.0, "threshold must be >= 0");
  const std::int64_t min_q = carson_window(spec.tone.m, kDefaultSafety) + std::max(o.p0_max, o.q0_max);
  const std::int64_t q_max = o.q_max < 0 ? min_q : o.q_max;
  detail::require(q_max >= min_q, "q-max must be >= carson_window(m, 40) + max(p0, q0)");

  const std::size_t n = static_cast<std::size_t>(o.p0_max * o.q0_max);
  std::vector<double> defects(n);
  detail::parallel_for(n, detail::resolve_threads(o.common.threads), [&](std::size_t i) {
    const auto p0 = static_cast<std::int64_t>(i) / o.q0_max + 1;
    const auto q0 = static_cast<std::int64_t>(i) % o.q0_max + 1;
    defects[i] = unitarity_defect(p0, q0, spec, q_max);
  });

  CheckResult r;
  Table& t = r.table;
  t.command = "unitarity";
  t.config.emplace_back("m", format_double(spec.tone.m));
  t.config.emplace_back("theta", format_double(spec.tone.theta));
  t.config.emplace_back("phi-b", format_double(spec.phi_b));
  t.config.emplace_back("N", std::to_string(spec.tone.step));
  t.config.emplace_back("p0-max", std::to_string(o.p0_max));
  t.config.emplace_back("q0-max", std::to_string(o.q0_max));
  t.config.emplace_back("q-max", std::to_string(q_max));
  t.config.emplace_back("threshold", format_double(o.threshold));
  t.columns = {"p0", "q0", "defect"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto p0 = static_cast<std::int64_t>(i) / o.q0_max + 1;
    const auto q0 = static_cast<std::int64_t>(i) % o.q0_max + 1;
    t.rows.push_back({p0, q0, defects[i]});
    if (!(defects[i] <= o.threshold)) r.passed = false;
  }
  return r;
}

struct OracleCheckOptions {
  CommonOptions common;
  std::vector<double> m_list{0.5, 2.0, 5.0};
  std::vector<std::int64_t> step_list{1, 3};
  std::vector<std::int64_t> q0_list{1, 2, 7};
  double theta = 0.0;
  double phi_b = 0.0;
  std::int64_t q_max = 25;
  std::string oracle = "matrix-exp";
  int s_max = 80;
  int p_max = 80;
  double threshold = 1e-9;
};

/// Max deviation between the closed form and the chosen oracle for one (m, N)
/// and every q0, over output ladder indices q = 1..q_max.
inline std::vector<double> oracle_deviations(const OracleCheckOptions& o, const ModulatorSpec& spec) {
  const std::int64_t step = spec.tone.step;
  std::vector<double> out;
  if (o.oracle == "matrix-exp") {
    std::int64_t q0_top = 1;
    for (auto q0 : o.q0_list) q0_top = std::max(q0_top, q0);
    const std::int64_t m_max = std::max(q0_top, o.q_max) * step + step * carson_window(spec.tone.m, kDefaultSafety);
    const TransitionMatrix s = exponentiate(build_generator(spec, m_max));
    for (auto q0 : o.q0_list) {
      // Input on the ladder with the largest residue, r0 = N - 1.
      const std::int64_t r0 = step - 1;
      const std::int64_t n0 = q0 * step - r0;
      const auto col = eopm::detail::checked_column(s, n0, step * carson_window(spec.tone.m, 5));
      double dev = 0.0;
      for (std::int64_t q = 1; q <= o.q_max; ++q) {
        dev = std::max(dev, std::abs(d_coefficient(q, q0, spec) - col[static_cast<std::size_t>(q * step - r0 - 1)]));
      }
      out.push_back(dev);
    }
  } else if (o.oracle == "path-sum") {
    const cplx bias = std::polar(1.0, spec.phi_b);
    for (auto q0 : o.q0_list) {
      double dev = 0.0;
      for (std::int64_t q = 1; q <= o.q_max; ++q) {
        dev = std::max(dev, std::abs(d_coefficient(q, q0, spec) - bias * forbidden_path_corrected(q, q0, spec, o.s_max)));
      }
      out.push_back(dev);
    }
  } else {
    for (auto q0 : o.q0_list) {
      double dev = 0.0;
      for (std::int64_t q = 1; q <= o.q_max; ++q) {
        dev = std::max(dev, std::abs(coefficient(q - q0, spec) - adjoint_expansion(q - q0, spec, o.p_max)));
      }
      out.push_back(dev);
    }
  }
  return out;
}

inline CheckResult cmd_oracle_check(const OracleCheckOptions& o) {
  detail::require(o.oracle == "matrix-exp" || o.oracle == "path-sum" || o.oracle == "adjoint",
                  "oracle must be matrix-exp, path-sum or adjoint");
  detail::require(!o.m_list.empty() && !o.step_list.empty() && !o.q0_list.empty(), "parameter lists must be non-empty");
  detail::require(o.q_max >= 1, "q-max must be >= 1");
  detail::require(o.s_max >= 0, "s-max must be >= 0");
  detail::require(o.threshold >= 0.0, "threshold must be >= 0");
  for (auto q0 : o.q0_list) detail::require(q0 >= 1, "every q0 must be >= 1");
  if (o.oracle == "adjoint") {
    std::int64_t reach = 0;
    for (auto q0 : o.q0_list) reach = std::max({reach, q0 - 1, o.q_max - q0});
    detail::require(o.p_max >= reach, "p-max must be >= max |q - q0|");
  }

  std::vector<ModulatorSpec> specs;
  for (double m : o.m_list) {
    for (auto n : o.step_list) {
      ToneOptions t{1, m, o.theta, o.phi_b, n};
      specs.push_back(detail::make_spec(t));
    }
  }
  std::vector<std::vector<double>> devs(specs.size());
  detail::parallel_for(specs.size(), detail::resolve_threads(o.common.threads),
                       [&](std::size_t i) { devs[i] = oracle_deviations(o, specs[i]); });

  CheckResult r;
  Table& t = r.table;
  t.command = "oracle-check";
  t.config.emplace_back("oracle", o.oracle);
  t.config.emplace_back("m-list", detail::join(o.m_list));
  t.config.emplace_back("N-list", detail::join(o.step_list));
  t.config.emplace_back("q0-list", detail::join(o.q0_list));
  t.config.emplace_back("theta", format_double(reduce_angle(o.theta)));
  t.config.emplace_back("phi-b", format_double(reduce_angle(o.phi_b)));
  t.config.emplace_back("q-max", std::to_string(o.q_max));
  if (o.oracle == "path-sum") t.config.emplace_back("s-max", std::to_string(o.s_max));
  if (o.oracle == "adjoint") t.config.emplace_back("p-max", std::to_string(o.p_max));
  t.config.emplace_back("threshold", format_double(o.threshold));
  t.columns = {"m", "N", "q0", "max_abs_deviation"};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t k = 0; k < o.q0_list.size(); ++k) {
      t.rows.push_back({specs[i].tone.m, specs[i].tone.step, o.q0_list[k], devs[i][k]});
      if (!(devs[i][k] <= o.threshold)) r.passed = false;
    }
  }
  return r;
}

struct MultitoneOptions {
  CommonOptions common;
  std::int64_t n0 = 1;
  std::vector<std::string> tones;  // "m,theta,N"
  double phi_b = 0.0;
  std::string model = "two-tone-factored";
  double tail_tol = 1e-12;
  int q_window = -1;  // < 0: carson_window(max m, 40)
  std::string report;  // empty: <output>.report.csv, or appended comments on stdout
};

inline ModulationTone parse_tone(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(detail::trim(item));
  detail::require(parts.size() == 3, "tone must be 'm,theta,N': " + s);
  try {
    std::size_t pos = 0;
    const double m = std::stod(parts[0], &pos);
    detail::require(pos == parts[0].size(), "bad modulation index in tone: " + s);
    const double theta = std::stod(parts[1], &pos);
    detail::require(pos == parts[1].size(), "bad phase in tone: " + s);
    const long long n = std::stoll(parts[2], &pos);
    detail::require(pos == parts[2].size(), "bad step in tone: " + s);
    return ModulationTone::make(m, theta, n);
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse tone: " + s);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

struct MultitoneResult {
  Table spectrum;
  std::optional<Table> report;
};

inline MultitoneResult cmd_multitone(const MultitoneOptions& o) {
  const ModeIndex n0 = detail::make_mode(o.n0);
  detail::require(!o.tones.empty() && o.tones.size() <= 8, "between 1 and 8 tones are required");
  std::vector<ModulationTone> parsed;
  for (const auto& s : o.tones) parsed.push_back(parse_tone(s));
  ToneSet tones;
  try {
    tones = ToneSet::make(parsed, o.phi_b);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  detail::check_tail_tol(o.tail_tol);
  const int window = o.q_window >= 0 ? o.q_window : carson_window(tones.max_index(), kDefaultSafety);
  if (o.q_window >= 0) {
    detail::require(o.q_window >= carson_window(tones.max_index(), 0), "q-window must be >= ceil(max m) + 1");
  }

  std::vector<SpectrumLine> lines;
  const std::int64_t m_max = combined_oracle_window(n0, tones);
  std::vector<cplx> oracle;
  if (o.model == "two-tone-factored") {
    detail::require(tones.tones.size() <= 2, "two-tone-factored model takes one or two tones");
    if (tones.tones.size() == 1) {
      lines = scatter_single_photon(n0, ModulatorSpec{tones.tones[0], tones.phi_b}, o.tail_tol);
    } else {
      lines = two_tone_spectrum(n0, tones, o.tail_tol);
    }
  } else if (o.model == "large-carrier") {
    lines = multitone_large_carrier(n0, tones, window);
  } else if (o.model == "small-m") {
    for (const auto& t : tones.tones) detail::require(t.m <= kSmallIndexLimit, "small-m model needs every m <= 0.2");
    for (const auto& t : tones.tones) detail::require(n0.value() > t.step, "small-m model needs n0 > max N");
    lines = multitone_small_m(n0, tones);
  } else if (o.model == "oracle") {
    oracle = combined_oracle(n0, tones, m_max);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      if (oracle[i] == cplx{}) continue;
      lines.push_back({ModeIndex(static_cast<std::int64_t>(i) + 1), oracle[i], std::norm(oracle[i])});
    }
  } else {
    throw ConfigError("model must be two-tone-factored, large-carrier, small-m or oracle");
  }

  MultitoneResult r;
  Table& t = r.spectrum;
  t.command = "multitone";
  t.config.emplace_back("n0", std::to_string(o.n0));
  for (std::size_t i = 0; i < tones.tones.size(); ++i) {
    const auto& tone = tones.tones[i];
    t.config.emplace_back("tone" + std::to_string(i + 1),
                          format_double(tone.m) + "," + format_double(tone.theta) + "," + std::to_string(tone.step));
  }
  t.config.emplace_back("phi-b", format_double(tones.phi_b));
  t.config.emplace_back("model", o.model);
  if (o.model == "two-tone-factored") t.config.emplace_back("tail-tol", format_double(o.tail_tol));
  if (o.model == "large-carrier") t.config.emplace_back("q-window", std::to_string(window));
  if (o.model == "oracle") t.config.emplace_back("m-max", std::to_string(m_max));
  t.columns = {"mode", "q_offset", "amp_re", "amp_im", "prob", "physical"};
  const std::int64_t unit = tones.step_gcd();
  for (const auto& l : lines) {
    const std::int64_t mode = l.mode.value();
    t.rows.push_back({mode, (mode - o.n0) / unit, l.amplitude.real(), l.amplitude.imag(), l.probability,
                      std::int64_t{1}});
  }

  if (o.model != "oracle") {
    oracle = combined_oracle(n0, tones, m_max);
    Table rep;
    rep.command = "multitone-report";
    rep.config = t.config;
    rep.columns = {"m_max", "max_abs_deviation"};
    rep.rows.push_back({m_max, max_oracle_deviation(lines, oracle)});
    r.report = std::move(rep);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

namespace detail {

inline void emit(const Table& t, const CommonOptions& c, std::ostream& out) {
  auto write = [&](std::ostream& os) {
    if (c.format == "json") {
      write_json(os, t);
    } else {
      write_csv(os, t);
    }
  };
  if (c.output == "-") {
    write(out);
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + c.output);
  write(f);
}

}  // namespace detail

/// Runs one CLI invocation. args excludes the program name.
inline int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum and classical electro-optic phase modulation spectra"};
  app.name(kToolName);
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  SpectrumOptions spectrum;
  auto* sp = app.add_subcommand("spectrum", "one-photon output spectrum");
  detail::add_common(sp, spectrum.common);
  detail::add_tone(sp, spectrum.tone, true);
  sp->add_option("--tail-tol", spectrum.tail_tol, "discarded probability bound")->capture_default_str();
  sp->add_option("--model", spectrum.model, "quantum or classical-naive")->capture_default_str();
  sp->add_option("--q-window", spectrum.q_window, "classical sideband half-width");

  SpectrumOptions compare;
  auto* cc = app.add_subcommand("classical-compare", "classical-naive and quantum spectra joined by mode");
  detail::add_common(cc, compare.common);
  detail::add_tone(cc, compare.tone, true);
  cc->add_option("--tail-tol", compare.tail_tol, "discarded probability bound")->capture_default_str();
  cc->add_option("--q-window", compare.q_window, "classical sideband half-width");

  UnitarityOptions unit;
  auto* un = app.add_subcommand("unitarity", "orthonormality defects of the transition matrix");
  detail::add_common(un, unit.common);
  detail::add_tone(un, unit.tone, false);
  un->add_option("--p0-max", unit.p0_max)->capture_default_str();
  un->add_option("--q0-max", unit.q0_max)->capture_default_str();
  un->add_option("--q-max", unit.q_max, "truncation of the overlap sum");
  un->add_option("--threshold", unit.threshold)->capture_default_str();

  OracleCheckOptions check;
  auto* oc = app.add_subcommand("oracle-check", "closed form against an independent oracle");
  detail::add_common(oc, check.common);
  oc->add_option("--m-list", check.m_list)->delimiter(',')->capture_default_str();
  oc->add_option("--N-list", check.step_list)->delimiter(',')->capture_default_str();
  oc->add_option("--q0-list", check.q0_list)->delimiter(',')->capture_default_str();
  oc->add_option("--theta", check.theta)->capture_default_str();
  oc->add_option("--phi-b", check.phi_b)->capture_default_str();
  oc->add_option("--q-max", check.q_max)->capture_default_str();
  oc->add_option("--oracle", check.oracle, "matrix-exp, path-sum or adjoint")->capture_default_str();
  oc->add_option("--s-max", check.s_max, "path-sum order")->capture_default_str();
  oc->add_option("--p-max", check.p_max, "adjoint expansion order")->capture_default_str();
  oc->add_option("--threshold", check.threshold)->capture_default_str();

  MultitoneOptions multi;
  auto* mt = app.add_subcommand("multitone", "multitone spectra");
  detail::add_common(mt, multi.common);
  mt->add_option("--n0", multi.n0)->capture_default_str();
  mt->add_option("--tone", multi.tones, "tone as m,theta,N (repeatable)")->allow_extra_args(false);
  mt->add_option("--phi-b", multi.phi_b)->capture_default_str();
  mt->add_option("--model", multi.model, "two-tone-factored, large-carrier, small-m or oracle")->capture_default_str();
  mt->add_option("--tail-tol", multi.tail_tol)->capture_default_str();
  mt->add_option("--q-window", multi.q_window, "large-carrier half-width per tone");
  mt->add_option("--report", multi.report, "deviation report path");

  try {
    std::vector<std::string> args = detail::apply_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (sp->parsed()) {
      detail::emit(cmd_spectrum(spectrum), spectrum.common, out);
      return kOk;
    }
    if (cc->parsed()) {
      detail::emit(cmd_classical_compare(compare), compare.common, out);
      return kOk;
    }
    if (un->parsed()) {
      const CheckResult r = cmd_unitarity(unit);
      detail::emit(r.table, unit.common, out);
      return r.passed ? kOk : kCheckFailed;
    }
    if (oc->parsed()) {
      const CheckResult r = cmd_oracle_check(check);
      detail::emit(r.table, check.common, out);
      return r.passed ? kOk : kCheckFailed;
    }
    if (mt->parsed()) {
      const MultitoneResult r = cmd_multitone(multi);
      detail::emit(r.spectrum, multi.common, out);
      if (r.report) {
        CommonOptions rc = multi.common;
        if (!multi.report.empty()) {
          rc.output = multi.report;
        } else if (multi.common.output != "-") {
          rc.output = multi.common.output + ".report.csv";
        }
        detail::emit(*r.report, rc, out);
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnphysicalMode& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const TruncationError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace eopm::cli

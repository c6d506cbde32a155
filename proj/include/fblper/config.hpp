#pragma once

// Scenario configuration and the CSI acquisition overhead model: reference
// signals shrink the symbol budget, link-quality reports inflate the payload.

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fblper/errors.hpp"
#include "fblper/path_dist.hpp"

namespace fblper {

enum class Variant { Direct, BestAntenna, BestRelay, BestRelayMax };
enum class Regime { Fbl, Ibl };
enum class RegimeSelection { Fbl, Ibl, Both };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Direct: return "direct";
    case Variant::BestAntenna: return "best_antenna";
    case Variant::BestRelay: return "best_relay";
    case Variant::BestRelayMax: return "best_relay_max";
  }
  return "?";
}

inline std::string_view to_string(Regime r) { return r == Regime::Fbl ? "fbl" : "ibl"; }

inline std::string_view to_string(RegimeSelection r) {
  switch (r) {
    case RegimeSelection::Fbl: return "fbl";
    case RegimeSelection::Ibl: return "ibl";
    case RegimeSelection::Both: return "both";
  }
  return "?";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "direct") return Variant::Direct;
  if (s == "best_antenna" || s == "best-antenna") return Variant::BestAntenna;
  if (s == "best_relay" || s == "best-relay") return Variant::BestRelay;
  if (s == "best_relay_max" || s == "best-relay-max" || s == "max_relay") return Variant::BestRelayMax;
  return std::nullopt;
}

inline std::optional<RegimeSelection> parse_regime(std::string_view s) {
  if (s == "fbl") return RegimeSelection::Fbl;
  if (s == "ibl") return RegimeSelection::Ibl;
  if (s == "both") return RegimeSelection::Both;
  return std::nullopt;
}

inline std::vector<Regime> expand(RegimeSelection r) {
  switch (r) {
    case RegimeSelection::Fbl: return {Regime::Fbl};
    case RegimeSelection::Ibl: return {Regime::Ibl};
    case RegimeSelection::Both: return {Regime::Fbl, Regime::Ibl};
  }
  return {};
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Full scenario. Defaults reproduce the reference parameter set: 5 MHz,
/// 1 ms cycle (5000 symbols), five terminals, 128-bit packets, alpha = 50
/// symbols, beta = 8 bits, 15 dB on every link.
struct SystemConfig {
  double bandwidth_hz = 5e6;
  double cycle_s = 1e-3;
  int terminals = 5;
  double base_payload_bits = 128.0;
  double alpha_symbols = 50.0;
  double beta_bits = 8.0;
  double eps_star = 1e-4;
  Variant variant = Variant::Direct;
  int j = 1;
  double snr_db = 15.0;
  /// Optional (N+1)x(N+1) matrix in dB, row-major, index 0 = AP.
  std::vector<double> snr_matrix_db;
  RegimeSelection regime = RegimeSelection::Fbl;
  /// Use 1 - (1 - eps*)^2 for a relayed packet instead of 2 eps*.
  bool exact_two_hop = false;

  /// S = round(B * T_cyc).
  int frame_symbols() const { return static_cast<int>(std::lround(bandwidth_hz * cycle_s)); }

  bool heterogeneous() const { return !snr_matrix_db.empty(); }

  /// Throws ConfigError naming the first offending key.
  void validate() const {
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) throw ConfigError("bandwidth_hz", "must be > 0");
    if (!(cycle_s > 0.0) || !std::isfinite(cycle_s)) throw ConfigError("cycle_s", "must be > 0");
    if (frame_symbols() < 1) throw ConfigError("bandwidth_hz", "bandwidth * cycle gives an empty frame");
    if (terminals < 1) throw ConfigError("terminals", "must be >= 1");
    if (!(base_payload_bits > 0.0)) throw ConfigError("payload_bits", "must be > 0");
    if (!(alpha_symbols >= 0.0)) throw ConfigError("alpha_symbols", "must be >= 0");
    if (!(beta_bits >= 0.0)) throw ConfigError("beta_bits", "must be >= 0");
    if (!(eps_star >= 0.0 && eps_star < 0.5)) throw ConfigError("eps_star", "must lie in [0, 0.5)");
    if (j < 1) throw ConfigError("j", "must be >= 1");
    if (!std::isfinite(snr_db)) throw ConfigError("snr_db", "must be finite");
    if (heterogeneous()) {
      const auto n = static_cast<std::size_t>(terminals) + 1;
      if (snr_matrix_db.size() != n * n) {
        throw ConfigError("snr_matrix_db", "expected " + std::to_string(n) + "x" + std::to_string(n) + " entries");
      }
    }
    if (variant == Variant::BestRelay && j > terminals - 1) {
      throw ConfigError("j", "best_relay has at most N-1 candidates (other terminals plus the AP)");
    }
    if (variant == Variant::BestRelayMax && terminals < 2) {
      throw ConfigError("terminals", "best_relay_max needs at least two terminals");
    }
  }

  TopologySnr topology() const {
    if (!heterogeneous()) return TopologySnr::homogeneous(terminals, db_to_linear(snr_db));
    const auto n = static_cast<std::size_t>(terminals) + 1;
    std::vector<double> lin(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        if (i != k) lin[i * n + k] = db_to_linear(snr_matrix_db[i * n + k]);
      }
    }
    return TopologySnr::from_matrix(terminals, std::move(lin));
  }
};

/// Payload per packet including piggybacked link reports. Direct and
/// Best-Antenna carry D0 + N beta; Best-Relay carries D0 + (N-1)/2 beta.
inline double payload_bits(const SystemConfig& c) {
  switch (c.variant) {
    case Variant::Direct:
    case Variant::BestAntenna: return c.base_payload_bits + c.terminals * c.beta_bits;
    case Variant::BestRelay:
    case Variant::BestRelayMax: return c.base_payload_bits + 0.5 * (c.terminals - 1) * c.beta_bits;
  }
  return c.base_payload_bits;
}

/// Symbols left for payload once N reference signals of alpha symbols are
/// paid: floor(S - N alpha). Throws InfeasibleError if nothing is left.
inline int effective_budget(const SystemConfig& c) {
  const double left = c.frame_symbols() - c.terminals * c.alpha_symbols;
  if (!(left >= 1.0)) throw InfeasibleError("overhead exceeds frame: N*alpha >= S");
  return static_cast<int>(std::floor(left));
}

/// Number of relay candidates (Best-Relay) or AP antennas (Best-Antenna).
/// Best-Relay-Max uses every other terminal plus the AP.
inline int diversity(const SystemConfig& c) {
  switch (c.variant) {
    case Variant::Direct: return 0;
    case Variant::BestAntenna:
    case Variant::BestRelay: return c.j;
    case Variant::BestRelayMax: return c.terminals - 1;
  }
  return 0;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && ((out.front() == '"' && out.back() == '"') || (out.front() == '\'' && out.back() == '\''))) {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + value + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key, "expected an integer, got '" + value + "'");
  return static_cast<int>(v);
}

inline std::vector<double> parse_matrix(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string token;
  for (char ch : value + ",") {
    if (ch == ',' || ch == ';' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) out.push_back(parse_double(key, token));
      token.clear();
    } else {
      token += ch;
    }
  }
  if (out.empty()) throw ConfigError(key, "empty matrix");
  return out;
}

}  // namespace detail

/// Sets one configuration key from its textual value; the same keys are
/// used by config files and command-line overrides.
inline void apply_setting(SystemConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = detail::trim(raw);
  if (key == "bandwidth_hz") {
    c.bandwidth_hz = detail::parse_double(key, value);
  } else if (key == "cycle_s") {
    c.cycle_s = detail::parse_double(key, value);
  } else if (key == "terminals") {
    c.terminals = detail::parse_int(key, value);
  } else if (key == "payload_bits") {
    c.base_payload_bits = detail::parse_double(key, value);
  } else if (key == "alpha_symbols") {
    c.alpha_symbols = detail::parse_double(key, value);
  } else if (key == "beta_bits") {
    c.beta_bits = detail::parse_double(key, value);
  } else if (key == "eps_star") {
    c.eps_star = detail::parse_double(key, value);
  } else if (key == "variant") {
    const auto v = parse_variant(value);
    if (!v) throw ConfigError(key, "unknown variant '" + value + "'");
    c.variant = *v;
  } else if (key == "j") {
    c.j = detail::parse_int(key, value);
  } else if (key == "snr_db") {
    c.snr_db = detail::parse_double(key, value);
    c.snr_matrix_db.clear();
  } else if (key == "snr_matrix_db") {
    c.snr_matrix_db = detail::parse_matrix(key, value);
  } else if (key == "regime") {
    const auto r = parse_regime(value);
    if (!r) throw ConfigError(key, "unknown regime '" + value + "'");
    c.regime = *r;
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

/// Reads "key = value" lines; '#' starts a comment.
inline SystemConfig parse_config(std::istream& in, SystemConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(detail::trim(stripped), "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_setting(base, detail::trim(stripped.substr(0, eq)), stripped.substr(eq + 1));
  }
  return base;
}

inline SystemConfig load_config(const std::string& path, SystemConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace fblper

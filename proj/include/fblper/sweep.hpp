#pragma once

// Parameter sweeps and the CSV rows shared by the command-line front end.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "fblper/config.hpp"
#include "fblper/csv.hpp"
#include "fblper/montecarlo.hpp"
#include "fblper/per_model.hpp"

namespace fblper {

enum class SweepAxis { EpsStar, PayloadBits, SnrDb, Terminals, BandwidthHz, AlphaSymbols, BetaBits };

inline std::optional<SweepAxis> parse_axis(std::string_view s) {
  if (s == "eps_star") return SweepAxis::EpsStar;
  if (s == "payload_bits") return SweepAxis::PayloadBits;
  if (s == "snr_db") return SweepAxis::SnrDb;
  if (s == "terminals") return SweepAxis::Terminals;
  if (s == "bandwidth_hz") return SweepAxis::BandwidthHz;
  if (s == "alpha_symbols") return SweepAxis::AlphaSymbols;
  if (s == "beta_bits") return SweepAxis::BetaBits;
  return std::nullopt;
}

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::EpsStar: return "eps_star";
    case SweepAxis::PayloadBits: return "payload_bits";
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::Terminals: return "terminals";
    case SweepAxis::BandwidthHz: return "bandwidth_hz";
    case SweepAxis::AlphaSymbols: return "alpha_symbols";
    case SweepAxis::BetaBits: return "beta_bits";
  }
  return "?";
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace detail

/// "a,b,c" or "start:stop:count[:lin|log]".
inline std::vector<double> parse_values(const std::string& spec) {
  const std::string key = "values";
  if (spec.find(':') != std::string::npos) {
    const auto parts = detail::split(spec, ':');
    if (parts.size() < 3 || parts.size() > 4) throw ConfigError(key, "range is start:stop:count[:lin|log]");
    const double a = detail::parse_double(key, parts[0]);
    const double b = detail::parse_double(key, parts[1]);
    const int n = detail::parse_int(key, parts[2]);
    const std::string scale = parts.size() == 4 ? parts[3] : "lin";
    if (n < 1) throw ConfigError(key, "count must be >= 1");
    if (scale != "lin" && scale != "log") throw ConfigError(key, "scale must be lin or log");
    if (scale == "log" && !(a > 0.0 && b > 0.0)) throw ConfigError(key, "log range needs positive endpoints");
    std::vector<double> out;
    for (int k = 0; k < n; ++k) {
      if (k == 0 || n == 1) {
        out.push_back(a);
      } else if (k == n - 1) {
        out.push_back(b);
      } else {
        const double t = static_cast<double>(k) / (n - 1);
        out.push_back(scale == "log" ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a));
      }
    }
    return out;
  }
  std::vector<double> out;
  for (const auto& tok : detail::split(spec, ',')) {
    if (tok.empty()) throw ConfigError(key, "empty entry in value list");
    out.push_back(detail::parse_double(key, tok));
  }
  return out;
}

/// Checks bounds that do not depend on the rest of the configuration.
inline void check_axis_values(SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("values", "no sweep values");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("values", "sweep values must be finite");
    switch (axis) {
      case SweepAxis::EpsStar:
        if (!(v > 0.0 && v < 0.5)) throw ConfigError("values", "eps_star must lie in (0, 0.5)");
        break;
      case SweepAxis::Terminals:
        if (v < 1.0 || v != std::floor(v)) throw ConfigError("values", "terminals must be integers >= 1");
        break;
      case SweepAxis::PayloadBits:
      case SweepAxis::BandwidthHz:
        if (!(v > 0.0)) throw ConfigError("values", std::string(to_string(axis)) + " must be > 0");
        break;
      case SweepAxis::AlphaSymbols:
      case SweepAxis::BetaBits:
        if (!(v >= 0.0)) throw ConfigError("values", std::string(to_string(axis)) + " must be >= 0");
        break;
      case SweepAxis::SnrDb: break;
    }
  }
}

inline void apply_axis(SystemConfig& c, SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::EpsStar: c.eps_star = v; break;
    case SweepAxis::PayloadBits: c.base_payload_bits = v; break;
    case SweepAxis::SnrDb:
      c.snr_db = v;
      c.snr_matrix_db.clear();
      break;
    case SweepAxis::Terminals: c.terminals = static_cast<int>(v); break;
    // the cycle stays fixed, so S follows B
    case SweepAxis::BandwidthHz: c.bandwidth_hz = v; break;
    case SweepAxis::AlphaSymbols: c.alpha_symbols = v; break;
    case SweepAxis::BetaBits: c.beta_bits = v; break;
  }
}

// ---- CSV ----

inline const std::vector<std::string>& base_columns() {
  static const std::vector<std::string> cols{"regime", "variant",  "J",          "N",      "S",
                                             "D",      "gamma_bar_db", "eps_star", "p", "per_packet",
                                             "per_avg"};
  return cols;
}

/// Columns regime..eps_star for one (config, regime).
inline std::vector<std::string> describe(const SystemConfig& c, Regime r) {
  return {std::string(to_string(r)),
          std::string(to_string(c.variant)),
          csv::number(diversity(c)),
          csv::number(c.terminals),
          csv::number(c.frame_symbols()),
          csv::number(payload_bits(c)),
          c.heterogeneous() ? "matrix" : csv::number(c.snr_db),
          r == Regime::Fbl ? csv::number(c.eps_star) : ""};
}

inline std::vector<std::string> analytic_fields(const SystemConfig& c, const PerResult& res) {
  auto f = describe(c, res.regime);
  f.push_back(csv::join(res.p));
  f.push_back(csv::join(res.per_packet));
  f.push_back(csv::number(res.per_avg));
  return f;
}

inline std::vector<std::string> simulate_columns() {
  auto cols = base_columns();
  cols.insert(cols.end(), {"frames", "seed", "ci_halfwidth"});
  return cols;
}

inline std::vector<std::string> simulate_fields(const SystemConfig& c, Regime r, const McEstimate& est) {
  auto f = describe(c, r);
  f.push_back(csv::join(est.scheduled_hat));
  f.push_back(csv::join(est.per_packet_hat));
  f.push_back(csv::number(est.per_hat));
  f.push_back(csv::number(est.frames));
  f.push_back(csv::number(est.seed));
  f.push_back(csv::number(est.ci_halfwidth));
  return f;
}

inline std::vector<std::string> sweep_columns() {
  std::vector<std::string> cols{"axis", "value", "status"};
  const auto& b = base_columns();
  cols.insert(cols.end(), b.begin(), b.end());
  return cols;
}

// ---- evaluation ----

/// Runs fn(0..n-1) on `workers` threads; results land at their own index.
template <typename T>
std::vector<T> parallel_map(std::size_t n, unsigned workers, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Expands variant x J into the configurations to evaluate. J is ignored
/// (and not repeated) for Direct and Best-Relay-Max.
inline std::vector<SystemConfig> expand_variants(const SystemConfig& base, const std::vector<Variant>& variants,
                                                 const std::vector<int>& js) {
  std::vector<SystemConfig> out;
  for (Variant v : variants) {
    SystemConfig c = base;
    c.variant = v;
    if (v == Variant::Direct || v == Variant::BestRelayMax || js.empty()) {
      out.push_back(c);
      continue;
    }
    for (int j : js) {
      c.j = j;
      out.push_back(c);
    }
  }
  return out;
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::EpsStar;
  std::vector<double> values;
  std::vector<Variant> variants;  ///< empty: the configured variant
  std::vector<int> js;            ///< empty: the configured J
  std::vector<Regime> regimes;    ///< empty: the configured regime selection
};

struct SweepPoint {
  double value = 0.0;
  SystemConfig config;
  Regime regime = Regime::Fbl;
  std::string status;  ///< ok, infeasible or invalid
  std::optional<PerResult> result;
};

/// Second-difference verdict over an eps* sweep for one (variant, J, regime).
struct ConvexityVerdict {
  SystemConfig config;
  Regime regime = Regime::Fbl;
  double min_defect = 0.0;
  bool pass = true;
};

inline constexpr double kConvexitySlack = 1e-12;

/// Smallest chord defect w0 f(x0) + w2 f(x2) - f(x1) over consecutive triples,
/// with w0, w2 the linear interpolation weights at x1. Works for uneven grids;
/// a convex f never goes below 0.
inline double min_convexity_defect(const std::vector<double>& x, const std::vector<double>& f) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < x.size(); ++k) {
    const double w0 = (x[k + 1] - x[k]) / (x[k + 1] - x[k - 1]);
    const double w2 = (x[k] - x[k - 1]) / (x[k + 1] - x[k - 1]);
    worst = std::min(worst, w0 * f[k - 1] + w2 * f[k + 1] - f[k]);
  }
  return worst;
}

class Sweep {
 public:
  Sweep(SystemConfig base, SweepSpec spec) : base_(std::move(base)), spec_(std::move(spec)) {
    check_axis_values(spec_.axis, spec_.values);
    if (spec_.variants.empty()) spec_.variants = {base_.variant};
    if (spec_.js.empty()) spec_.js = {base_.j};
    if (spec_.regimes.empty()) spec_.regimes = expand(base_.regime);
  }

  /// Rows in order value, variant, J, regime.
  std::vector<SweepPoint> run(unsigned workers = 0) const {
    std::vector<SweepPoint> pts;
    for (double v : spec_.values) {
      SystemConfig c = base_;
      apply_axis(c, spec_.axis, v);
      for (const auto& vc : expand_variants(c, spec_.variants, spec_.js)) {
        for (Regime r : spec_.regimes) pts.push_back({v, vc, r, "", std::nullopt});
      }
    }
    auto done = parallel_map<SweepPoint>(pts.size(), workers, [&](std::size_t i) {
      SweepPoint p = pts[i];
      try {
        p.result = evaluate(p.config, p.regime);
        p.status = "ok";
      } catch (const InfeasibleError&) {
        p.status = "infeasible";
      } catch (const ConfigError&) {
        p.status = "invalid";
      }
      return p;
    });
    return done;
  }

  /// Convexity in eps* of per_avg and each PER_i, per (variant, J, regime).
  std::vector<ConvexityVerdict> convexity(const std::vector<SweepPoint>& pts) const {
    if (spec_.axis != SweepAxis::EpsStar) throw ConfigError("axis", "convexity check needs axis=eps_star");
    using Key = std::tuple<int, int, int>;
    std::map<Key, std::vector<const SweepPoint*>> groups;
    std::vector<Key> order;
    for (const auto& p : pts) {
      if (p.status != "ok") continue;
      const Key k{static_cast<int>(p.config.variant), diversity(p.config), static_cast<int>(p.regime)};
      if (!groups.count(k)) order.push_back(k);
      groups[k].push_back(&p);
    }
    std::vector<ConvexityVerdict> out;
    for (const auto& k : order) {
      auto g = groups[k];
      std::stable_sort(g.begin(), g.end(), [](auto* a, auto* b) { return a->value < b->value; });
      std::vector<double> x, f;
      for (auto* p : g) x.push_back(p->value);
      double worst = std::numeric_limits<double>::infinity();
      auto check = [&](auto get) {
        f.clear();
        for (auto* p : g) f.push_back(get(*p->result));
        worst = std::min(worst, min_convexity_defect(x, f));
      };
      check([](const PerResult& r) { return r.per_avg; });
      for (std::size_t i = 0; i < g.front()->result->per_packet.size(); ++i) {
        check([i](const PerResult& r) { return r.per_packet[i]; });
      }
      ConvexityVerdict v{g.front()->config, g.front()->regime, worst, true};
      if (!std::isfinite(v.min_defect)) v.min_defect = 0.0;  // fewer than three points
      v.pass = v.min_defect >= -kConvexitySlack;
      out.push_back(v);
    }
    return out;
  }

  const SweepSpec& spec() const { return spec_; }

 private:
  SystemConfig base_;
  SweepSpec spec_;
};

inline std::vector<std::string> sweep_fields(SweepAxis axis, const SweepPoint& p) {
  std::vector<std::string> f{std::string(to_string(axis)), csv::number(p.value), p.status};
  auto d = describe(p.config, p.regime);
  f.insert(f.end(), d.begin(), d.end());
  if (p.result) {
    f.push_back(csv::join(p.result->p));
    f.push_back(csv::join(p.result->per_packet));
    f.push_back(csv::number(p.result->per_avg));
  } else {
    f.insert(f.end(), {"", "", ""});
  }
  return f;
}

/// Verdict row: value holds the smallest defect, status is convex or not_convex.
inline std::vector<std::string> verdict_fields(const ConvexityVerdict& v) {
  std::vector<std::string> f{"eps_star", csv::number(v.min_defect), v.pass ? "convex" : "not_convex"};
  auto d = describe(v.config, v.regime);
  d[7] = "";  // eps_star varies over the group
  f.insert(f.end(), d.begin(), d.end());
  f.insert(f.end(), {"", "", ""});
  return f;
}

}  // namespace fblper

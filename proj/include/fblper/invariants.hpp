#pragma once

// Built-in self-check run by `fblper validate`: inversion identities,
// brute-force agreement of the distribution operations, structural
// properties of the PER for the given configuration, and a short Monte
// Carlo cross-check.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fblper/enumerate.hpp"
#include "fblper/montecarlo.hpp"
#include "fblper/per_model.hpp"

namespace fblper {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline double max_abs_diff(const BlocklengthDistribution& d, const enumerate::Histogram& h) {
  double worst = std::abs(d.tail_mass() - h.tail);
  for (int m = 1; m <= d.grid_max(); ++m) worst = std::max(worst, std::abs(d.pmf(m) - h.pmf[static_cast<std::size_t>(m - 1)]));
  return worst;
}

/// Random distribution on a small grid with some tail mass.
inline BlocklengthDistribution random_small_dist(std::mt19937_64& gen, int grid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(grid) + 1);
  double total = 0.0;
  for (auto& x : w) total += (x = u(gen) * (u(gen) < 0.25 ? 0.0 : 1.0) + 1e-3);
  std::vector<double> pmf(static_cast<std::size_t>(grid));
  for (int m = 0; m < grid; ++m) pmf[static_cast<std::size_t>(m)] = w[static_cast<std::size_t>(m)] / total;
  return {grid, pmf, w.back() / total};
}

}  // namespace detail

/// Worst relative error of the two inversion identities over `samples`
/// random (gamma, D, eps*) triples.
struct InversionErrors {
  double eps_roundtrip = 0.0;
  double gamma_roundtrip = 0.0;
};

inline InversionErrors inversion_errors(int samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  InversionErrors out;
  for (int s = 0; s < samples; ++s) {
    const double gamma = std::pow(10.0, -2.0 + 5.0 * u(gen));  // -20..30 dB
    const double d = std::pow(2.0, 4.0 + 10.0 * u(gen));        // 16..16384 bits
    const double eps = std::pow(10.0, -9.0 + 8.0 * u(gen));     // 1e-9..0.1
    const double m = minimal_blocklength(gamma, d, eps);
    out.eps_roundtrip = std::max(out.eps_roundtrip, std::abs(fbl_error_prob(gamma, d, m) - eps) / eps);
    out.gamma_roundtrip = std::max(out.gamma_roundtrip, std::abs(snr_for_blocklength(m, d, eps) - gamma) / gamma);
  }
  return out;
}

inline std::vector<CheckResult> run_invariants(const SystemConfig& config, std::uint64_t frames = 200000,
                                               unsigned workers = 0) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };

  {
    const auto e = inversion_errors(1000, 7);
    add("inversion_eps", e.eps_roundtrip <= 1e-9, "max rel err " + csv::number(e.eps_roundtrip));
    add("inversion_gamma", e.gamma_roundtrip <= 1e-9, "max rel err " + csv::number(e.gamma_roundtrip));
  }

  {
    std::mt19937_64 gen(11);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int g = 2 + trial % 7;
      const auto a = detail::random_small_dist(gen, g);
      const auto b = detail::random_small_dist(gen, g);
      const auto c = detail::random_small_dist(gen, g);
      const auto d = detail::random_small_dist(gen, g);
      worst = std::max(worst, detail::max_abs_diff(min_of(a, b), enumerate::min_of(a, b)));
      const std::vector<BlocklengthDistribution> cands{two_hop_relay_dist(a, b), two_hop_relay_dist(c, d)};
      worst = std::max(worst, detail::max_abs_diff(best_relay_dist(cands), enumerate::best_relay({a, b, c, d})));
      worst = std::max(worst, detail::max_abs_diff(best_antenna_dist(a, b, 2), enumerate::best_antenna(a, b, 2)));
      const std::vector<BlocklengthDistribution> chosen{a, b, c};
      const auto p = schedule_probs(chosen, g);
      const auto q = enumerate::schedule_probs(chosen, g);
      for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
    }
    add("enumeration_oracles", worst <= 1e-12, "max abs diff " + csv::number(worst));
  }

  const Scenario sc = resolve_scenario(config);
  const PerResult ibl = evaluate(sc, Regime::Ibl);
  std::optional<PerResult> fbl;
  if (config.eps_star > 0.0) fbl = evaluate(sc, Regime::Fbl);

  {
    bool ok = true;
    for (const PerResult* r : std::vector<const PerResult*>{&ibl, fbl ? &*fbl : nullptr}) {
      if (!r) continue;
      for (std::size_t i = 0; i < r->p.size(); ++i) {
        ok = ok && r->p[i] >= 0.0 && r->p[i] <= 1.0 && (i == 0 || r->p[i] <= r->p[i - 1]);
        const double expect = r->unscheduled[i] + (1.0 - r->unscheduled[i]) * r->eps_ave[i];
        ok = ok && std::abs(r->per_packet[i] - expect) <= 1e-15;
      }
    }
    add("p_nonincreasing_and_per_composition", ok, "");
  }

  if (fbl) {
    bool ok = true;
    for (std::size_t i = 0; i < ibl.per_packet.size(); ++i) ok = ok && fbl->per_packet[i] >= ibl.per_packet[i];
    add("fbl_at_least_ibl", ok && fbl->per_avg >= ibl.per_avg,
        "fbl " + csv::number(fbl->per_avg) + " ibl " + csv::number(ibl.per_avg));
  }

  if (!config.heterogeneous()) {
    SystemConfig more_snr = config;
    more_snr.snr_db += 3.0;
    SystemConfig more_symbols = config;
    more_symbols.bandwidth_hz *= 1.25;
    const Regime r = fbl ? Regime::Fbl : Regime::Ibl;
    const double base = fbl ? fbl->per_avg : ibl.per_avg;
    const double a = evaluate(more_snr, r).per_avg;
    const double b = evaluate(more_symbols, r).per_avg;
    add("per_nonincreasing_in_snr_and_budget", a <= base && b <= base,
        "base " + csv::number(base) + " +3dB " + csv::number(a) + " 1.25B " + csv::number(b));
  }

  if (frames > 0) {
    const Regime r = fbl ? Regime::Fbl : Regime::Ibl;
    const double analytic = fbl ? fbl->per_avg : ibl.per_avg;
    const McEstimate est = estimate_per(FrameSimulator(sc, r), frames, 1, workers);
    const double tol = 4.0 * est.std_error + config.eps_star * config.eps_star + 1.0 / static_cast<double>(frames);
    add("monte_carlo_agreement", std::abs(est.per_hat - analytic) <= tol,
        "analytic " + csv::number(analytic) + " mc " + csv::number(est.per_hat) + " tol " + csv::number(tol));
  }
  return out;
}

}  // namespace fblper

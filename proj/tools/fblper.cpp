// fblper: analytic PER, Monte Carlo validation and parameter sweeps for
// relay-assisted scheduling under finite-blocklength coding. Output is CSV.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fblper/invariants.hpp"
#include "fblper/sweep.hpp"

namespace {

using namespace fblper;

struct Common {
  std::string config_path;
  std::string out_path;
  std::string variants;
  std::string js;
  bool exact_two_hop = false;
  // config key -> raw value, applied over the file
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", c.out_path, "write CSV here instead of stdout");
  app->add_option("--variant", c.variants, "direct, best_antenna, best_relay, best_relay_max (comma list)");
  app->add_option("--j", c.js, "antennas or relay candidates (comma list)");
  app->add_flag("--exact-two-hop", c.exact_two_hop, "use 1-(1-eps*)^2 for relayed packets");
  struct Flag {
    const char* name;
    const char* key;
  };
  for (const Flag& f : {Flag{"--regime", "regime"}, Flag{"--eps-star", "eps_star"},
                        Flag{"--bandwidth-hz", "bandwidth_hz"}, Flag{"--cycle-s", "cycle_s"},
                        Flag{"--terminals", "terminals"}, Flag{"--payload-bits", "payload_bits"},
                        Flag{"--alpha-symbols", "alpha_symbols"}, Flag{"--beta-bits", "beta_bits"},
                        Flag{"--snr-db", "snr_db"}, Flag{"--snr-matrix-db", "snr_matrix_db"}}) {
    const std::string key = f.key;
    app->add_option_function<std::string>(
        f.name, [&c, key](const std::string& v) { c.overrides[key] = v; }, "overrides config key " + key);
  }
}

struct Resolved {
  SystemConfig config;
  std::vector<Variant> variants;
  std::vector<int> js;
};

Resolved resolve(const Common& c) {
  Resolved r;
  if (!c.config_path.empty()) r.config = load_config(c.config_path);
  for (const auto& [k, v] : c.overrides) apply_setting(r.config, k, v);
  if (c.exact_two_hop) r.config.exact_two_hop = true;
  if (!c.variants.empty()) {
    for (const auto& tok : detail::split(c.variants, ',')) {
      const auto v = parse_variant(tok);
      if (!v) throw ConfigError("variant", "unknown variant '" + tok + "'");
      r.variants.push_back(*v);
    }
    r.config.variant = r.variants.front();
  } else {
    r.variants = {r.config.variant};
  }
  if (!c.js.empty()) {
    for (const auto& tok : detail::split(c.js, ',')) r.js.push_back(detail::parse_int("j", tok));
    r.config.j = r.js.front();
  } else {
    r.js = {r.config.j};
  }
  return r;
}

unsigned workers_from_env() {
  const char* s = std::getenv("FBLPER_WORKERS");
  if (!s || !*s) return 0;
  return static_cast<unsigned>(detail::parse_int("FBLPER_WORKERS", s));
}

void emit(const Common& c, const std::string& text) {
  if (c.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(c.out_path, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write '" + c.out_path + "'");
  out << text;
}

std::string cmd_analytic(const Common& c) {
  const Resolved r = resolve(c);
  std::string text = csv::row(base_columns());
  for (const auto& cfg : expand_variants(r.config, r.variants, r.js)) {
    const Scenario sc = resolve_scenario(cfg);
    for (Regime reg : expand(cfg.regime)) text += csv::row(analytic_fields(cfg, evaluate(sc, reg)));
  }
  return text;
}

std::string cmd_simulate(const Common& c, std::uint64_t frames, std::uint64_t seed) {
  const Resolved r = resolve(c);
  const unsigned workers = workers_from_env();
  std::string text = csv::row(simulate_columns());
  for (const auto& cfg : expand_variants(r.config, r.variants, r.js)) {
    const Scenario sc = resolve_scenario(cfg);
    for (Regime reg : expand(cfg.regime)) {
      const McEstimate est = estimate_per(FrameSimulator(sc, reg), frames, seed, workers);
      text += csv::row(simulate_fields(cfg, reg, est));
    }
  }
  return text;
}

std::string cmd_sweep(const Common& c, const std::string& axis_name, const std::string& values, bool convexity) {
  const Resolved r = resolve(c);
  const auto axis = parse_axis(axis_name);
  if (!axis) throw ConfigError("axis", "unknown axis '" + axis_name + "'");
  SweepSpec spec;
  spec.axis = *axis;
  spec.values = parse_values(values);
  spec.variants = r.variants;
  spec.js = r.js;
  const Sweep sweep(r.config, spec);
  if (convexity && spec.axis != SweepAxis::EpsStar) throw ConfigError("axis", "--check-convexity needs --axis eps_star");
  const auto pts = sweep.run(workers_from_env());
  std::string text = csv::row(sweep_columns());
  for (const auto& p : pts) text += csv::row(sweep_fields(spec.axis, p));
  if (convexity) {
    for (const auto& v : sweep.convexity(pts)) text += csv::row(verdict_fields(v));
  }
  return text;
}

int cmd_validate(const Common& c, std::uint64_t frames) {
  const Resolved r = resolve(c);
  const auto checks = run_invariants(r.config, frames, workers_from_env());
  std::string text;
  bool all = true;
  for (const auto& ch : checks) {
    all = all && ch.pass;
    text += std::string(ch.pass ? "PASS " : "FAIL ") + ch.name + (ch.detail.empty() ? "" : "  " + ch.detail) + "\n";
  }
  emit(c, text);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet error rates of relay-assisted frame scheduling with finite blocklength codes"};
  app.require_subcommand(1);

  Common analytic_opts, simulate_opts, sweep_opts, validate_opts;
  auto* analytic = app.add_subcommand("analytic", "analytic PER, one row per variant and regime");
  add_common(analytic, analytic_opts);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo PER estimate");
  add_common(simulate, simulate_opts);
  std::uint64_t frames = 1000000, seed = 1;
  simulate->add_option("--frames", frames, "number of frames")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "generator seed");

  auto* sweep = app.add_subcommand("sweep", "evaluate over one axis");
  add_common(sweep, sweep_opts);
  std::string axis, values;
  bool convexity = false;
  sweep->add_option("--axis", axis, "eps_star, payload_bits, snr_db, terminals, bandwidth_hz, alpha_symbols, beta_bits")
      ->required();
  sweep->add_option("--values", values, "a,b,c or start:stop:count[:lin|log]")->required();
  sweep->add_flag("--check-convexity", convexity, "append min second-difference verdict rows");

  auto* validate = app.add_subcommand("validate", "run the built-in invariant checks");
  add_common(validate, validate_opts);
  std::uint64_t validate_frames = 200000;
  validate->add_option("--frames", validate_frames, "frames for the Monte Carlo cross-check (0 skips it)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analytic) emit(analytic_opts, cmd_analytic(analytic_opts));
    if (*simulate) emit(simulate_opts, cmd_simulate(simulate_opts, frames, seed));
    if (*sweep) emit(sweep_opts, cmd_sweep(sweep_opts, axis, values, convexity));
    if (*validate) return cmd_validate(validate_opts, validate_frames);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

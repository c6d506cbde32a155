#pragma once

// Scheduling probabilities, expected decoding error of a scheduled packet,
// and the resulting per-packet and frame-average packet error rates.

#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fblper/cost_dist.hpp"
#include "fblper/path_dist.hpp"
#include "fblper/scenario.hpp"

namespace fblper {

struct PerResult {
  Regime regime = Regime::Fbl;
  std::vector<double> p;            ///< P(packets 1..i all fit in the budget)
  std::vector<double> unscheduled;  ///< 1 - p_i, computed without cancellation
  std::vector<double> eps_ave;      ///< expected decoding error once scheduled
  std::vector<double> per_packet;
  double per_avg = 0.0;
};

/// Cost distributions of the two options for one packet.
struct PacketDists {
  BlocklengthDistribution direct;
  BlocklengthDistribution relay;
};

struct SchedulePrefix {
  std::vector<double> p;
  std::vector<double> unscheduled;
};

/// Scheduling in fixed order 1..N: packet i is scheduled iff the chosen costs
/// of packets 1..i sum to at most S.
inline SchedulePrefix schedule_prefix(std::span<const BlocklengthDistribution> min_cost_dists, int budget) {
  if (min_cost_dists.empty()) throw DomainError("schedule needs at least one packet");
  SchedulePrefix out;
  std::optional<BlocklengthDistribution> running;
  for (const auto& d : min_cost_dists) {
    if (d.grid_max() != budget) {
      throw GridMismatch("distribution grid " + std::to_string(d.grid_max()) + " differs from budget " +
                         std::to_string(budget));
    }
    running = running ? convolve(*running, d) : d;
    out.unscheduled.push_back(running->tail_mass());
    out.p.push_back(1.0 - running->tail_mass());
  }
  return out;
}

inline std::vector<double> schedule_probs(std::span<const BlocklengthDistribution> min_cost_dists, int budget) {
  return schedule_prefix(min_cost_dists, budget).p;
}

/// Decoding error of a two-hop path given eps* per hop.
inline double two_hop_error(double eps_star, bool exact) {
  return exact ? eps_star * (2.0 - eps_star) : 2.0 * eps_star;
}

/// eps*_ave = P(direct | scheduled) eps* + P(relay | scheduled) eps_two_hop.
inline double expected_link_error(const BlocklengthDistribution& direct, const BlocklengthDistribution& relay,
                                  double eps_star, bool exact_two_hop = false) {
  if (!(eps_star >= 0.0 && eps_star < 0.5)) throw DomainError("eps* must lie in [0, 0.5)");
  const ChoiceProbs c = relay_choice_probs(direct, relay);
  const double schedulable = c.p_direct + c.p_relay;
  if (!(schedulable > 0.0)) return eps_star;
  return (c.p_direct * eps_star + c.p_relay * two_hop_error(eps_star, exact_two_hop)) / schedulable;
}

namespace detail {

inline PerResult combine(Regime regime, std::span<const PacketDists> packets, int budget, double eps_star,
                         bool exact_two_hop) {
  std::vector<BlocklengthDistribution> chosen;
  chosen.reserve(packets.size());
  for (const auto& pk : packets) chosen.push_back(chosen_cost_dist(pk.direct, pk.relay));
  const SchedulePrefix sched = schedule_prefix(chosen, budget);

  PerResult r;
  r.regime = regime;
  r.p = sched.p;
  r.unscheduled = sched.unscheduled;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const double eps =
        regime == Regime::Fbl ? expected_link_error(packets[i].direct, packets[i].relay, eps_star, exact_two_hop) : 0.0;
    r.eps_ave.push_back(eps);
    r.per_packet.push_back(r.unscheduled[i] + (1.0 - r.unscheduled[i]) * eps);
  }
  r.per_avg = std::accumulate(r.per_packet.begin(), r.per_packet.end(), 0.0) / static_cast<double>(r.per_packet.size());
  return r;
}

}  // namespace detail

/// PER_i = 1 - p_i + p_i eps*_ave,i and their mean.
inline PerResult per_fbl(std::span<const PacketDists> packets, int budget, double eps_star,
                         bool exact_two_hop = false) {
  if (!(eps_star > 0.0 && eps_star < 0.5)) throw DomainError("eps* must lie in (0, 0.5)");
  return detail::combine(Regime::Fbl, packets, budget, eps_star, exact_two_hop);
}

/// PER_i = 1 - p_i.
inline PerResult per_ibl(std::span<const PacketDists> packets, int budget) {
  return detail::combine(Regime::Ibl, packets, budget, 0.0, false);
}

/// Builds each packet's direct and relaying cost distributions for a resolved
/// scenario. Single-hop distributions are shared between links with equal
/// average SNR and identical packets share their path distributions.
inline std::vector<PacketDists> build_packet_dists(const Scenario& sc, Regime regime) {
  const int grid = sc.budget;
  std::optional<BlocklengthMap> map;
  if (regime == Regime::Fbl) map.emplace(sc.payload_bits, sc.config.eps_star);

  std::map<double, BlocklengthDistribution> hops;
  auto hop = [&](double gamma_bar) -> const BlocklengthDistribution& {
    auto it = hops.find(gamma_bar);
    if (it == hops.end()) {
      it = hops
               .emplace(gamma_bar, regime == Regime::Fbl ? single_hop_dist_fbl(*map, gamma_bar, grid)
                                                         : single_hop_dist_ibl(gamma_bar, sc.payload_bits, grid))
               .first;
    }
    return it->second;
  };

  std::vector<std::pair<const PacketPaths*, std::size_t>> seen;
  std::vector<PacketDists> out;
  out.reserve(sc.packets.size());
  for (const auto& pk : sc.packets) {
    bool reused = false;
    for (const auto& [paths, idx] : seen) {
      if (*paths == pk) {
        out.push_back(out[idx]);
        reused = true;
        break;
      }
    }
    if (reused) continue;

    BlocklengthDistribution direct = hop(pk.direct);
    BlocklengthDistribution relay = BlocklengthDistribution::all_tail(grid);
    switch (sc.config.variant) {
      case Variant::Direct: break;
      case Variant::BestAntenna: relay = best_antenna_dist(hop(pk.via_ap.first), hop(pk.via_ap.second), pk.antennas); break;
      case Variant::BestRelay:
      case Variant::BestRelayMax: {
        std::vector<BlocklengthDistribution> candidates;
        bool identical = true;
        for (const auto& c : pk.relay_candidates) {
          identical = identical && c == pk.relay_candidates.front();
        }
        if (identical && !pk.relay_candidates.empty()) {
          const auto& c = pk.relay_candidates.front();
          relay = best_of_iid(two_hop_relay_dist(hop(c.first), hop(c.second)),
                              static_cast<int>(pk.relay_candidates.size()));
        } else {
          for (const auto& c : pk.relay_candidates) candidates.push_back(two_hop_relay_dist(hop(c.first), hop(c.second)));
          relay = best_relay_dist(candidates);
        }
        break;
      }
    }
    seen.emplace_back(&pk, out.size());
    out.push_back(PacketDists{std::move(direct), std::move(relay)});
  }
  return out;
}

/// Analytic PER of a resolved scenario in one regime.
inline PerResult evaluate(const Scenario& sc, Regime regime) {
  const auto dists = build_packet_dists(sc, regime);
  if (regime == Regime::Fbl) return per_fbl(dists, sc.budget, sc.config.eps_star, sc.config.exact_two_hop);
  return per_ibl(dists, sc.budget);
}

inline PerResult evaluate(const SystemConfig& config, Regime regime) { return evaluate(resolve_scenario(config), regime); }

}  // namespace fblper

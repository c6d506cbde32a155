#pragma once

// Resolution of a SystemConfig into the per-packet link set that both the
// analytic model and the simulator work from.
//
// Packet i is sent by terminal i to terminal rx(i) = i mod N + 1. Relay
// candidates for packet i are the remaining terminals in index order followed
// by the AP (single antenna). Best-Relay uses the first J of them,
// Best-Relay-Max all N - 1.

#include <vector>

#include "fblper/config.hpp"

namespace fblper {

struct HopPair {
  double first = 0.0;   ///< gamma_bar of Tx -> relay
  double second = 0.0;  ///< gamma_bar of relay -> Rx
  bool operator==(const HopPair&) const = default;
};

struct PacketPaths {
  double direct = 0.0;
  /// Best-Relay(-Max): one entry per candidate, selection per path.
  std::vector<HopPair> relay_candidates;
  /// Best-Antenna: AP hops, best of `antennas` picked per hop.
  HopPair via_ap;
  int antennas = 0;

  bool operator==(const PacketPaths&) const = default;
};

struct Scenario {
  SystemConfig config;
  double payload_bits = 0.0;
  int budget = 0;  ///< symbols left after the reference signals
  std::vector<PacketPaths> packets;
};

inline int receiver_of(int tx, int terminals) { return tx % terminals + 1; }

/// Validates the configuration and resolves every packet's links. Throws
/// ConfigError for invalid keys and InfeasibleError when N*alpha >= S.
inline Scenario resolve_scenario(const SystemConfig& config) {
  config.validate();
  if (config.heterogeneous() && config.terminals < 2) {
    throw ConfigError("snr_matrix_db", "a per-link topology needs at least two terminals");
  }
  Scenario sc;
  sc.config = config;
  sc.payload_bits = payload_bits(config);
  sc.budget = effective_budget(config);

  const TopologySnr topo = config.topology();
  const int n = config.terminals;
  const int div = diversity(config);

  for (int tx = 1; tx <= n; ++tx) {
    PacketPaths p;
    if (topo.is_homogeneous()) {
      const double g = db_to_linear(config.snr_db);
      p.direct = g;
      if (config.variant == Variant::BestAntenna) {
        p.via_ap = {g, g};
        p.antennas = div;
      } else if (config.variant != Variant::Direct) {
        p.relay_candidates.assign(static_cast<std::size_t>(div), HopPair{g, g});
      }
    } else {
      const int rx = receiver_of(tx, n);
      p.direct = topo.link(tx, rx);
      if (config.variant == Variant::BestAntenna) {
        p.via_ap = {topo.link(tx, 0), topo.link(0, rx)};
        p.antennas = div;
      } else if (config.variant != Variant::Direct) {
        std::vector<int> pool;
        for (int k = 1; k <= n; ++k) {
          if (k != tx && k != rx) pool.push_back(k);
        }
        pool.push_back(0);
        for (int c = 0; c < div; ++c) {
          const int relay = pool[static_cast<std::size_t>(c)];
          p.relay_candidates.push_back({topo.link(tx, relay), topo.link(relay, rx)});
        }
      }
    }
    sc.packets.push_back(std::move(p));
  }
  return sc;
}

}  // namespace fblper

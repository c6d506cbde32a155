#pragma once

// Cost of the relaying path and of the path the scheduler finally picks, for
// the Direct, Best-Relay and Best-Antenna variants.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fblper/cost_dist.hpp"
#include "fblper/errors.hpp"

namespace fblper {

/// Average SNRs of all links. Index 0 is the access point, 1..N the terminals.
class TopologySnr {
 public:
  /// Every link (terminal-terminal and terminal-AP) at the same gamma_bar.
  static TopologySnr homogeneous(int terminals, double gamma_bar) {
    if (terminals < 1) throw DomainError("topology needs at least one terminal");
    detail::require_positive(gamma_bar, "average SNR");
    const auto n = static_cast<std::size_t>(terminals) + 1;
    TopologySnr t;
    t.terminals_ = terminals;
    t.homogeneous_ = true;
    t.matrix_.assign(n * n, gamma_bar);
    return t;
  }

  /// Full (N+1)x(N+1) matrix of linear average SNRs, row-major; the diagonal
  /// is ignored. Must be symmetric since links are reciprocal.
  static TopologySnr from_matrix(int terminals, std::vector<double> matrix) {
    if (terminals < 1) throw DomainError("topology needs at least one terminal");
    const auto n = static_cast<std::size_t>(terminals) + 1;
    if (matrix.size() != n * n) throw DomainError("SNR matrix must be (N+1)x(N+1)");
    TopologySnr t;
    t.terminals_ = terminals;
    t.matrix_ = std::move(matrix);
    bool uniform = true;
    const double first = t.matrix_[1];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = t.matrix_[i * n + j];
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("average SNRs must be finite and > 0");
        if (v != t.matrix_[j * n + i]) throw DomainError("SNR matrix must be symmetric (reciprocal links)");
        uniform = uniform && v == first;
      }
    }
    t.homogeneous_ = uniform;
    return t;
  }

  int terminals() const { return terminals_; }
  bool is_homogeneous() const { return homogeneous_; }

  /// gamma_bar between nodes i and j (0 = AP).
  double link(int i, int j) const {
    if (i == j || i < 0 || j < 0 || i > terminals_ || j > terminals_) throw DomainError("invalid link index");
    const auto n = static_cast<std::size_t>(terminals_) + 1;
    return matrix_[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
  }

  double ap_terminal(int i) const { return link(0, i); }

 private:
  TopologySnr() = default;

  int terminals_ = 0;
  bool homogeneous_ = false;
  std::vector<double> matrix_;
};

/// Cost of a two-hop path: M_R = M_R1 + M_R2.
inline BlocklengthDistribution two_hop_relay_dist(const BlocklengthDistribution& first_hop,
                                                  const BlocklengthDistribution& second_hop) {
  return convolve(first_hop, second_hop);
}

/// Cheapest of J candidate two-hop paths: F = 1 - prod_j (1 - F_j).
inline BlocklengthDistribution best_relay_dist(std::span<const BlocklengthDistribution> candidates) {
  if (candidates.empty()) throw DomainError("best relay selection needs at least one candidate");
  return minimum_of(candidates);
}

/// Relaying through a J-antenna AP: best antenna picked independently on
/// the uplink and the downlink hop, then the two hop costs add.
inline BlocklengthDistribution best_antenna_dist(const BlocklengthDistribution& uplink,
                                                 const BlocklengthDistribution& downlink, int antennas) {
  detail::require_same_grid(uplink, downlink);
  return convolve(best_of_iid(uplink, antennas), best_of_iid(downlink, antennas));
}

/// Cost the scheduler spends: M_min = min(M_D, M_R).
inline BlocklengthDistribution chosen_cost_dist(const BlocklengthDistribution& direct,
                                                const BlocklengthDistribution& relay) {
  return min_of(direct, relay);
}

/// How the scheduler splits between the direct and relaying path. Ties go to
/// the direct path.
struct ChoiceProbs {
  double p_direct = 0.0;    ///< P(M_R >= M_D, M_D on grid)
  double p_relay = 0.0;     ///< P(M_R < M_D, M_R on grid)
  double p_both_tail = 0.0; ///< neither path fits
};

inline ChoiceProbs relay_choice_probs(const BlocklengthDistribution& direct, const BlocklengthDistribution& relay) {
  detail::require_same_grid(direct, relay);
  ChoiceProbs out;
  for (int m = 1; m <= direct.grid_max(); ++m) {
    out.p_direct += direct.pmf(m) * relay.survival(m - 1);
    out.p_relay += relay.pmf(m) * direct.survival(m);
  }
  out.p_both_tail = direct.tail_mass() * relay.tail_mass();
  return out;
}

}  // namespace fblper

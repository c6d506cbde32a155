#pragma once

// Frame-level Monte Carlo: Rayleigh draws per link, integer blocklengths,
// path selection, in-order scheduling against the budget, and Bernoulli
// decoding failures for scheduled packets.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "fblper/fbl_core.hpp"
#include "fblper/per_model.hpp"
#include "fblper/rng.hpp"
#include "fblper/scenario.hpp"

namespace fblper {

struct PathCosts {
  int m_direct = 0;
  int m_r1 = 0;  ///< first hop of the selected relaying path
  int m_r2 = 0;
  int m_relay = 0;
  int m_min = 0;
  bool chose_relay = false;
};

struct PacketOutcome {
  bool scheduled = false;
  bool decoded = false;
  bool chose_relay = false;
};

struct McEstimate {
  std::uint64_t frames = 0;
  std::uint64_t seed = 0;
  double per_hat = 0.0;
  double std_error = 0.0;     ///< from the per-frame error fraction
  double ci_halfwidth = 0.0;  ///< 1.96 std_error
  std::vector<double> per_packet_hat;
  std::vector<double> scheduled_hat;  ///< frequency of packet i fitting in the budget
  std::uint64_t relayed_scheduled = 0;
  std::uint64_t relayed_failed = 0;
};

/// Draws and evaluates frames of one resolved scenario. Costs above the
/// budget are clamped to budget + 1; they are never scheduled either way.
class FrameSimulator {
 public:
  FrameSimulator(Scenario sc, Regime regime) : sc_(std::move(sc)), regime_(regime) {
    if (sc_.budget < 0) throw DomainError("budget must be >= 0");
    if (regime_ == Regime::Fbl) map_.emplace(sc_.payload_bits, sc_.config.eps_star);
    cap_ = sc_.budget + 1;
    two_hop_fail_ = two_hop_error(sc_.config.eps_star, true);
  }

  const Scenario& scenario() const { return sc_; }
  Regime regime() const { return regime_; }
  std::size_t packets() const { return sc_.packets.size(); }

  int hop_cost(double gamma) const {
    const double m = map_ ? map_->blocklength(gamma) : ibl_min_blocklength(gamma, sc_.payload_bits);
    if (!(m < static_cast<double>(cap_))) return cap_;
    return static_cast<int>(std::ceil(m));
  }

  PathCosts draw_paths(const PacketPaths& pk, FrameStream& rng) const {
    PathCosts c;
    c.m_direct = hop_cost(rng.exponential() * pk.direct);
    c.m_relay = 2 * cap_;
    c.m_r1 = c.m_r2 = cap_;
    if (sc_.config.variant == Variant::BestAntenna) {
      int up = cap_, down = cap_;
      for (int a = 0; a < pk.antennas; ++a) up = std::min(up, hop_cost(rng.exponential() * pk.via_ap.first));
      for (int a = 0; a < pk.antennas; ++a) down = std::min(down, hop_cost(rng.exponential() * pk.via_ap.second));
      c.m_r1 = up;
      c.m_r2 = down;
      c.m_relay = up + down;
    } else {
      for (const auto& cand : pk.relay_candidates) {
        const int r1 = hop_cost(rng.exponential() * cand.first);
        const int r2 = hop_cost(rng.exponential() * cand.second);
        if (r1 + r2 < c.m_relay) {
          c.m_r1 = r1;
          c.m_r2 = r2;
          c.m_relay = r1 + r2;
        }
      }
    }
    c.chose_relay = c.m_relay < c.m_direct;
    c.m_min = c.chose_relay ? c.m_relay : c.m_direct;
    return c;
  }

  /// One frame. `out` must hold one entry per packet.
  void run(FrameStream& rng, std::span<PacketOutcome> out) const {
    std::int64_t used = 0;
    bool full = false;
    for (std::size_t i = 0; i < sc_.packets.size(); ++i) {
      const PathCosts c = draw_paths(sc_.packets[i], rng);
      used += c.m_min;
      full = full || used > sc_.budget;
      out[i] = {!full, false, c.chose_relay};
    }
    for (auto& o : out) {
      const double u = rng.uniform();
      if (!o.scheduled) continue;
      if (regime_ == Regime::Ibl) {
        o.decoded = true;
      } else {
        o.decoded = u >= (o.chose_relay ? two_hop_fail_ : sc_.config.eps_star);
      }
    }
  }

 private:
  Scenario sc_;
  Regime regime_;
  std::optional<BlocklengthMap> map_;
  int cap_ = 1;
  double two_hop_fail_ = 0.0;
};

inline std::vector<PacketOutcome> simulate_frame(const FrameSimulator& sim, FrameStream& rng) {
  std::vector<PacketOutcome> out(sim.packets());
  sim.run(rng, out);
  return out;
}

inline std::vector<PacketOutcome> simulate_frame(const SystemConfig& config, Regime regime, FrameStream& rng) {
  return simulate_frame(FrameSimulator(resolve_scenario(config), regime), rng);
}

namespace detail {

struct McTally {
  std::uint64_t errors = 0;
  std::uint64_t errors_sq = 0;  ///< sum over frames of (errors in frame)^2
  std::vector<std::uint64_t> failed;
  std::vector<std::uint64_t> scheduled;
  std::uint64_t relayed_scheduled = 0;
  std::uint64_t relayed_failed = 0;

  explicit McTally(std::size_t n) : failed(n, 0), scheduled(n, 0) {}

  void add(const McTally& o) {
    errors += o.errors;
    errors_sq += o.errors_sq;
    for (std::size_t i = 0; i < failed.size(); ++i) {
      failed[i] += o.failed[i];
      scheduled[i] += o.scheduled[i];
    }
    relayed_scheduled += o.relayed_scheduled;
    relayed_failed += o.relayed_failed;
  }
};

inline constexpr std::uint64_t kFramesPerChunk = 16384;

}  // namespace detail

/// Runs `frames` frames split in fixed chunks over `workers` threads (0 picks
/// the hardware concurrency). Frame f always uses stream (seed, f) and the
/// tallies are integers, so the estimate does not depend on `workers`.
inline McEstimate estimate_per(const FrameSimulator& sim, std::uint64_t frames, std::uint64_t seed,
                               unsigned workers = 0) {
  if (frames < 1) throw DomainError("frames must be >= 1");
  const std::size_t n = sim.packets();
  const std::uint64_t chunks = (frames + detail::kFramesPerChunk - 1) / detail::kFramesPerChunk;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));

  detail::McTally total(n);
  std::mutex mu;
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;

  auto work = [&] {
    try {
      detail::McTally local(n);
      std::vector<PacketOutcome> out(n);
      for (std::uint64_t ch = next++; ch < chunks; ch = next++) {
        const std::uint64_t begin = ch * detail::kFramesPerChunk;
        const std::uint64_t end = std::min(frames, begin + detail::kFramesPerChunk);
        for (std::uint64_t f = begin; f < end; ++f) {
          FrameStream rng(seed, f);
          sim.run(rng, out);
          std::uint64_t e = 0;
          for (std::size_t i = 0; i < n; ++i) {
            const auto& o = out[i];
            if (o.scheduled) {
              ++local.scheduled[i];
              if (o.chose_relay) {
                ++local.relayed_scheduled;
                if (!o.decoded) ++local.relayed_failed;
              }
            }
            if (!o.decoded) {
              ++local.failed[i];
              ++e;
            }
          }
          local.errors += e;
          local.errors_sq += e * e;
        }
      }
      std::lock_guard lock(mu);
      total.add(local);
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      next = chunks;
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  McEstimate est;
  est.frames = frames;
  est.seed = seed;
  const double f = static_cast<double>(frames);
  const double nd = static_cast<double>(n);
  est.per_hat = static_cast<double>(total.errors) / (f * nd);
  if (frames > 1) {
    // sample variance of the per-frame error fraction
    const long double se = static_cast<long double>(total.errors);
    const long double sq = static_cast<long double>(total.errors_sq);
    const long double var = (sq - se * se / f) / ((f - 1.0L) * nd * nd);
    est.std_error = std::sqrt(static_cast<double>(std::max(var, 0.0L)) / f);
  }
  est.ci_halfwidth = 1.96 * est.std_error;
  for (std::size_t i = 0; i < n; ++i) {
    est.per_packet_hat.push_back(static_cast<double>(total.failed[i]) / f);
    est.scheduled_hat.push_back(static_cast<double>(total.scheduled[i]) / f);
  }
  est.relayed_scheduled = total.relayed_scheduled;
  est.relayed_failed = total.relayed_failed;
  return est;
}

inline McEstimate estimate_per(const SystemConfig& config, Regime regime, std::uint64_t frames, std::uint64_t seed,
                               unsigned workers = 0) {
  return estimate_per(FrameSimulator(resolve_scenario(config), regime), frames, seed, workers);
}

}  // namespace fblper

#pragma once

// Brute-force references for the distribution operations: enumerate every
// joint outcome of a few independent small-grid costs. Only practical for
// grids of a handful of points; used by the self-check and the tests.

#include <functional>
#include <vector>

#include "fblper/cost_dist.hpp"

namespace fblper::enumerate {

/// Outcome value grid_max + 1 stands for "beyond the grid".
inline int beyond(const BlocklengthDistribution& d) { return d.grid_max() + 1; }

/// Calls fn(values, probability) for every joint outcome.
inline void joint(const std::vector<BlocklengthDistribution>& ds,
                  const std::function<void(const std::vector<int>&, double)>& fn) {
  std::vector<int> v(ds.size(), 1);
  const auto prob_of = [&](std::size_t k, int x) {
    return x == beyond(ds[k]) ? ds[k].tail_mass() : ds[k].pmf(x);
  };
  while (true) {
    double p = 1.0;
    for (std::size_t k = 0; k < ds.size(); ++k) p *= prob_of(k, v[k]);
    fn(v, p);
    std::size_t k = 0;
    for (; k < ds.size(); ++k) {
      if (v[k] < beyond(ds[k])) {
        ++v[k];
        break;
      }
      v[k] = 1;
    }
    if (k == ds.size()) return;
  }
}

/// Accumulates outcome masses into a distribution on `grid`; anything above
/// the grid goes to the tail.
struct Histogram {
  explicit Histogram(int grid) : grid(grid), pmf(static_cast<std::size_t>(grid), 0.0) {}
  void add(int x, double p) {
    if (x <= grid) {
      pmf[static_cast<std::size_t>(x - 1)] += p;
    } else {
      tail += p;
    }
  }
  int grid;
  std::vector<double> pmf;
  double tail = 0.0;
};

inline int add_costs(int a, int b, int grid) { return a > grid || b > grid ? grid + 1 : a + b; }

inline Histogram min_of(const BlocklengthDistribution& a, const BlocklengthDistribution& b) {
  Histogram h(a.grid_max());
  joint({a, b}, [&](const std::vector<int>& v, double p) { h.add(std::min(v[0], v[1]), p); });
  return h;
}

inline Histogram sum_of(const BlocklengthDistribution& a, const BlocklengthDistribution& b) {
  const int g = a.grid_max();
  Histogram h(g);
  joint({a, b}, [&](const std::vector<int>& v, double p) { h.add(add_costs(v[0], v[1], g), p); });
  return h;
}

/// min over candidates of (first hop + second hop); hops listed as
/// first0, second0, first1, second1, ...
inline Histogram best_relay(const std::vector<BlocklengthDistribution>& hops) {
  const int g = hops.front().grid_max();
  Histogram h(g);
  joint(hops, [&](const std::vector<int>& v, double p) {
    int best = g + 1;
    for (std::size_t k = 0; k + 1 < v.size(); k += 2) best = std::min(best, add_costs(v[k], v[k + 1], g));
    h.add(best, p);
  });
  return h;
}

/// (min of J uplink antennas) + (min of J downlink antennas).
inline Histogram best_antenna(const BlocklengthDistribution& up, const BlocklengthDistribution& down, int j) {
  const int g = up.grid_max();
  std::vector<BlocklengthDistribution> ds;
  for (int k = 0; k < j; ++k) ds.push_back(up);
  for (int k = 0; k < j; ++k) ds.push_back(down);
  Histogram h(g);
  joint(ds, [&](const std::vector<int>& v, double p) {
    int u = g + 1, d = g + 1;
    for (int k = 0; k < j; ++k) {
      u = std::min(u, v[static_cast<std::size_t>(k)]);
      d = std::min(d, v[static_cast<std::size_t>(j + k)]);
    }
    h.add(add_costs(u, d, g), p);
  });
  return h;
}

/// P(first i costs sum to at most budget), i = 1..n.
inline std::vector<double> schedule_probs(const std::vector<BlocklengthDistribution>& chosen, int budget) {
  std::vector<double> p(chosen.size(), 0.0);
  joint(chosen, [&](const std::vector<int>& v, double prob) {
    long used = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > chosen[i].grid_max()) break;
      used += v[i];
      if (used > budget) break;
      p[i] += prob;
    }
  });
  return p;
}

}  // namespace fblper::enumerate

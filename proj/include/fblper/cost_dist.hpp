#pragma once

// Discrete distributions of the symbol cost of a transmission over the integer
// grid 1..S, with the mass beyond S kept separately as "tail" (the packet
// cannot be scheduled in this frame).
//
// Every operation below is written as a sum of nonnegative terms: tail
// probabilities of 1e-20 and below keep full relative precision instead of
// drowning in 1 - (1 - x) cancellation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fblper/csv.hpp"
#include "fblper/detail/fft_convolve.hpp"
#include "fblper/errors.hpp"
#include "fblper/fbl_core.hpp"

namespace fblper {

/// Largest allowed drift of sum(pmf) + tail_mass away from 1.
inline constexpr double kMassTolerance = 1e-9;

class BlocklengthDistribution {
 public:
  /// Builds a distribution from pmf[0..grid_max-1] (entry k is blocklength
  /// k + 1) and the tail mass. Drift within kMassTolerance is renormalized
  /// away; anything larger is rejected.
  BlocklengthDistribution(int grid_max, std::vector<double> pmf, double tail_mass)
      : grid_max_(grid_max), pmf_(std::move(pmf)), tail_(tail_mass) {
    if (grid_max_ < 1) throw DomainError("grid_max must be >= 1");
    if (pmf_.size() != static_cast<std::size_t>(grid_max_)) throw DomainError("pmf size must equal grid_max");
    if (!(tail_ >= 0.0 && tail_ <= 1.0 + kMassTolerance)) throw DomainError("tail mass outside [0, 1]");
    double total = tail_;
    for (double p : pmf_) {
      if (!(p >= 0.0)) throw DomainError("negative or NaN probability mass");
      total += p;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw DomainError("probability mass not conserved (total " + csv::number(total) + ")");
    }
    if (total != 1.0) {
      for (double& p : pmf_) p /= total;
      tail_ /= total;
    }
    tail_ = std::min(tail_, 1.0);
    build_cumulatives();
  }

  static BlocklengthDistribution point_mass(int grid_max, int m) {
    if (m < 1 || m > grid_max) throw DomainError("point mass outside grid");
    std::vector<double> pmf(static_cast<std::size_t>(grid_max), 0.0);
    pmf[static_cast<std::size_t>(m - 1)] = 1.0;
    return {grid_max, std::move(pmf), 0.0};
  }

  /// All mass unschedulable.
  static BlocklengthDistribution all_tail(int grid_max) {
    return {grid_max, std::vector<double>(static_cast<std::size_t>(grid_max), 0.0), 1.0};
  }

  int grid_max() const { return grid_max_; }
  double tail_mass() const { return tail_; }

  /// P(M = m); zero outside 1..grid_max.
  double pmf(int m) const {
    if (m < 1 || m > grid_max_) return 0.0;
    return pmf_[static_cast<std::size_t>(m - 1)];
  }

  /// P(M <= m).
  double cdf(int m) const {
    if (m < 1) return 0.0;
    return cdf_[static_cast<std::size_t>(std::min(m, grid_max_))];
  }

  /// P(M > m), including the tail.
  double survival(int m) const {
    if (m < 0) return 1.0;
    if (m >= grid_max_) return tail_;
    return survival_[static_cast<std::size_t>(m)];
  }

  /// pmf over 1..grid_max (element k is blocklength k + 1).
  std::span<const double> pmf_values() const { return pmf_; }

  /// Smallest and largest blocklength carrying nonzero mass; (1, 0) if none.
  int support_begin() const { return support_begin_; }
  int support_end() const { return support_end_; }

  /// m, pmf, cdf rows followed by a "tail" footer row.
  void write_csv(std::ostream& os) const {
    os << "m,pmf,cdf\n";
    for (int m = 1; m <= grid_max_; ++m) os << m << ',' << csv::number(pmf(m)) << ',' << csv::number(cdf(m)) << '\n';
    os << "tail," << csv::number(tail_) << ",1\n";
  }

 private:
  void build_cumulatives() {
    const auto n = static_cast<std::size_t>(grid_max_);
    cdf_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) cdf_[k + 1] = cdf_[k] + pmf_[k];
    // survival_[m] = P(M > m) for m = 0..grid_max, accumulated from the top.
    survival_.assign(n + 1, 0.0);
    survival_[n] = tail_;
    for (std::size_t k = n; k-- > 0;) survival_[k] = survival_[k + 1] + pmf_[k];

    support_begin_ = 1;
    support_end_ = 0;
    for (int m = 1; m <= grid_max_; ++m) {
      if (pmf_[static_cast<std::size_t>(m - 1)] > 0.0) {
        support_begin_ = m;
        break;
      }
    }
    for (int m = grid_max_; m >= 1; --m) {
      if (pmf_[static_cast<std::size_t>(m - 1)] > 0.0) {
        support_end_ = m;
        break;
      }
    }
  }

  int grid_max_;
  std::vector<double> pmf_;
  double tail_;
  std::vector<double> cdf_;
  std::vector<double> survival_;
  int support_begin_ = 1;
  int support_end_ = 0;
};

namespace detail {

inline void require_same_grid(const BlocklengthDistribution& a, const BlocklengthDistribution& b) {
  if (a.grid_max() != b.grid_max()) {
    throw GridMismatch("grid mismatch: " + std::to_string(a.grid_max()) + " vs " + std::to_string(b.grid_max()));
  }
}

// pmf from a decreasing sequence of threshold SNRs x_m (x_m = +inf where the
// blocklength is unreachable): F(m) = exp(-x_m / gamma_bar).
template <typename ThresholdFn>
BlocklengthDistribution from_snr_thresholds(double gamma_bar, int grid_max, ThresholdFn&& threshold) {
  std::vector<double> pmf(static_cast<std::size_t>(grid_max), 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= grid_max; ++m) {
    const double x = threshold(m);
    if (std::isinf(x)) continue;
    const double cdf = std::exp(-x / gamma_bar);
    double mass;
    if (std::isinf(prev)) {
      mass = cdf;
    } else {
      mass = -cdf * std::expm1(-(prev - x) / gamma_bar);
    }
    pmf[static_cast<std::size_t>(m - 1)] = std::max(mass, 0.0);
    prev = x;
  }
  const double tail = std::isinf(prev) ? 1.0 : -std::expm1(-prev / gamma_bar);
  return {grid_max, std::move(pmf), tail};
}

}  // namespace detail

/// Cost of one hop under Rayleigh fading in the finite-blocklength regime.
/// The integer cost is ceil(M*), so P(cost <= m) = P(gamma >= g^-1(m)).
inline BlocklengthDistribution single_hop_dist_fbl(const BlocklengthMap& map, double gamma_bar, int grid_max) {
  detail::require_positive(gamma_bar, "average SNR");
  if (grid_max < 1) throw DomainError("grid_max must be >= 1");
  return detail::from_snr_thresholds(gamma_bar, grid_max, [&](int m) {
    const double md = static_cast<double>(m);
    if (md <= map.infimum()) return std::numeric_limits<double>::infinity();
    return map.snr_for(md);
  });
}

inline BlocklengthDistribution single_hop_dist_fbl(double gamma_bar, double payload_bits, double eps_star,
                                                   int grid_max) {
  return single_hop_dist_fbl(BlocklengthMap(payload_bits, eps_star), gamma_bar, grid_max);
}

/// Cost of one hop under Rayleigh fading when coding at capacity:
/// F(m) = exp(-(2^(D/m) - 1) / gamma_bar).
inline BlocklengthDistribution single_hop_dist_ibl(double gamma_bar, double payload_bits, int grid_max) {
  detail::require_positive(gamma_bar, "average SNR");
  detail::require_positive(payload_bits, "payload");
  if (grid_max < 1) throw DomainError("grid_max must be >= 1");
  return detail::from_snr_thresholds(gamma_bar, grid_max, [&](int m) {
    return std::expm1(payload_bits * std::numbers::ln2 / static_cast<double>(m));
  });
}

enum class ConvolutionMethod { Auto, Direct, Fft };

/// Supports whose product exceeds this switch the Auto method to FFT.
inline constexpr double kFftWorkThreshold = 33554432.0;  // 2^25

/// Distribution of the sum of two independent costs. Sums beyond the grid
/// and any combination involving a tail land in the tail.
inline BlocklengthDistribution convolve(const BlocklengthDistribution& a, const BlocklengthDistribution& b,
                                        ConvolutionMethod method = ConvolutionMethod::Auto) {
  detail::require_same_grid(a, b);
  const int grid = a.grid_max();
  const auto pa = a.pmf_values();
  const auto pb = b.pmf_values();
  std::vector<double> pmf(static_cast<std::size_t>(grid), 0.0);

  const int a0 = a.support_begin(), a1 = a.support_end();
  const int b0 = b.support_begin(), b1 = b.support_end();
  const bool any_mass = a1 >= a0 && b1 >= b0;

  double overflow = 0.0;
  if (any_mass) {
    // Only the part of each support that can still land on the grid matters.
    const int a1c = std::min(a1, grid - b0);
    const int b1c = std::min(b1, grid - a0);
    if (a1c >= a0 && b1c >= b0) {
      const double work = double(a1c - a0 + 1) * double(b1c - b0 + 1);
      const bool use_fft = method == ConvolutionMethod::Fft ||
                           (method == ConvolutionMethod::Auto && work > kFftWorkThreshold);
      if (use_fft) {
        const auto sa = pa.subspan(static_cast<std::size_t>(a0 - 1), static_cast<std::size_t>(a1c - a0 + 1));
        const auto sb = pb.subspan(static_cast<std::size_t>(b0 - 1), static_cast<std::size_t>(b1c - b0 + 1));
        const auto conv = detail::fft_convolve(sa, sb);
        for (std::size_t i = 0; i < conv.size(); ++i) {
          const int m = a0 + b0 + static_cast<int>(i);
          if (m > grid) break;
          pmf[static_cast<std::size_t>(m - 1)] = conv[i];
        }
      } else {
        const int m_end = std::min(grid, a1c + b1c);
        for (int m = a0 + b0; m <= m_end; ++m) {
          const int k_lo = std::max(a0, m - b1c);
          const int k_hi = std::min(a1c, m - b0);
          double acc = 0.0;
          for (int k = k_lo; k <= k_hi; ++k) {
            acc += pa[static_cast<std::size_t>(k - 1)] * pb[static_cast<std::size_t>(m - k - 1)];
          }
          pmf[static_cast<std::size_t>(m - 1)] = acc;
        }
      }
    }

    // P(both on grid, sum > grid) = sum_k a[k] * P(b on grid, b > grid - k).
    // in_grid_above[j] = P(b on grid, b > j) for j = 0..grid.
    std::vector<double> in_grid_above(static_cast<std::size_t>(grid) + 1, 0.0);
    for (int j = grid - 1; j >= 0; --j) {
      in_grid_above[static_cast<std::size_t>(j)] =
          in_grid_above[static_cast<std::size_t>(j) + 1] + pb[static_cast<std::size_t>(j)];
    }
    for (int k = a0; k <= a1; ++k) {
      const int j = std::max(grid - k, 0);
      overflow += pa[static_cast<std::size_t>(k - 1)] * in_grid_above[static_cast<std::size_t>(j)];
    }
  }

  const double tail = a.tail_mass() + b.tail_mass() * (1.0 - a.tail_mass()) + overflow;
  return {grid, std::move(pmf), std::min(tail, 1.0)};
}

/// Distribution of the minimum of independent costs:
/// P(min = m) = sum_j prod_{s<j} S_s(m) * f_j(m) * prod_{s>j} S_s(m-1).
inline BlocklengthDistribution minimum_of(std::span<const BlocklengthDistribution> dists) {
  if (dists.empty()) throw DomainError("minimum of an empty set of distributions");
  const int grid = dists.front().grid_max();
  for (const auto& d : dists) detail::require_same_grid(dists.front(), d);
  if (dists.size() == 1) return dists.front();

  const std::size_t count = dists.size();
  std::vector<double> pmf(static_cast<std::size_t>(grid), 0.0);
  std::vector<double> suffix(count + 1);
  for (int m = 1; m <= grid; ++m) {
    suffix[count] = 1.0;
    for (std::size_t j = count; j-- > 0;) suffix[j] = suffix[j + 1] * dists[j].survival(m - 1);
    double prefix = 1.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      acc += prefix * dists[j].pmf(m) * suffix[j + 1];
      prefix *= dists[j].survival(m);
    }
    pmf[static_cast<std::size_t>(m - 1)] = acc;
  }
  double tail = 1.0;
  for (const auto& d : dists) tail *= d.tail_mass();
  return {grid, std::move(pmf), tail};
}

/// Minimum of two independent costs: F = 1 - (1 - F_a)(1 - F_b).
inline BlocklengthDistribution min_of(const BlocklengthDistribution& a, const BlocklengthDistribution& b) {
  detail::require_same_grid(a, b);
  const BlocklengthDistribution both[] = {a, b};
  return minimum_of(both);
}

/// Minimum of J i.i.d. copies of d: F = 1 - (1 - F_d)^J.
inline BlocklengthDistribution best_of_iid(const BlocklengthDistribution& d, int j) {
  if (j < 1) throw DomainError("best_of_iid requires J >= 1");
  if (j == 1) return d;
  const int grid = d.grid_max();
  std::vector<double> pmf(static_cast<std::size_t>(grid), 0.0);
  for (int m = 1; m <= grid; ++m) {
    const double f = d.pmf(m);
    if (f == 0.0) continue;
    // S(m-1)^J - S(m)^J = f * sum_k S(m-1)^k S(m)^(J-1-k)
    const double hi = d.survival(m - 1);
    const double lo = d.survival(m);
    double acc = 0.0;
    double hi_pow = 1.0;
    for (int k = 0; k < j; ++k) {
      acc += hi_pow * std::pow(lo, j - 1 - k);
      hi_pow *= hi;
    }
    pmf[static_cast<std::size_t>(m - 1)] = f * acc;
  }
  return {grid, std::move(pmf), std::pow(d.tail_mass(), j)};
}

}  // namespace fblper

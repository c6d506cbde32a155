#pragma once

// Scalar channel mathematics for a quasi-static complex AWGN link: capacity,
// dispersion, the Gaussian Q-function pair, the normal-approximation error
// probability, and the minimal blocklength map together with its inverse.
//
// All functions are pure.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fblper/errors.hpp"

namespace fblper {

inline constexpr double kLog2e = std::numbers::log2e;
inline constexpr double kLog2eSquared = kLog2e * kLog2e;

/// Instantaneous link SNR and the fading draw it was built from.
struct LinkSnr {
  double gamma = 0.0;
  double gamma_bar = 0.0;
  double z = 0.0;

  /// Rayleigh block fading: gamma = z * gamma_bar with z ~ Exp(1).
  static LinkSnr from_fading(double z, double gamma_bar) {
    if (!(z >= 0.0)) throw DomainError("fading gain must be >= 0");
    if (!(gamma_bar > 0.0)) throw DomainError("average SNR must be > 0");
    return LinkSnr{z * gamma_bar, gamma_bar, z};
  }
};

namespace detail {

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be finite and > 0");
}

inline void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0)) throw DomainError(std::string(what) + " must be >= 0");
}

// 1 - (1 + gamma)^-2 without cancellation at small gamma.
inline double dispersion_factor(double gamma) {
  // factored so that huge SNR does not overflow the square
  const double r = 1.0 / (1.0 + gamma);
  return (gamma * r) * ((2.0 + gamma) * r);
}

}  // namespace detail

/// log2(1 + gamma) in bits per channel use.
inline double shannon_capacity(double gamma) {
  detail::require_nonnegative(gamma, "SNR");
  return std::log1p(gamma) * kLog2e;
}

/// Dispersion of the complex Gaussian channel, (1 - (1+gamma)^-2) (log2 e)^2.
inline double channel_dispersion(double gamma) {
  detail::require_nonnegative(gamma, "SNR");
  if (std::isinf(gamma)) return kLog2eSquared;
  return detail::dispersion_factor(gamma) * kLog2eSquared;
}

/// Gaussian tail probability Q(w) = P(X > w), X ~ N(0, 1).
inline double q_func(double w) { return 0.5 * std::erfc(w / std::numbers::sqrt2); }

/// Inverse of q_func on (0, 1).
///
/// Acklam's rational approximation of the normal quantile (relative error
/// about 1.2e-9) followed by one Halley step against erfc, which brings the
/// round trip to machine precision.
inline double q_inv(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("q_inv requires 0 < eps < 1");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  // x approximates the lower-tail quantile Phi^-1(eps); Q^-1(eps) = -x.
  double x;
  if (eps < p_low) {
    const double q = std::sqrt(-2.0 * std::log(eps));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (eps <= 1.0 - p_low) {
    const double q = eps - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-eps));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley step on Phi(x) - eps. For the upper half the residual is formed
  // from the complementary side so it stays relative to 1 - eps.
  double e;
  if (eps <= 0.5) {
    e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - eps;
  } else {
    e = (1.0 - eps) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  }
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return -x;
}

/// Normal-approximation decoding error of D bits sent over M symbols at SNR gamma.
inline double fbl_error_prob(double gamma, double payload_bits, double blocklength) {
  detail::require_positive(gamma, "SNR");
  detail::require_positive(payload_bits, "payload");
  if (!(blocklength > 0.0)) throw DomainError("blocklength must be > 0");
  if (std::isinf(blocklength)) return 0.0;
  const double capacity = shannon_capacity(gamma);
  const double dispersion = channel_dispersion(gamma);
  return q_func((capacity - payload_bits / blocklength) / std::sqrt(dispersion / blocklength));
}

/// One evaluated operating point of the normal approximation.
struct FblPoint {
  double blocklength = 0.0;
  double rate = 0.0;
  double error = 0.0;
  double capacity = 0.0;
  double dispersion = 0.0;
};

inline FblPoint evaluate_fbl_point(double gamma, double payload_bits, double blocklength) {
  FblPoint p;
  p.blocklength = blocklength;
  p.rate = payload_bits / blocklength;
  p.error = fbl_error_prob(gamma, payload_bits, blocklength);
  p.capacity = shannon_capacity(gamma);
  p.dispersion = channel_dispersion(gamma);
  return p;
}

/// D / log2(1 + gamma): the cost of a packet when coding at capacity.
inline double ibl_min_blocklength(double gamma, double payload_bits) {
  detail::require_positive(gamma, "SNR");
  detail::require_positive(payload_bits, "payload");
  return payload_bits / shannon_capacity(gamma);
}

/// Minimal blocklength map gamma -> M*(gamma) for a fixed payload and target
/// error, with its inverse. Q^-1(eps*) is evaluated once at construction, so
/// callers that sweep gamma or m should hold on to one instance.
class BlocklengthMap {
 public:
  /// Search interval for the inverse map; the operational infimum of M* is
  /// the value at the upper end.
  static constexpr double kSnrLow = 1e-12;
  static constexpr double kSnrHigh = 1e12;

  BlocklengthMap(double payload_bits, double eps_star) : payload_bits_(payload_bits), eps_star_(eps_star) {
    detail::require_positive(payload_bits, "payload");
    if (!(eps_star > 0.0 && eps_star < 0.5)) throw DomainError("target error eps* must lie in (0, 0.5)");
    q_inv_eps_ = q_inv(eps_star);
    infimum_ = blocklength(kSnrHigh);
  }

  double payload_bits() const { return payload_bits_; }
  double eps_star() const { return eps_star_; }

  /// M* = (v/2 + sqrt(D/C + v^2/4))^2, the positive root of the quadratic in sqrt(M*).
  double blocklength(double gamma) const {
    detail::require_positive(gamma, "SNR");
    const double capacity = std::log1p(gamma) * kLog2e;
    const double v = q_inv_eps_ * kLog2e * std::sqrt(detail::dispersion_factor(gamma)) / capacity;
    const double root = 0.5 * v + std::sqrt(payload_bits_ / capacity + 0.25 * v * v);
    return root * root;
  }

  /// Smallest blocklength reachable inside the SNR search interval.
  double infimum() const { return infimum_; }

  /// gamma such that blocklength(gamma) == m.
  double snr_for(double m) const {
    if (!(m > 0.0)) throw DomainError("blocklength must be > 0");
    if (m <= infimum_) throw InfeasibleError("blocklength at or below the achievable infimum");
    if (std::isinf(m)) return 0.0;

    double lo = kSnrLow;
    while (blocklength(lo) < m) {
      lo *= 1e-6;
      if (lo < 1e-300) return lo;
    }
    double hi = kSnrHigh;
    // M* is strictly decreasing in gamma; bisect on log(gamma).
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo) * std::sqrt(hi);
      if (mid <= lo || mid >= hi) break;
      if (blocklength(mid) > m) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * lo) break;
    }
    return std::sqrt(lo) * std::sqrt(hi);
  }

 private:
  double payload_bits_;
  double eps_star_;
  double q_inv_eps_ = 0.0;
  double infimum_ = 0.0;
};

/// Blocklength that meets eps_star at SNR gamma with D payload bits.
inline double minimal_blocklength(double gamma, double payload_bits, double eps_star) {
  return BlocklengthMap(payload_bits, eps_star).blocklength(gamma);
}

/// Inverse of minimal_blocklength in gamma. Throws InfeasibleError when m
/// cannot be reached by any SNR in the search interval.
inline double snr_for_blocklength(double m, double payload_bits, double eps_star) {
  return BlocklengthMap(payload_bits, eps_star).snr_for(m);
}

}  // namespace fblper

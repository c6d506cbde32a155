#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

namespace fblper::detail {

// The FFTW planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Linear convolution of two real sequences via FFTW; result has size
/// a.size() + b.size() - 1. Negative round-off is clipped to zero.
inline std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  const std::size_t bins = n / 2 + 1;

  double* in_a = fftw_alloc_real(n);
  double* in_b = fftw_alloc_real(n);
  fftw_complex* spec_a = fftw_alloc_complex(bins);
  fftw_complex* spec_b = fftw_alloc_complex(bins);

  fftw_plan fwd_a, fwd_b, inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_a, spec_a, FFTW_ESTIMATE);
    fwd_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_b, spec_b, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_a, in_a, FFTW_ESTIMATE);
  }

  std::fill(in_a, in_a + n, 0.0);
  std::fill(in_b, in_b + n, 0.0);
  std::copy(a.begin(), a.end(), in_a);
  std::copy(b.begin(), b.end(), in_b);
  fftw_execute(fwd_a);
  fftw_execute(fwd_b);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = spec_a[k][0] * spec_b[k][0] - spec_a[k][1] * spec_b[k][1];
    const double im = spec_a[k][0] * spec_b[k][1] + spec_a[k][1] * spec_b[k][0];
    spec_a[k][0] = re;
    spec_a[k][1] = im;
  }
  fftw_execute(inv);

  std::vector<double> out(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = std::max(0.0, in_a[i] * scale);

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_a);
    fftw_destroy_plan(fwd_b);
    fftw_destroy_plan(inv);
  }
  fftw_free(in_a);
  fftw_free(in_b);
  fftw_free(spec_a);
  fftw_free(spec_b);
  return out;
}

}  // namespace fblper::detail

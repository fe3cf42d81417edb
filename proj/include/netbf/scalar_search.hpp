#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace netbf {

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
};

/// Multistart maximizer of a 1-D function on [lo, hi].
///
/// A coarse grid (plus caller-supplied seeds) locates candidate peaks; each
/// of the best few is polished with Brent's method inside its neighbouring
/// grid cell, and the winner is refined by bisection on the sign of a
/// central-difference derivative. Handles functions with several stationary
/// points as long as the coarse grid separates them.
template <class F>
ScalarMax maximize_scalar(F&& f, double lo, double hi, std::span<const double> seeds = {},
                          int coarse_cells = 32, int polished_peaks = 3) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(coarse_cells) + 1 + seeds.size());
  for (int k = 0; k <= coarse_cells; ++k) xs.push_back(lo + (hi - lo) * k / coarse_cells);
  for (double s : seeds)
    if (std::isfinite(s)) xs.push_back(std::clamp(s, lo, hi));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<double> fs(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) fs[k] = f(xs[k]);

  std::vector<std::size_t> peaks;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const bool left_ok = k == 0 || fs[k] >= fs[k - 1];
    const bool right_ok = k + 1 == xs.size() || fs[k] >= fs[k + 1];
    if (left_ok && right_ok) peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t l, std::size_t r) { return fs[l] > fs[r]; });
  if (peaks.size() > static_cast<std::size_t>(polished_peaks)) peaks.resize(static_cast<std::size_t>(polished_peaks));

  ScalarMax best{xs[peaks.front()], fs[peaks.front()]};
  auto neg = [&](double x) { return -f(x); };
  for (std::size_t k : peaks) {
    const double a = xs[k == 0 ? 0 : k - 1];
    const double b = xs[k + 1 == xs.size() ? k : k + 1];
    if (b <= a) continue;
    std::uintmax_t iters = 200;
    const auto [x, nv] = boost::math::tools::brent_find_minima(neg, a, b, 40, iters);
    if (-nv > best.value) best = {x, -nv};
  }

  // Brent stalls near sqrt(machine eps) in x on a flat peak; the derivative
  // sign pins it down further.
  auto slope = [&](double x) {
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const double l = std::max(lo, x - h);
    const double r = std::min(hi, x + h);
    return (f(r) - f(l)) / (r - l);
  };
  double w = 1e-6;
  double left = std::max(lo, best.x - w);
  double right = std::min(hi, best.x + w);
  if (left < right && slope(left) > 0.0 && slope(right) < 0.0) {
    for (int it = 0; it < 40 && right - left > 1e-12; ++it) {
      const double mid = 0.5 * (left + right);
      (slope(mid) > 0.0 ? left : right) = mid;
    }
    const double x = 0.5 * (left + right);
    const double v = f(x);
    if (v >= best.value) best = {x, v};
  }
  return best;
}

template <class F>
ScalarMax maximize_scalar(F&& f, double lo, double hi, std::initializer_list<double> seeds) {
  return maximize_scalar(std::forward<F>(f), lo, hi, std::span<const double>(seeds.begin(), seeds.size()));
}

}  // namespace netbf

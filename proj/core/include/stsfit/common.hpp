#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace stsfit {

/// n equally spaced values covering [lo, hi] inclusive; n == 1 yields {lo}.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) throw std::invalid_argument("linspace: n must be >= 1");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

/// x reduced into [0, m); m > 0.
inline double positive_mod(double x, double m) {
  double r = std::fmod(x, m);
  if (r < 0.0) r += m;
  return r;
}

/// Angle reduced into (-pi, pi].
inline double wrap_to_pi(double angle) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  double a = std::fmod(angle + two_pi * 0.5, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - two_pi * 0.5;
}

/// p-th percentile (p in [0,100]) with linear interpolation between order
/// statistics. The input is copied and sorted.
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile: p outside [0,100]");
  std::sort(values.begin(), values.end());
  const double h = (p / 100.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  if (lo == hi) return values[lo];
  const double frac = h - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

inline double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

inline double mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

}  // namespace stsfit

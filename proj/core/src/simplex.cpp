#include "stsfit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stsfit {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

SimplexResult nelder_mead(const Objective& objective, std::span<const double> x0,
                          std::span<const double> step, const SimplexOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty parameter vector");
  if (step.size() != n) throw std::invalid_argument("nelder_mead: step size mismatch");
  for (double s : step)
    if (!(std::abs(s) > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("nelder_mead: steps must be finite and nonzero");

  SimplexResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    return objective(x);
  };

  // n+1 vertices: x0 and x0 offset along each axis by its step.
  std::vector<std::vector<double>> verts(n + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t k = 0; k < n; ++k) verts[k + 1][k] += step[k];
  std::vector<double> f(n + 1);
  for (std::size_t v = 0; v <= n; ++v) f[v] = eval(verts[v]);
  if (!std::isfinite(f[0]))
    throw std::invalid_argument("nelder_mead: objective not finite at start point");
  const double loss_scale = std::abs(f[0]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[n - 1];

    // Convergence in initial-step units plus relative loss spread.
    double diameter = 0.0;
    for (std::size_t v = 0; v <= n; ++v)
      for (std::size_t k = 0; k < n; ++k)
        diameter = std::max(diameter, std::abs(verts[v][k] - verts[best][k]) / std::abs(step[k]));
    // The absolute term keeps the spread test satisfiable when the loss
    // collapses toward an exact zero (noiseless fits).
    const double spread = std::abs(f[worst] - f[best]);
    const double floor = std::abs(f[best]) * options.loss_spread_tol + 1e-12 * loss_scale +
                         std::numeric_limits<double>::denorm_min();
    if (diameter < options.diameter_tol && spread <= floor) {
      result.converged = true;
      break;
    }

    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t v = 0; v <= n; ++v)
        if (v != worst) s += verts[v][k];
      centroid[k] = s / static_cast<double>(n);
    }

    for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + kReflect * (centroid[k] - verts[worst][k]);
    const double fr = eval(xr);

    if (fr < f[best]) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + kExpand * (xr[k] - centroid[k]);
      const double fe = eval(xe);
      if (fe < fr) {
        verts[worst] = xe;
        f[worst] = fe;
      } else {
        verts[worst] = xr;
        f[worst] = fr;
      }
      continue;
    }
    if (fr < f[second_worst]) {
      verts[worst] = xr;
      f[worst] = fr;
      continue;
    }

    const bool outside = fr < f[worst];
    if (outside) {
      for (std::size_t k = 0; k < n; ++k) xc[k] = centroid[k] + kContract * (xr[k] - centroid[k]);
    } else {
      for (std::size_t k = 0; k < n; ++k)
        xc[k] = centroid[k] + kContract * (verts[worst][k] - centroid[k]);
    }
    const double fc = eval(xc);
    if (fc < std::min(fr, f[worst])) {
      verts[worst] = xc;
      f[worst] = fc;
      continue;
    }

    for (std::size_t v = 0; v <= n; ++v) {
      if (v == best) continue;
      for (std::size_t k = 0; k < n; ++k)
        verts[v][k] = verts[best][k] + kShrink * (verts[v][k] - verts[best][k]);
      f[v] = eval(verts[v]);
    }
  }

  std::size_t best = 0;
  for (std::size_t v = 1; v <= n; ++v)
    if (f[v] < f[best]) best = v;
  result.x = verts[best];
  result.loss = f[best];
  return result;
}

}  // namespace stsfit

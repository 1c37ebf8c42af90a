#pragma once

#include <functional>
#include <span>
#include <vector>

namespace stsfit {

struct SimplexOptions {
  /// Convergence: simplex diameter below diameter_tol in units of the
  /// per-parameter initial step, AND loss spread below loss_spread_tol
  /// relative to the best loss.
  double diameter_tol = 1e-6;
  double loss_spread_tol = 1e-4;
  int max_iterations = 2000;
};

struct SimplexResult {
  std::vector<double> x;
  double loss = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  ///< false when the iteration cap was hit
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead downhill simplex with the standard coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
/// `step` sets the initial simplex offsets per parameter and the scale in
/// which the diameter tolerance is measured. The best vertex ever seen is
/// returned, so the result never exceeds the loss at x0.
SimplexResult nelder_mead(const Objective& objective, std::span<const double> x0,
                          std::span<const double> step, const SimplexOptions& options = {});

}  // namespace stsfit

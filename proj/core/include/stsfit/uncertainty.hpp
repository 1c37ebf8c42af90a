#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stsfit/fullfit.hpp"

namespace stsfit {

using Matrix6 = std::array<std::array<double, kNumParams>, kNumParams>;
using Vector6 = std::array<double, kNumParams>;

/// Noise-variance estimate (sigma^2)* = chi^2 / (N - M).
/// Throws std::invalid_argument when N <= M.
double estimate_sigma2(std::span<const double> residuals_hz, std::size_t n_params);

struct GradHess {
  Vector6 gradient{};
  Matrix6 hessian{};
  /// True when the branch-selection condition flips inside the finite
  /// difference stencil; the model is non-differentiable there and the point
  /// must be excluded from the Fisher sum.
  bool branch_discontinuity = false;
};

/// Central finite differences of the model frequency mu(I, w) in all six
/// parameters (relative step 1e-6 with absolute floors of 1 Hz, 1e-9 A and
/// 1e-8 for d).
GradHess model_gradient_hessian(const HamiltonianParams& params, double i_a,
                                double probe_span_hz);

struct FisherResult {
  Matrix6 fisher{};               ///< sum_i grad mu_i grad mu_i^T / sigma^2
  Matrix6 fisher_hessian_form{};  ///< sum_i [H(mu_i^2) - 2 mu_i H(mu_i)] / (2 sigma^2)
  double cross_check_rel_err = 0.0;  ///< Frobenius distance between the two forms
  std::size_t excluded_points = 0;   ///< stencils dropped at branch switches
};

/// Fisher information at the given parameters, computed by two algebraically
/// identical routes that are cross-checked against each other.
FisherResult fisher_matrix(const ExtractedSpectrum& spectrum, const HamiltonianParams& params,
                           double sigma2_hz2, double probe_span_hz);

struct CrlbResult {
  Vector6 sd{};  ///< sqrt(diag(fisher^-1)); +inf where unbounded
  std::array<bool, kNumParams> unbounded{};
  std::size_t floored_directions = 0;  ///< eigen-directions below 1e-14 * lambda_max
};

/// Cramer-Rao lower bounds from the (pseudo-)inverse of the Fisher matrix.
/// Near-singular directions are floored instead of failing; parameters with
/// weight in a floored direction are flagged unbounded.
CrlbResult crlb(const Matrix6& fisher);

struct EigenPair {
  double value = 0.0;
  Vector6 vector{};
};

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending,
/// eigenvectors unit norm with the largest-magnitude component positive.
std::vector<EigenPair> hessian_pca(const Matrix6& matrix);

/// Rescales a Fisher/Hessian matrix from SI units to display units
/// (GHz for frequencies, uA for currents). The principal-component structure
/// is only meaningful on comparable scales.
Matrix6 to_display_units(const Matrix6& fisher_si);

struct UncertaintyReport {
  double sigma2_hz2 = 0.0;
  FisherResult fisher;
  CrlbResult crlb;
  std::vector<EigenPair> eigenpairs;  ///< PCA of the display-unit Fisher matrix
};

/// Full confidence analysis at the fitted optimum: sigma^2 from the fit
/// residuals, Fisher matrix, CRLB vector and Hessian PCA.
UncertaintyReport uncertainty_report(const ExtractedSpectrum& spectrum, const FitOutcome& fit,
                                     double probe_span_hz);

/// Same analysis evaluated at externally known parameters (synthetic truth).
UncertaintyReport uncertainty_report_at(const ExtractedSpectrum& spectrum,
                                        const HamiltonianParams& params, double sigma2_hz2,
                                        double probe_span_hz);

}  // namespace stsfit

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "stsfit/heatmap.hpp"

namespace stsfit {

struct CircleFit {
  std::complex<double> center;
  double radius = 0.0;
  double rms_residual = 0.0;  ///< rms radial deviation of the points
};

/// Algebraic least-squares circle (Taubin normalization, Newton root).
/// Throws std::invalid_argument for < 3 points or degenerate (collinear,
/// coincident) input.
CircleFit fit_circle(std::span<const std::complex<double>> points);

struct PhaseFit {
  double theta0_rad = 0.0;
  double q_loaded = 0.0;
  double f_r_hz = 0.0;
  double rms_residual_rad = 0.0;
  bool converged = false;
};

/// Least-squares fit of theta(f) = theta0 + 2 atan(2 Q_l (1 - f/f_r)) to
/// unwrapped circle-centered angles. Non-convergence is flagged when the rms
/// angle residual exceeds residual_bound_rad.
PhaseFit fit_phase(std::span<const double> freqs_hz, std::span<const double> angles_rad,
                   double residual_bound_rad = 1.0);

/// Cable delay estimate: linear fit to the unwrapped phase over the outer 20%
/// of points at each wing, refined by 1-D minimization of the circle-fit
/// residual over tau. Best effort; bad estimates surface downstream as a
/// non-converged slice fit.
double estimate_delay(std::span<const double> freqs_hz,
                      std::span<const std::complex<double>> s21);

/// In-place +-pi jump correction along ascending frequency.
void unwrap_phases(std::span<double> phases_rad);

/// Noise scale of an amplitude trace: median absolute deviation of the
/// first differences, scaled to the SD of a single sample.
double robust_noise_sd(std::span<const double> amplitudes);

/// Peak-to-peak contrast of the 5-point median-filtered amplitude trace.
/// The median filter keeps dips wider than a couple of samples while
/// suppressing single-sample noise extremes.
double dip_contrast(std::span<const double> amplitudes);

struct NotchFitResult {
  double f_r_hz = 0.0;
  double q_loaded = 0.0;
  double q_ext_mag = 0.0;
  double q_ext_phase_rad = 0.0;
  double amplitude_a = 0.0;
  double alpha_rad = 0.0;
  double tau_s = 0.0;
  double rms_residual = 0.0;  ///< rms complex misfit of the full model
  bool converged = false;
};

struct SliceFitConfig {
  double threshold_k = 5.0;     ///< dip-presence threshold in noise-SD units
  double rms_rel_bound = 0.5;   ///< converged requires rms_residual <= bound * a
  double phase_residual_bound_rad = 1.0;
};

/// Full per-slice pipeline: delay estimate -> de-rotation -> circle fit ->
/// phase fit -> off-resonant-point extraction of (a, alpha) and |Q_e'|.
/// Never throws for data reasons; failures return converged = false so batch
/// extraction continues.
NotchFitResult fit_notch_slice(std::span<const double> freqs_hz,
                               std::span<const std::complex<double>> s21,
                               const SliceFitConfig& cfg = {});

enum class ExclusionReason { below_threshold, fit_failed, too_few_points };

struct SpectrumPoint {
  std::size_t index;   ///< row in the heatmap current grid
  double current_a;
  double f_r_hz;
};

struct ExcludedSlice {
  std::size_t index;
  ExclusionReason reason;
};

struct ExtractedSpectrum {
  std::vector<SpectrumPoint> points;    ///< accepted slices, sorted by current
  std::vector<ExcludedSlice> excluded;  ///< every other slice, with reason
  double mean_f_r_hz = 0.0;             ///< arithmetic mean over accepted points
  double current_step_a = 0.0;
  std::vector<NotchFitResult> slice_fits;  ///< per input slice, aligned to the grid
};

struct ExtractConfig {
  SliceFitConfig slice;
  int workers = 0;
};

/// Extracts f_r(I) from every heatmap slice. Slices failing the dip-presence
/// threshold are excluded up front; slice fits that do not converge are
/// excluded afterwards. Throws EmptySpectrumError when fewer than 8 slices
/// are accepted.
ExtractedSpectrum extract_spectrum(const StsHeatmap& map, const ExtractConfig& cfg = {});

}  // namespace stsfit

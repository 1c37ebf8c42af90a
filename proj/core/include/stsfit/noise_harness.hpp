#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stsfit/pipeline.hpp"

namespace stsfit {

/// Returns a copy of the heatmap with complex Gaussian noise
/// (xi1 + i xi2)/sqrt(2), xi ~ N(0, sigma1), added to every cell.
/// Deterministic for a fixed seed; the input is not modified.
StsHeatmap add_noise(const StsHeatmap& map, double sigma1, std::uint64_t seed);

/// Resonance-circle radius and pre-existing noise scale estimated from the
/// data: the median analytic circle radius over converged slice fits, and
/// the median per-slice amplitude noise rescaled to the complex-noise SD.
struct SnrScale {
  double circle_radius = 0.0;
  double sigma0 = 0.0;
};
SnrScale estimate_snr_scale(const StsHeatmap& map, const ExtractConfig& cfg = {});

struct SweepConfig {
  std::vector<double> sigma1_levels;
  std::size_t reps = 50;
  std::uint64_t base_seed = 1;
  double sigma0 = 0.0;         ///< SD of the noise already present in the map
  double circle_radius = 0.0;  ///< signal amplitude for the SNR scale
  AnalysisConfig analysis;
  int workers = 0;
  bool keep_samples = false;  ///< retain raw per-run parameter samples
};

struct ParamStats {
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};

struct SnrSweepResult {
  std::vector<double> snr_levels;  ///< aligned to sigma1_levels
  std::vector<double> sigma1_levels;
  /// per parameter (fit order), per level
  std::array<std::vector<ParamStats>, kNumParams> per_param;
  std::vector<std::size_t> divergences;  ///< failed runs per level
  std::size_t reps = 0;
  /// raw[param][level] -> successful samples in rep order (keep_samples only)
  std::array<std::vector<std::vector<double>>, kNumParams> raw;
};

/// Fig.-6-style stress test: for every added-noise level run the full
/// pipeline `reps` times with independent seeds, recording parameter
/// percentiles and divergence counts. A run counts as divergent when any
/// stage throws or the fitted f_ge_max leaves the brute-grid range.
/// Reproducible: run seeds derive from (base_seed, level, rep).
SnrSweepResult snr_sweep(const StsHeatmap& map, const SweepConfig& cfg);

}  // namespace stsfit

#pragma once

#include <optional>

#include "stsfit/fullfit.hpp"
#include "stsfit/heatmap.hpp"
#include "stsfit/period.hpp"
#include "stsfit/resonator.hpp"
#include "stsfit/uncertainty.hpp"

namespace stsfit {

struct AnalysisConfig {
  ExtractConfig extract;
  PeriodPhaseConfig period;
  FitConfig fit;
  /// Also evaluate the Fisher analysis at the generating parameters when the
  /// heatmap metadata carries a synthetic ground truth.
  bool uncertainty_at_truth = false;
  /// Overrides the per-stage worker counts when nonzero.
  int workers = 0;
};

struct StageTimings {
  double extract_s = 0.0;
  double period_s = 0.0;
  double brute_s = 0.0;
  double polish_s = 0.0;
  double total_s = 0.0;
};

struct AnalysisResult {
  ExtractedSpectrum spectrum;
  PeriodPhaseEstimate period;
  FitOutcome fit;
  UncertaintyReport uncertainty;
  std::optional<UncertaintyReport> uncertainty_at_truth;
  StageTimings timings;
};

/// End-to-end analysis: extract f_r(I) -> period and sweet spot -> full
/// six-parameter fit -> Fisher/CRLB report.
AnalysisResult analyze(const StsHeatmap& map, const AnalysisConfig& cfg = {});

/// Ground truth embedded in synthetic heatmap metadata, if any.
std::optional<HamiltonianParams> truth_from_meta(const StsHeatmap& map);

}  // namespace stsfit

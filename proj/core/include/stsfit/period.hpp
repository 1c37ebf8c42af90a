#pragma once

#include <cstddef>
#include <vector>

#include "stsfit/resonator.hpp"

namespace stsfit {

/// f_r - <f_r> on the full uniform current grid, with zeros filled in at
/// excluded indices so correlation lags stay aligned to the current step.
struct StandardizedTrace {
  std::vector<double> values_hz;
  double current_step_a = 0.0;
  double current_start_a = 0.0;  ///< current of grid index 0
  std::size_t n_filled = 0;      ///< number of zero-padded entries
};

StandardizedTrace standardize(const ExtractedSpectrum& spectrum, std::size_t grid_length);

struct PeriodSearch {
  double period_a = 0.0;       ///< refined peak position, in current units
  std::size_t peak_lag = 0;    ///< integer lag of the winning local maximum
  std::vector<double> autocorr;  ///< R(l) for l in [0, N), for diagnostics
};

/// Period from the zero-padded autocorrelation R(l) = sum_n y_n y_{n-l}:
/// the highest strictly-local maximum at lag >= min_lag, refined sub-sample
/// by parabolic interpolation of the (N-l)-normalized peak. Throws
/// NoPeriodError when no positive local maximum exists.
PeriodSearch autocorrelation_period(const StandardizedTrace& trace, std::size_t min_lag = 3);

/// Square wave with levels +1 on [phi, phi + duty * period) mod period and
/// -1 elsewhere.
int square_wave(double i_a, double period_a, double phi_a, double duty);

struct SquareWaveFit {
  double phi_a = 0.0;
  double duty = 0.0;
  std::vector<double> loss_grid;  ///< 50x50, row-major over (phi, duty)
};

/// Brute-force maximum of the zero-lag correlation between the trace and a
/// square wave on a 50x50 (phi, duty) grid, phi in [-period/2, period/2),
/// duty in [0, 1]. Ties take the smallest grid index.
SquareWaveFit fit_square_wave(const StandardizedTrace& trace, double period_a);

enum class Pattern { anticrossing, continuous, ambiguous };

struct ClassifyConfig {
  double anticrossing_ratio = 0.5;  ///< jump/peak-to-peak above this: anticrossing
  double continuous_ratio = 0.25;   ///< below this: continuous
};

/// Heuristic on the ratio of the largest consecutive frequency jump to the
/// peak-to-peak amplitude; in between the two thresholds the pattern is
/// ambiguous and both sweet-spot formulas are tried downstream.
Pattern classify_pattern(const ExtractedSpectrum& spectrum, const ClassifyConfig& cfg = {});

/// Sweet-spot candidates: phi + period*(1+duty)/2 for anticrossing patterns,
/// phi + period*duty/2 for continuous ones, both for ambiguous. Candidates
/// are reduced mod period into [range_lo, range_lo + period).
std::vector<double> sweet_spot(double phi_a, double duty, double period_a, Pattern pattern,
                               double range_lo_a);

struct PeriodPhaseEstimate {
  double period_a = 0.0;
  double phi_a = 0.0;
  double duty = 0.0;
  Pattern pattern = Pattern::ambiguous;
  std::vector<double> i_ss_candidates_a;
};

struct PeriodPhaseConfig {
  std::size_t min_lag = 3;
  ClassifyConfig classify;
};

/// Composition: standardize -> autocorrelation period -> square-wave phase ->
/// pattern classification -> sweet-spot candidates.
PeriodPhaseEstimate estimate_period_phase(const ExtractedSpectrum& spectrum,
                                          std::size_t grid_length,
                                          const PeriodPhaseConfig& cfg = {});

}  // namespace stsfit

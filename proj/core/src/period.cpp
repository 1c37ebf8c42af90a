#include "stsfit/period.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stsfit/common.hpp"
#include "stsfit/errors.hpp"

namespace stsfit {

StandardizedTrace standardize(const ExtractedSpectrum& spectrum, std::size_t grid_length) {
  if (spectrum.points.empty()) throw std::invalid_argument("standardize: empty spectrum");
  StandardizedTrace trace;
  trace.values_hz.assign(grid_length, 0.0);
  trace.current_step_a = spectrum.current_step_a;
  const auto& first = spectrum.points.front();
  trace.current_start_a = first.current_a - static_cast<double>(first.index) * spectrum.current_step_a;
  for (const auto& p : spectrum.points) {
    if (p.index >= grid_length) throw std::invalid_argument("standardize: point index out of grid");
    trace.values_hz[p.index] = p.f_r_hz - spectrum.mean_f_r_hz;
  }
  trace.n_filled = grid_length - spectrum.points.size();
  return trace;
}

PeriodSearch autocorrelation_period(const StandardizedTrace& trace, std::size_t min_lag) {
  const auto& y = trace.values_hz;
  const std::size_t n = y.size();
  if (n < 4) throw NoPeriodError("autocorrelation_period: trace too short");

  PeriodSearch search;
  search.autocorr.resize(n);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double s = 0.0;
    for (std::size_t i = lag; i < n; ++i) s += y[i] * y[i - lag];
    search.autocorr[lag] = s;
  }

  const auto& r = search.autocorr;
  std::size_t best = 0;
  bool found = false;
  for (std::size_t lag = std::max<std::size_t>(min_lag, 1); lag + 1 < n; ++lag) {
    const bool local_max = r[lag] > r[lag - 1] && r[lag] >= r[lag + 1];
    if (local_max && r[lag] > 0.0 && (!found || r[lag] > r[best])) {
      best = lag;
      found = true;
    }
  }
  if (!found)
    throw NoPeriodError("autocorrelation_period: no positive local maximum (need >= 1.5 periods)");

  search.peak_lag = best;

  // Sub-sample refinement on the (n - lag)-normalized autocorrelation; the
  // normalization removes the linear zero-padding decay that would otherwise
  // bias the parabola vertex. A peak that already reaches the full trace
  // power marks an exactly integer period and is left untouched.
  auto norm = [&](std::size_t lag) {
    return r[lag] / static_cast<double>(n - lag);
  };
  const double power = r[0] / static_cast<double>(n);
  double offset = 0.0;
  if (best + 1 < n && best >= 1 && std::abs(norm(best) - power) > 1e-9 * power) {
    const double lo = norm(best - 1), mid = norm(best), hi = norm(best + 1);
    const double denom = lo - 2.0 * mid + hi;
    if (denom != 0.0) offset = std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
  }
  search.period_a = (static_cast<double>(best) + offset) * trace.current_step_a;
  return search;
}

int square_wave(double i_a, double period_a, double phi_a, double duty) {
  if (!(duty >= 0.0 && duty <= 1.0)) throw std::invalid_argument("square_wave: duty outside [0,1]");
  if (!(period_a > 0.0)) throw std::invalid_argument("square_wave: period must be positive");
  return positive_mod(i_a - phi_a, period_a) < duty * period_a ? 1 : -1;
}

SquareWaveFit fit_square_wave(const StandardizedTrace& trace, double period_a) {
  if (!(period_a > 0.0)) throw std::invalid_argument("fit_square_wave: period must be positive");
  constexpr std::size_t kGrid = 50;
  SquareWaveFit fit;
  fit.loss_grid.resize(kGrid * kGrid);

  const std::size_t n = trace.values_hz.size();
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t j = 0; j < kGrid; ++j) {
    const double phi = -0.5 * period_a + period_a * static_cast<double>(j) / kGrid;
    for (std::size_t k = 0; k < kGrid; ++k) {
      const double duty = static_cast<double>(k) / (kGrid - 1);
      double corr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double current = trace.current_start_a + static_cast<double>(i) * trace.current_step_a;
        corr += trace.values_hz[i] * square_wave(current, period_a, phi, duty);
      }
      const double loss = -corr;
      const std::size_t flat = j * kGrid + k;
      fit.loss_grid[flat] = loss;
      if (loss < best_loss) {
        best_loss = loss;
        best_index = flat;
      }
    }
  }
  fit.phi_a = -0.5 * period_a + period_a * static_cast<double>(best_index / kGrid) / kGrid;
  fit.duty = static_cast<double>(best_index % kGrid) / (kGrid - 1);
  return fit;
}

Pattern classify_pattern(const ExtractedSpectrum& spectrum, const ClassifyConfig& cfg) {
  const auto& pts = spectrum.points;
  if (pts.size() < 2) throw std::invalid_argument("classify_pattern: need >= 2 points");
  double jump = 0.0;
  double lo = pts.front().f_r_hz, hi = lo;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) jump = std::max(jump, std::abs(pts[i].f_r_hz - pts[i - 1].f_r_hz));
    lo = std::min(lo, pts[i].f_r_hz);
    hi = std::max(hi, pts[i].f_r_hz);
  }
  const double p2p = hi - lo;
  if (p2p == 0.0) return Pattern::continuous;
  const double ratio = jump / p2p;
  if (ratio > cfg.anticrossing_ratio) return Pattern::anticrossing;
  if (ratio < cfg.continuous_ratio) return Pattern::continuous;
  return Pattern::ambiguous;
}

std::vector<double> sweet_spot(double phi_a, double duty, double period_a, Pattern pattern,
                               double range_lo_a) {
  auto reduce = [&](double c) { return range_lo_a + positive_mod(c - range_lo_a, period_a); };
  std::vector<double> candidates;
  if (pattern == Pattern::anticrossing || pattern == Pattern::ambiguous)
    candidates.push_back(reduce(phi_a + period_a * (1.0 + duty) / 2.0));
  if (pattern == Pattern::continuous || pattern == Pattern::ambiguous)
    candidates.push_back(reduce(phi_a + period_a * duty / 2.0));
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

PeriodPhaseEstimate estimate_period_phase(const ExtractedSpectrum& spectrum,
                                          std::size_t grid_length,
                                          const PeriodPhaseConfig& cfg) {
  const StandardizedTrace trace = standardize(spectrum, grid_length);
  const PeriodSearch search = autocorrelation_period(trace, cfg.min_lag);
  const SquareWaveFit wave = fit_square_wave(trace, search.period_a);

  PeriodPhaseEstimate estimate;
  estimate.period_a = search.period_a;
  estimate.phi_a = wave.phi_a;
  estimate.duty = wave.duty;
  estimate.pattern = classify_pattern(spectrum, cfg.classify);
  estimate.i_ss_candidates_a = sweet_spot(wave.phi_a, wave.duty, search.period_a,
                                          estimate.pattern, trace.current_start_a);
  return estimate;
}

}  // namespace stsfit

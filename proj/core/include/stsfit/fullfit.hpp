#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "stsfit/period.hpp"
#include "stsfit/physics.hpp"
#include "stsfit/resonator.hpp"
#include "stsfit/simplex.hpp"

namespace stsfit {

/// Fixed order of the fit parameters in every 6-vector / 6x6 matrix:
/// (f_c, g, period, i_ss, f_ge_max, d).
inline constexpr std::size_t kNumParams = 6;

std::array<double, kNumParams> to_param_array(const HamiltonianParams& p);
HamiltonianParams params_from_array(const std::array<double, kNumParams>& a);
const std::array<const char*, kNumParams>& param_names();

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 1;  ///< number of grid values, inclusive of both ends
};

/// Brute-force grid over the four non-period parameters. f_c defaults to
/// <f_r> +- 1 MHz when not overridden.
struct BruteGridSpec {
  std::optional<AxisSpec> f_c_hz;
  AxisSpec g_hz{20e6, 40e6, 5};
  AxisSpec f_ge_max_hz{4e9, 12e9, 80};
  AxisSpec d{0.0, 0.9, 9};
};

/// L = sum_i [f_r,i - M(I_i)]^2 over the accepted spectrum points, in Hz^2.
double loss(const ExtractedSpectrum& spectrum, const HamiltonianParams& params,
            double probe_span_hz);

/// Grid minimum of the loss with (period, i_ss) held fixed. Deterministic:
/// ties resolve to the lexicographically smallest (f_c, g, f_ge_max, d) index.
HamiltonianParams brute_search(const ExtractedSpectrum& spectrum, const BruteGridSpec& grid,
                               double period_a, double i_ss_a, double probe_span_hz,
                               int workers = 0, std::size_t* n_evaluations = nullptr);

enum class QubitHint { above, below, auto_detect };

struct NelderMeadConfig {
  SimplexOptions options;
  int restarts = 2;             ///< re-runs from the optimum with a shrunk simplex
  double restart_shrink = 1e-3;
};

struct FitConfig {
  BruteGridSpec grid;
  NelderMeadConfig nm;
  QubitHint hint = QubitHint::auto_detect;
  double alternate_loss_ratio = 1.2;  ///< near-tie bound for reporting alternates
  /// The square-wave sweet spot is quantized to ~period/50; near avoided
  /// crossings the loss basin in i_ss is far narrower than that, so the brute
  /// stage additionally scans a short i_ss sub-grid around each candidate.
  std::size_t i_ss_scan_points = 15;
  double i_ss_scan_halfwidth_frac = 1.0 / 60.0;  ///< half width as fraction of the period
  int workers = 0;
};

struct ResidualPoint {
  double current_a;
  double residual_hz;  ///< f_r,i - M(I_i) at the fitted parameters
  Branch branch;
};

struct FitOutcome {
  HamiltonianParams params;
  double loss_sum_hz2 = 0.0;
  double rms_per_point_hz = 0.0;  ///< sqrt(loss / N)
  std::vector<ResidualPoint> residuals;
  QubitHint hint_used = QubitHint::auto_detect;
  double i_ss_seed_a = 0.0;  ///< sweet-spot candidate this outcome started from
  bool nm_converged = true;
  std::vector<FitOutcome> alternates;  ///< near-tie outcomes, best first
  double brute_s = 0.0;
  double polish_s = 0.0;
};

/// Brute search plus Nelder-Mead polish over all six parameters, run for
/// every sweet-spot candidate; in auto mode a spectrum with no excluded
/// slices (the qubit band never crosses the probe window) triggers separate
/// searches above and below <f_r>. The minimum-loss outcome wins and
/// near-ties populate `alternates`.
FitOutcome fit_full(const ExtractedSpectrum& spectrum, const PeriodPhaseEstimate& estimate,
                    double probe_span_hz, const FitConfig& cfg = {});

}  // namespace stsfit

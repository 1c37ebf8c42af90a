#include "stsfit/fullfit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stsfit/common.hpp"
#include "stsfit/errors.hpp"
#include "stsfit/parallel.hpp"

namespace stsfit {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Maps an unconstrained trial value into [0, 1] by reflection at both ends.
double reflect_into_unit(double x) {
  const double t = positive_mod(x, 2.0);
  return t > 1.0 ? 2.0 - t : t;
}

}  // namespace

std::array<double, kNumParams> to_param_array(const HamiltonianParams& p) {
  return {p.f_c_hz, p.g_hz, p.period_a, p.i_ss_a, p.f_ge_max_hz, p.d};
}

HamiltonianParams params_from_array(const std::array<double, kNumParams>& a) {
  return {a[0], a[1], a[2], a[3], a[4], a[5]};
}

const std::array<const char*, kNumParams>& param_names() {
  static const std::array<const char*, kNumParams> names = {"f_c",  "g",        "period",
                                                            "i_ss", "f_ge_max", "d"};
  return names;
}

double loss(const ExtractedSpectrum& spectrum, const HamiltonianParams& params,
            double probe_span_hz) {
  if (spectrum.points.empty()) throw EmptySpectrumError("loss: empty spectrum");
  double sum = 0.0;
  for (const auto& p : spectrum.points) {
    const double res = p.f_r_hz - model_frequency(params, p.current_a, probe_span_hz);
    sum += res * res;
  }
  return sum;
}

HamiltonianParams brute_search(const ExtractedSpectrum& spectrum, const BruteGridSpec& grid,
                               double period_a, double i_ss_a, double probe_span_hz, int workers,
                               std::size_t* n_evaluations) {
  const AxisSpec f_c_axis = grid.f_c_hz.value_or(
      AxisSpec{spectrum.mean_f_r_hz - 1e6, spectrum.mean_f_r_hz + 1e6, 3});
  const auto f_c_vals = linspace(f_c_axis.min, f_c_axis.max, f_c_axis.steps);
  const auto g_vals = linspace(grid.g_hz.min, grid.g_hz.max, grid.g_hz.steps);
  const auto f_ge_vals = linspace(grid.f_ge_max_hz.min, grid.f_ge_max_hz.max,
                                  grid.f_ge_max_hz.steps);
  const auto d_vals = linspace(grid.d.min, grid.d.max, grid.d.steps);

  const std::size_t total = f_c_vals.size() * g_vals.size() * f_ge_vals.size() * d_vals.size();
  if (n_evaluations) *n_evaluations = total;
  std::vector<double> losses(total);

  const std::size_t nd = d_vals.size();
  const std::size_t nf = f_ge_vals.size();
  const std::size_t ng = g_vals.size();
  const std::size_t n_pts = spectrum.points.size();
  const double half_span = 0.5 * probe_span_hz;

  // The qubit curve depends only on (f_ge_max, d) once (period, i_ss) are
  // frozen, so it is computed once per (f_ge_max, d) cell and shared by the
  // (f_c, g) inner loop.
  parallel_for(nf * nd, workers, [&](std::size_t cell) {
    const std::size_t ifge = cell / nd;
    const std::size_t id = cell % nd;
    const HamiltonianParams shape{1.0,    0.0, period_a, i_ss_a,
                                  f_ge_vals[ifge], d_vals[id]};
    std::vector<double> f_ge(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i)
      f_ge[i] = transmon_f_ge(shape, spectrum.points[i].current_a);
    for (std::size_t ic = 0; ic < f_c_vals.size(); ++ic) {
      for (std::size_t ig = 0; ig < ng; ++ig) {
        const double f_c = f_c_vals[ic];
        const double g2 = g_vals[ig] * g_vals[ig];
        double sum = 0.0;
        for (std::size_t i = 0; i < n_pts; ++i) {
          const double mid = 0.5 * (f_c + f_ge[i]);
          const double det = f_ge[i] - f_c;
          const double gap = std::sqrt(g2 + 0.25 * det * det);
          const double f_plus = mid + gap;
          const double m = std::abs(f_plus - f_c) < half_span ? f_plus : mid - gap;
          const double res = spectrum.points[i].f_r_hz - m;
          sum += res * res;
        }
        losses[((ic * ng + ig) * nf + ifge) * nd + id] = sum;
      }
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i)
    if (losses[i] < losses[best]) best = i;

  std::size_t rest = best;
  const std::size_t id = rest % nd;
  rest /= nd;
  const std::size_t ifge = rest % nf;
  rest /= nf;
  const std::size_t ig = rest % ng;
  const std::size_t ic = rest / ng;
  return {f_c_vals[ic], g_vals[ig], period_a, i_ss_a, f_ge_vals[ifge], d_vals[id]};
}

namespace {

struct NmRun {
  HamiltonianParams params;
  double loss = 0.0;
  bool converged = true;
};

/// Nelder-Mead over all six parameters with d reflected into [0, 1] and
/// non-physical frequencies rejected. Restarts from the optimum with a
/// shrunk simplex to tighten the terminal accuracy.
NmRun polish(const ExtractedSpectrum& spectrum, const HamiltonianParams& seed,
             double probe_span_hz, const NelderMeadConfig& cfg) {
  auto objective = [&](std::span<const double> x) {
    if (!(x[0] > 0.0) || !(x[1] >= 0.0) || !(x[2] > 0.0) || !(x[4] > 0.0))
      return std::numeric_limits<double>::infinity();
    const HamiltonianParams p{x[0], x[1], x[2], x[3], x[4], reflect_into_unit(x[5])};
    return loss(spectrum, p, probe_span_hz);
  };

  const auto x0 = to_param_array(seed);
  // Initial simplex scales per parameter, order (f_c, g, period, i_ss, f_ge_max, d).
  const std::array<double, kNumParams> step = {1e5,           1e6, seed.period_a / 200.0,
                                               seed.period_a / 200.0, 5e7, 0.02};

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> h(step.begin(), step.end());
  NmRun run;
  run.loss = std::numeric_limits<double>::infinity();
  for (int stage = 0; stage <= cfg.restarts; ++stage) {
    const auto result = nelder_mead(objective, x, h, cfg.options);
    if (result.loss <= run.loss) {
      x = result.x;
      run.loss = result.loss;
      run.converged = result.converged;
    }
    for (double& s : h) s *= cfg.restart_shrink;
  }
  run.params = {x[0], x[1], x[2], x[3], x[4], reflect_into_unit(x[5])};
  return run;
}

FitOutcome make_outcome(const ExtractedSpectrum& spectrum, const NmRun& run, double probe_span_hz,
                        QubitHint hint, double i_ss_seed) {
  FitOutcome out;
  out.params = run.params;
  out.hint_used = hint;
  out.i_ss_seed_a = i_ss_seed;
  out.nm_converged = run.converged;
  out.loss_sum_hz2 = 0.0;
  out.residuals.reserve(spectrum.points.size());
  for (const auto& p : spectrum.points) {
    const ModelPoint mp = model_frequency_point(out.params, p.current_a, probe_span_hz);
    const double res = p.f_r_hz - mp.f_hz;
    out.residuals.push_back({p.current_a, res, mp.branch});
    out.loss_sum_hz2 += res * res;
  }
  out.rms_per_point_hz =
      std::sqrt(out.loss_sum_hz2 / static_cast<double>(spectrum.points.size()));
  return out;
}

/// Restricts the qubit-frequency axis to one side of the mean resonator
/// frequency; returns nullopt when the restriction empties the axis.
std::optional<AxisSpec> clip_axis(const AxisSpec& axis, double mean_f_r, QubitHint hint) {
  AxisSpec out = axis;
  if (hint == QubitHint::above) out.min = std::max(axis.min, mean_f_r);
  if (hint == QubitHint::below) out.max = std::min(axis.max, mean_f_r);
  if (!(out.min < out.max) && out.steps > 1) return std::nullopt;
  return out;
}

}  // namespace

FitOutcome fit_full(const ExtractedSpectrum& spectrum, const PeriodPhaseEstimate& estimate,
                    double probe_span_hz, const FitConfig& cfg) {
  if (spectrum.points.empty()) throw EmptySpectrumError("fit_full: empty spectrum");
  if (estimate.i_ss_candidates_a.empty())
    throw FitError("fit_full: no sweet-spot candidates");

  std::vector<QubitHint> modes;
  if (cfg.hint == QubitHint::above || cfg.hint == QubitHint::below) {
    modes.push_back(cfg.hint);
  } else if (spectrum.excluded.empty()) {
    // No slice ever lost its dip, so the qubit band never crossed the probe
    // window and the detuning sign is ambiguous: search both sides.
    modes.push_back(QubitHint::above);
    modes.push_back(QubitHint::below);
  } else {
    modes.push_back(QubitHint::auto_detect);
  }

  std::vector<FitOutcome> outcomes;
  double brute_s = 0.0, polish_s = 0.0;
  for (const double i_ss : estimate.i_ss_candidates_a) {
    for (const QubitHint mode : modes) {
      BruteGridSpec grid = cfg.grid;
      const auto clipped = clip_axis(grid.f_ge_max_hz, spectrum.mean_f_r_hz, mode);
      if (!clipped) continue;
      grid.f_ge_max_hz = *clipped;

      const auto t0 = std::chrono::steady_clock::now();
      // Continuous patterns are smooth in i_ss and need no sub-grid; near
      // avoided crossings the basin is narrower than the square-wave
      // quantization, so scan around the candidate.
      std::vector<double> offsets{0.0};
      if (cfg.i_ss_scan_points > 1 && estimate.pattern != Pattern::continuous) {
        const double hw = cfg.i_ss_scan_halfwidth_frac * estimate.period_a;
        offsets = linspace(-hw, hw, cfg.i_ss_scan_points);
      }
      HamiltonianParams seed{};
      double seed_loss = std::numeric_limits<double>::infinity();
      for (const double off : offsets) {
        const HamiltonianParams trial =
            brute_search(spectrum, grid, estimate.period_a, i_ss + off, probe_span_hz,
                         cfg.workers);
        const double trial_loss = loss(spectrum, trial, probe_span_hz);
        if (trial_loss < seed_loss) {
          seed_loss = trial_loss;
          seed = trial;
        }
      }
      const auto t1 = std::chrono::steady_clock::now();
      brute_s += std::chrono::duration<double>(t1 - t0).count();
      const NmRun run = polish(spectrum, seed, probe_span_hz, cfg.nm);
      polish_s += seconds_since(t1);
      outcomes.push_back(make_outcome(spectrum, run, probe_span_hz, mode, i_ss));
    }
  }
  if (outcomes.empty()) throw FitError("fit_full: all candidate searches were empty");

  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i)
    if (outcomes[i].loss_sum_hz2 < outcomes[best].loss_sum_hz2) best = i;

  FitOutcome result = std::move(outcomes[best]);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (i == best) continue;
    if (outcomes[i].loss_sum_hz2 <= cfg.alternate_loss_ratio * result.loss_sum_hz2)
      result.alternates.push_back(std::move(outcomes[i]));
  }
  std::sort(result.alternates.begin(), result.alternates.end(),
            [](const FitOutcome& a, const FitOutcome& b) { return a.loss_sum_hz2 < b.loss_sum_hz2; });
  result.brute_s = brute_s;
  result.polish_s = polish_s;
  return result;
}

}  // namespace stsfit

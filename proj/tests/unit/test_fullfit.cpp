#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stsfit/common.hpp"
#include "stsfit/fullfit.hpp"
#include "stsfit/period.hpp"
#include "stsfit/rng.hpp"

using namespace stsfit;

namespace {

constexpr double kSpan = 100e6;

HamiltonianParams truth_anticrossing() { return {6.44e9, 30e6, 88e-6, 13e-6, 8.5e9, 0.3}; }

/// Spectrum sampled straight from the model (bypassing heatmap extraction),
/// optionally with Gaussian frequency noise.
ExtractedSpectrum spectrum_from_model(const HamiltonianParams& truth,
                                      const std::vector<double>& currents, double noise_sd_hz,
                                      std::uint64_t seed) {
  ExtractedSpectrum s;
  s.current_step_a = currents[1] - currents[0];
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, noise_sd_hz);
  double sum = 0.0;
  for (std::size_t i = 0; i < currents.size(); ++i) {
    double f = model_frequency(truth, currents[i], kSpan);
    if (noise_sd_hz > 0.0) f += normal(engine);
    s.points.push_back({i, currents[i], f});
    sum += f;
  }
  s.mean_f_r_hz = sum / static_cast<double>(currents.size());
  return s;
}

double iss_error_mod_period(double fitted, double truth, double period) {
  const double e = positive_mod(fitted - truth, period);
  return std::min(e, period - e);
}

}  // namespace

TEST_SUITE_BEGIN("fullfit");

TEST_CASE("loss: zero on exact model points, N eps^2 under a uniform offset") {
  const auto truth = truth_anticrossing();
  const auto currents = linspace(-88e-6, 88e-6, 121);
  auto s = spectrum_from_model(truth, currents, 0.0, 0);
  CHECK(loss(s, truth, kSpan) == 0.0);

  const double eps = 250.0;  // Hz
  for (auto& p : s.points) p.f_r_hz += eps;
  CHECK(loss(s, truth, kSpan) ==
        doctest::Approx(static_cast<double>(s.points.size()) * eps * eps).epsilon(1e-9));
}

TEST_CASE("loss: SNR-19-style noise lands at the tens-of-kHz per-point scale") {
  const auto truth = truth_anticrossing();
  const auto currents = linspace(-88e-6, 88e-6, 221);
  const double sd = 20e3;
  const auto s = spectrum_from_model(truth, currents, sd, 17);
  const double rms = std::sqrt(loss(s, truth, kSpan) / static_cast<double>(s.points.size()));
  CHECK(rms > 0.5 * sd);
  CHECK(rms < 2.0 * sd);
}

TEST_CASE("brute_search: default grid size is 3 x 5 x 80 x 9 = 10800 evaluations") {
  const auto truth = truth_anticrossing();
  const auto s = spectrum_from_model(truth, linspace(-88e-6, 88e-6, 61), 0.0, 0);
  std::size_t evals = 0;
  BruteGridSpec grid;
  brute_search(s, grid, truth.period_a, truth.i_ss_a, kSpan, 0, &evals);
  CHECK(evals == 10800);
}

TEST_CASE("brute_search: exact recovery when the truth sits on a grid node") {
  // every axis uses binary-exact steps so grid values reproduce the truth
  // doubles bit for bit
  auto truth = truth_anticrossing();
  truth.d = 0.25;
  BruteGridSpec grid;
  grid.f_c_hz = AxisSpec{6.42e9, 6.46e9, 3};      // step 20 MHz, node 6.44e9
  grid.g_hz = AxisSpec{20e6, 40e6, 5};            // node 30e6
  grid.f_ge_max_hz = AxisSpec{8.0e9, 9.0e9, 9};   // step 125 MHz, node 8.5e9
  grid.d = AxisSpec{0.0, 0.75, 4};                // step 0.25
  const auto s = spectrum_from_model(truth, linspace(-88e-6, 88e-6, 121), 0.0, 0);
  const auto seed = brute_search(s, grid, truth.period_a, truth.i_ss_a, kSpan);
  CHECK(seed.f_c_hz == truth.f_c_hz);
  CHECK(seed.g_hz == truth.g_hz);
  CHECK(seed.f_ge_max_hz == truth.f_ge_max_hz);
  CHECK(seed.d == truth.d);
  CHECK(loss(s, seed, kSpan) == 0.0);
}

TEST_CASE("brute_search: deterministic and independent of worker count") {
  const auto truth = truth_anticrossing();
  const auto s = spectrum_from_model(truth, linspace(-88e-6, 88e-6, 121), 30e3, 5);
  BruteGridSpec grid;
  const auto a = brute_search(s, grid, truth.period_a, truth.i_ss_a, kSpan, 1);
  const auto b = brute_search(s, grid, truth.period_a, truth.i_ss_a, kSpan, 4);
  CHECK(a.f_c_hz == b.f_c_hz);
  CHECK(a.g_hz == b.g_hz);
  CHECK(a.f_ge_max_hz == b.f_ge_max_hz);
  CHECK(a.d == b.d);
}

TEST_CASE("fit_full: noiseless anticrossing round trip below 1 Hz rms") {
  const auto truth = truth_anticrossing();
  const auto currents = linspace(-88e-6, 88e-6, 221);
  const auto s = spectrum_from_model(truth, currents, 0.0, 0);
  const auto est = estimate_period_phase(s, currents.size());
  REQUIRE(est.pattern == Pattern::anticrossing);

  const auto fit = fit_full(s, est, kSpan, {});
  CHECK(fit.rms_per_point_hz < 1.0);
  CHECK(std::abs(fit.params.f_c_hz - truth.f_c_hz) < 100.0);
  CHECK(std::abs(fit.params.g_hz - truth.g_hz) < 10e3);
  CHECK(std::abs(fit.params.period_a - truth.period_a) < 1e-9);
  CHECK(iss_error_mod_period(fit.params.i_ss_a, truth.i_ss_a, truth.period_a) < 1e-8);
  CHECK(std::abs(fit.params.f_ge_max_hz - truth.f_ge_max_hz) < 10e6);
  CHECK(std::abs(fit.params.d - truth.d) < 1e-3);

  // the polished loss never exceeds the best brute seed
  BruteGridSpec grid;
  const auto seed = brute_search(s, grid, est.period_a, est.i_ss_candidates_a[0], kSpan);
  CHECK(fit.loss_sum_hz2 <= loss(s, seed, kSpan));

  // branch bookkeeping: anticrossing data switches branch twice per period
  int switches = 0;
  for (std::size_t i = 1; i < fit.residuals.size(); ++i)
    if (fit.residuals[i].branch != fit.residuals[i - 1].branch) ++switches;
  CHECK(switches == 4);
}

TEST_CASE("fit_full: rms_per_point and loss_sum stay consistent") {
  const auto truth = truth_anticrossing();
  const auto s = spectrum_from_model(truth, linspace(-88e-6, 88e-6, 121), 25e3, 3);
  const auto est = estimate_period_phase(s, 121);
  const auto fit = fit_full(s, est, kSpan, {});
  CHECK(fit.rms_per_point_hz * fit.rms_per_point_hz * static_cast<double>(s.points.size()) ==
        doctest::Approx(fit.loss_sum_hz2).epsilon(1e-12));
  double recomputed = 0.0;
  for (const auto& r : fit.residuals) recomputed += r.residual_hz * r.residual_hz;
  CHECK(recomputed == doctest::Approx(fit.loss_sum_hz2).epsilon(1e-12));
}

TEST_CASE("fit_full: current-shift equivariance") {
  const auto truth = truth_anticrossing();
  const double delta = 8.8e-6;
  const auto currents = linspace(-88e-6, 88e-6, 221);
  auto shifted_currents = currents;
  for (double& c : shifted_currents) c += delta;

  const auto s0 = spectrum_from_model(truth, currents, 10e3, 7);
  auto s1 = s0;
  for (std::size_t i = 0; i < s1.points.size(); ++i)
    s1.points[i].current_a = shifted_currents[i];

  const auto e0 = estimate_period_phase(s0, 221);
  const auto e1 = estimate_period_phase(s1, 221);
  const auto f0 = fit_full(s0, e0, kSpan, {});
  const auto f1 = fit_full(s1, e1, kSpan, {});

  CHECK(f1.rms_per_point_hz == doctest::Approx(f0.rms_per_point_hz).epsilon(1e-6));
  CHECK(f1.params.f_c_hz == doctest::Approx(f0.params.f_c_hz).epsilon(1e-9));
  CHECK(f1.params.period_a == doctest::Approx(f0.params.period_a).epsilon(1e-6));
  const double shift = positive_mod(f1.params.i_ss_a - f0.params.i_ss_a, f0.params.period_a);
  const double err = std::min(std::abs(shift - positive_mod(delta, f0.params.period_a)),
                              f0.params.period_a - std::abs(shift - positive_mod(delta, f0.params.period_a)));
  CHECK(err < 0.05e-6);
}

TEST_CASE("fit_full: frequency-shift equivariance of f_c and residual rms") {
  const auto truth = truth_anticrossing();
  const double delta_f = 35e6;
  const auto s0 = spectrum_from_model(truth, linspace(-88e-6, 88e-6, 221), 10e3, 9);
  auto s1 = s0;
  for (auto& p : s1.points) p.f_r_hz += delta_f;
  s1.mean_f_r_hz += delta_f;

  const auto e0 = estimate_period_phase(s0, 221);
  const auto e1 = estimate_period_phase(s1, 221);
  const auto f0 = fit_full(s0, e0, kSpan, {});
  const auto f1 = fit_full(s1, e1, kSpan, {});
  CHECK(f1.params.f_c_hz - f0.params.f_c_hz == doctest::Approx(delta_f).epsilon(1e-6));
  CHECK(f1.rms_per_point_hz == doctest::Approx(f0.rms_per_point_hz).epsilon(1e-3));
}

TEST_CASE("fit_full: explicit hints restrict the search side") {
  HamiltonianParams truth{6.4e9, 30e6, 88e-6, 13e-6, 9.5e9, 0.5};  // qubit above
  const auto s = spectrum_from_model(truth, linspace(-88e-6, 88e-6, 221), 5e3, 21);
  const auto est = estimate_period_phase(s, 221);
  REQUIRE(est.pattern == Pattern::continuous);

  FitConfig above;
  above.hint = QubitHint::above;
  const auto fa = fit_full(s, est, kSpan, above);
  CHECK(fa.hint_used == QubitHint::above);
  CHECK(std::abs(fa.params.f_ge_max_hz - truth.f_ge_max_hz) < 1.5e9);

  FitConfig below;
  below.hint = QubitHint::below;
  const auto fb = fit_full(s, est, kSpan, below);
  CHECK(fb.hint_used == QubitHint::below);
  // the wrong side still produces a usable mimic, with higher loss
  CHECK(fb.loss_sum_hz2 >= fa.loss_sum_hz2);
}

TEST_CASE("fit_full: ambiguous pattern fits both sweet-spot candidates") {
  const auto truth = truth_anticrossing();
  const auto s = spectrum_from_model(truth, linspace(-88e-6, 88e-6, 221), 0.0, 0);
  auto est = estimate_period_phase(s, 221);
  // force the ambiguous branch: both formulas are tried and max likelihood wins
  est.pattern = Pattern::ambiguous;
  const auto correct = est.i_ss_candidates_a[0];
  est.i_ss_candidates_a = sweet_spot(est.phi_a, est.duty, est.period_a, Pattern::ambiguous,
                                     s.points.front().current_a);
  const auto fit = fit_full(s, est, kSpan, {});
  CHECK(fit.rms_per_point_hz < 1.0);
  CHECK(iss_error_mod_period(fit.params.i_ss_a, truth.i_ss_a, truth.period_a) < 1e-8);
  CHECK(iss_error_mod_period(fit.i_ss_seed_a, correct, est.period_a) < est.period_a / 25.0);
}

TEST_SUITE_END();

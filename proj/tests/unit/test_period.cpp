#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "stsfit/common.hpp"
#include "stsfit/errors.hpp"
#include "stsfit/period.hpp"
#include "stsfit/rng.hpp"
#include "stsfit/synth.hpp"

using namespace stsfit;

namespace {

/// Hand-built spectrum on a full uniform grid (no exclusions unless listed).
ExtractedSpectrum spectrum_from_values(const std::vector<double>& f_r_hz, double step_a,
                                       double start_a = 0.0,
                                       const std::vector<std::size_t>& excluded = {}) {
  ExtractedSpectrum s;
  s.current_step_a = step_a;
  double sum = 0.0;
  std::size_t n_points = 0;
  for (std::size_t i = 0; i < f_r_hz.size(); ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) != excluded.end()) {
      s.excluded.push_back({i, ExclusionReason::below_threshold});
      continue;
    }
    s.points.push_back({i, start_a + static_cast<double>(i) * step_a, f_r_hz[i]});
    sum += f_r_hz[i];
    ++n_points;
  }
  s.mean_f_r_hz = sum / static_cast<double>(n_points);
  return s;
}

/// Square-wave-like two-branch trace: +amp on the first half of each period.
std::vector<double> two_branch_trace(std::size_t n, std::size_t period, double amp,
                                     double base = 6.4e9) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = base + ((i % period) < period / 2 ? amp : -amp);
  return v;
}

HamiltonianParams anticrossing_truth(double period_a) {
  return {6.44e9, 30e6, period_a, 13e-6, 8.5e9, 0.3};
}

NotchNuisanceParams nuisance() { return {1.0, 0.3, 40e-9, 3000.0, 6000.0, 0.15}; }

}  // namespace

TEST_SUITE_BEGIN("period");

TEST_CASE("standardize: zero mean, zero padding, grid alignment") {
  SUBCASE("constant trace becomes all zeros") {
    const auto s = spectrum_from_values(std::vector<double>(20, 6.4e9), 1e-6);
    const auto trace = standardize(s, 20);
    for (double v : trace.values_hz) CHECK(v == 0.0);
    CHECK(trace.n_filled == 0);
  }
  SUBCASE("excluded indices are zero-padded and the rest sums to zero") {
    auto values = two_branch_trace(40, 10, 2e6);
    const auto s = spectrum_from_values(values, 1e-6, -5e-6, {3, 17, 18});
    const auto trace = standardize(s, 40);
    CHECK(trace.values_hz.size() == 40);
    CHECK(trace.n_filled == 3);
    CHECK(trace.values_hz[3] == 0.0);
    CHECK(trace.values_hz[17] == 0.0);
    CHECK(trace.values_hz[18] == 0.0);
    CHECK(trace.current_start_a == doctest::Approx(-5e-6).epsilon(1e-12));
    double sum = 0.0, rms = 0.0;
    for (double v : trace.values_hz) {
      sum += v;
      rms += v * v;
    }
    rms = std::sqrt(rms / 37.0);
    CHECK(std::abs(sum / 37.0) < 1e-6 * rms);
  }
  SUBCASE("sign changes sit at the branch switches") {
    const auto s = spectrum_from_values(two_branch_trace(40, 10, 2e6), 1e-6);
    const auto trace = standardize(s, 40);
    for (std::size_t i = 0; i < 40; ++i) {
      const bool positive = (i % 10) < 5;
      CHECK((trace.values_hz[i] > 0) == positive);
    }
  }
}

TEST_CASE("autocorrelation_period: pure square wave of period 20 gives exactly 20 samples") {
  const auto s = spectrum_from_values(two_branch_trace(100, 20, 1e6), 1e-6);
  const auto search = autocorrelation_period(standardize(s, 100));
  CHECK(search.peak_lag == 20);
  CHECK(search.period_a == doctest::Approx(20e-6).epsilon(1e-12));
}

TEST_CASE("autocorrelation_period: secondary peak at twice the period is smaller") {
  // 88 uA period sampled at 0.8 uA over two periods, like the example data
  const std::size_t lag_true = 110;
  const auto s = spectrum_from_values(two_branch_trace(221, lag_true, 2e6), 0.8e-6);
  const auto search = autocorrelation_period(standardize(s, 221));
  CHECK(search.peak_lag == lag_true);
  CHECK(search.period_a == doctest::Approx(88e-6).epsilon(1e-6));
  // R(2 Pi) is a local maximum but lower than R(Pi)
  const auto& r = search.autocorr;
  CHECK(r[2 * lag_true] > r[2 * lag_true - 2]);
  CHECK(r[2 * lag_true] < r[lag_true]);
}

TEST_CASE("autocorrelation_period: errors without a positive local maximum") {
  SUBCASE("monotone trace") {
    std::vector<double> values(30);
    for (std::size_t i = 0; i < 30; ++i) values[i] = 6.4e9 + 1e5 * static_cast<double>(i);
    const auto s = spectrum_from_values(values, 1e-6);
    CHECK_THROWS_AS(autocorrelation_period(standardize(s, 30)), NoPeriodError);
  }
  SUBCASE("trace shorter than the guard") {
    const auto s = spectrum_from_values({6.4e9, 6.5e9, 6.4e9}, 1e-6);
    CHECK_THROWS_AS(autocorrelation_period(standardize(s, 3)), NoPeriodError);
  }
}

TEST_CASE("autocorrelation_period: Monte-Carlo on noisy synthetic anticrossings") {
  // 50 uA period, ~2.4 periods, SNR 10; recovered within one current step.
  const double period = 50e-6;
  const auto truth = anticrossing_truth(period);
  const auto nu = nuisance();
  const auto currents = linspace(-60e-6, 60e-6, 121);
  const auto probes = linspace(6.37e9, 6.47e9, 201);
  const double step = currents[1] - currents[0];
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto map = generate_heatmap(truth, nu, currents, probes, nu.circle_radius() / 10.0,
                                      derive_seed(2024, seed));
    try {
      const auto spectrum = extract_spectrum(map, {});
      const auto search = autocorrelation_period(standardize(spectrum, map.n_currents()));
      if (std::abs(search.period_a - period) <= step) ++hits;
    } catch (const std::exception&) {
    }
  }
  CHECK(hits == 50);
}

TEST_CASE("square_wave: level placement and quadrature integral") {
  const double period = 100e-6, phi = -20e-6;
  CHECK(square_wave(0.0, period, phi, 1.0) == 1);
  CHECK(square_wave(55e-6, period, phi, 1.0) == 1);
  CHECK(square_wave(phi, period, phi, 0.5) == 1);
  CHECK(square_wave(phi + 50e-6, period, phi, 0.5) == -1);
  for (double duty : {0.0, 0.25, 0.5, 0.8, 1.0}) {
    // Riemann-sum oracle for the integral over one period: Pi (2D - 1)
    const std::size_t n = 100000;
    double integral = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      integral +=
          square_wave(phi + (i + 0.5) * period / n, period, phi, duty) * (period / n);
    CHECK(integral == doctest::Approx(period * (2.0 * duty - 1.0)).epsilon(1e-4));
  }
  CHECK_THROWS_AS(square_wave(0.0, period, phi, 1.5), std::invalid_argument);
}

TEST_CASE("fit_square_wave: recovers a square-wave trace up to grid resolution") {
  const double period = 88e-6, phi_true = 11e-6, duty_true = 0.4;
  const double step = 0.5e-6, start = -88e-6;
  std::vector<double> values(352);
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = 6.4e9 + 1e6 * square_wave(start + i * step, period, phi_true, duty_true);
  const auto s = spectrum_from_values(values, step, start);
  const auto trace = standardize(s, values.size());
  const auto fit = fit_square_wave(trace, period);
  CHECK(std::abs(fit.phi_a - phi_true) <= period / 50.0);
  CHECK(std::abs(fit.duty - duty_true) <= 1.5 / 49.0);
  CHECK(fit.loss_grid.size() == 2500);
  // the optimum is a genuine correlation maximum, well below the median loss
  const double best = *std::min_element(fit.loss_grid.begin(), fit.loss_grid.end());
  CHECK(best < 0.0);
  CHECK(best < median(fit.loss_grid));
}

TEST_CASE("fit_square_wave: scale invariance of the argmin") {
  const auto s = spectrum_from_values(two_branch_trace(221, 110, 2e6), 0.8e-6);
  auto trace = standardize(s, 221);
  const auto base = fit_square_wave(trace, 88e-6);
  for (double& v : trace.values_hz) v *= 7.5;
  const auto scaled = fit_square_wave(trace, 88e-6);
  CHECK(base.phi_a == scaled.phi_a);
  CHECK(base.duty == scaled.duty);
}

TEST_CASE("classify_pattern: jump ratio thresholds") {
  SUBCASE("two-branch jump trace is an anticrossing") {
    const auto s = spectrum_from_values(two_branch_trace(60, 20, 2e6), 1e-6);
    CHECK(classify_pattern(s) == Pattern::anticrossing);
  }
  SUBCASE("smooth sinusoid is continuous") {
    std::vector<double> values(100);
    for (std::size_t i = 0; i < 100; ++i)
      values[i] = 6.4e9 + 1e6 * std::sin(2.0 * std::numbers::pi * i / 25.0);
    CHECK(classify_pattern(spectrum_from_values(values, 1e-6)) == Pattern::continuous);
  }
  SUBCASE("differential ratio between the thresholds is ambiguous") {
    // peak-to-peak 1 MHz, largest consecutive jump 0.35 MHz
    std::vector<double> values = {6.4e9,         6.4e9 + .35e6, 6.4e9 + .5e6, 6.4e9 + .65e6,
                                  6.4e9 + 1.0e6, 6.4e9 + .8e6,  6.4e9 + .6e6, 6.4e9 + .4e6};
    CHECK(classify_pattern(spectrum_from_values(values, 1e-6)) == Pattern::ambiguous);
  }
}

TEST_CASE("sweet_spot: both formulas and the ambiguous union") {
  const double period = 100e-6;
  const auto anti = sweet_spot(0.0, 0.5, period, Pattern::anticrossing, 0.0);
  REQUIRE(anti.size() == 1);
  CHECK(anti[0] == doctest::Approx(75e-6).epsilon(1e-12));
  const auto cont = sweet_spot(0.0, 0.5, period, Pattern::continuous, 0.0);
  REQUIRE(cont.size() == 1);
  CHECK(cont[0] == doctest::Approx(25e-6).epsilon(1e-12));
  const auto both = sweet_spot(0.0, 0.5, period, Pattern::ambiguous, 0.0);
  REQUIRE(both.size() == 2);
  CHECK(both[0] == doctest::Approx(25e-6).epsilon(1e-12));
  CHECK(both[1] == doctest::Approx(75e-6).epsilon(1e-12));
  // reduction into the measured range
  const auto reduced = sweet_spot(0.0, 0.5, period, Pattern::anticrossing, -200e-6);
  CHECK(reduced[0] == doctest::Approx(-125e-6).epsilon(1e-9));
}

TEST_CASE("estimate_period_phase: translation equivariance") {
  // delta must be commensurate with both the data step (0.8 uA) and the
  // phi grid (period/50 = 1.76 uA) for the quantized fit to shift cleanly
  const double delta = 17.6e-6;
  const auto base_values = two_branch_trace(221, 110, 2e6);
  const auto s0 = spectrum_from_values(base_values, 0.8e-6, 0.0);
  const auto s1 = spectrum_from_values(base_values, 0.8e-6, delta);
  const auto e0 = estimate_period_phase(s0, 221);
  const auto e1 = estimate_period_phase(s1, 221);
  CHECK(e0.period_a == doctest::Approx(e1.period_a).epsilon(1e-12));
  // phi and i_ss live on the 50-step phase grid, so the shift matches delta
  // up to one grid cell
  const double grid_cell = e0.period_a / 50.0;
  auto circular_err = [&](double shift) {
    const double err = positive_mod(shift - delta, e0.period_a);
    return std::min(err, e0.period_a - err);
  };
  CHECK(circular_err(e1.phi_a - e0.phi_a) <= grid_cell);
  REQUIRE(e0.i_ss_candidates_a.size() == e1.i_ss_candidates_a.size());
  CHECK(circular_err(e1.i_ss_candidates_a[0] - e0.i_ss_candidates_a[0]) <= grid_cell);
}

TEST_CASE("estimate_period_phase: noiseless synthetic recovers period and sweet spot") {
  const double period = 88e-6;
  const auto truth = anticrossing_truth(period);
  const auto map = generate_heatmap(truth, nuisance(), linspace(-88e-6, 88e-6, 221),
                                    linspace(6.37e9, 6.47e9, 301), 0.0, 1);
  const auto spectrum = extract_spectrum(map, {});
  const auto est = estimate_period_phase(spectrum, map.n_currents());
  CHECK(est.pattern == Pattern::anticrossing);
  CHECK(std::abs(est.period_a - period) <= map.current_step_a());
  REQUIRE_FALSE(est.i_ss_candidates_a.empty());
  double best = 1e9;
  for (double c : est.i_ss_candidates_a) {
    const double err = positive_mod(c - truth.i_ss_a, period);
    best = std::min({best, err, period - err});
  }
  CHECK(best <= period / 50.0);
}

TEST_SUITE_END();

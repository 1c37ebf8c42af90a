#include <doctest.h>

#include <cmath>

#include "stsfit/common.hpp"
#include "stsfit/noise_harness.hpp"
#include "stsfit/synth.hpp"

using namespace stsfit;

namespace {

HamiltonianParams smooth_truth() { return {6.4e9, 30e6, 88e-6, 13e-6, 5.9e9, 0.35}; }

NotchNuisanceParams nuisance() { return {1.0, 0.3, 40e-9, 3000.0, 6000.0, 0.15}; }

StsHeatmap small_map(double noise_sd, std::uint64_t seed) {
  return generate_heatmap(smooth_truth(), nuisance(), linspace(-88e-6, 88e-6, 61),
                          linspace(6.35e9, 6.45e9, 201), noise_sd, seed);
}

}  // namespace

TEST_SUITE_BEGIN("noise_harness");

TEST_CASE("add_noise: zero sigma is the identity, base map untouched") {
  const auto map = small_map(0.0, 1);
  const auto same = add_noise(map, 0.0, 99);
  for (std::size_t i = 0; i < map.s21.size(); ++i) CHECK(same.s21[i] == map.s21[i]);

  const auto noisy = add_noise(map, 0.02, 99);
  bool changed = false;
  for (std::size_t i = 0; i < map.s21.size(); ++i) changed |= (noisy.s21[i] != map.s21[i]);
  CHECK(changed);
  // original still clean
  CHECK(map.s21[0] == small_map(0.0, 1).s21[0]);
}

TEST_CASE("add_noise: deterministic per seed, variance matches sigma1^2") {
  const auto map = small_map(0.0, 1);
  const double sigma1 = 0.04;
  const auto a = add_noise(map, sigma1, 7);
  const auto b = add_noise(map, sigma1, 7);
  for (std::size_t i = 0; i < a.s21.size(); ++i) CHECK(a.s21[i] == b.s21[i]);

  double var = 0.0;
  for (std::size_t i = 0; i < a.s21.size(); ++i) var += std::norm(a.s21[i] - map.s21[i]);
  var /= static_cast<double>(a.s21.size());  // 61*201 > 1e4 cells
  CHECK(var == doctest::Approx(sigma1 * sigma1).epsilon(0.02));
}

TEST_CASE("estimate_snr_scale: recovers the analytic radius and injected noise") {
  const double sigma0 = nuisance().circle_radius() / 12.0;
  const auto map = small_map(sigma0, 3);
  const auto scale = estimate_snr_scale(map, {});
  CHECK(scale.circle_radius == doctest::Approx(nuisance().circle_radius()).epsilon(0.02));
  CHECK(scale.sigma0 == doctest::Approx(sigma0).epsilon(0.15));
}

TEST_CASE("snr_sweep: bit-identical reruns and percentile bookkeeping") {
  const auto map = small_map(0.0, 1);
  SweepConfig cfg;
  cfg.sigma1_levels = {nuisance().circle_radius() / 15.0, nuisance().circle_radius() / 8.0};
  cfg.reps = 3;
  cfg.base_seed = 5;
  cfg.sigma0 = 0.0;
  cfg.circle_radius = nuisance().circle_radius();
  cfg.keep_samples = true;

  const auto a = snr_sweep(map, cfg);
  const auto b = snr_sweep(map, cfg);
  REQUIRE(a.snr_levels.size() == 2);
  CHECK(a.snr_levels[0] == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(a.snr_levels[1] == doctest::Approx(8.0).epsilon(1e-12));
  for (std::size_t k = 0; k < kNumParams; ++k) {
    for (std::size_t level = 0; level < 2; ++level) {
      CHECK(a.per_param[k][level].median == b.per_param[k][level].median);
      CHECK(a.per_param[k][level].p25 == b.per_param[k][level].p25);
      CHECK(a.per_param[k][level].p75 == b.per_param[k][level].p75);
      // percentiles recompute exactly from the retained raw samples
      const auto& samples = a.raw[k][level];
      if (!samples.empty()) {
        CHECK(a.per_param[k][level].median == percentile(samples, 50.0));
        CHECK(a.per_param[k][level].p25 == percentile(samples, 25.0));
        CHECK(a.per_param[k][level].p75 == percentile(samples, 75.0));
        CHECK(a.per_param[k][level].p25 <= a.per_param[k][level].median);
        CHECK(a.per_param[k][level].median <= a.per_param[k][level].p75);
      }
    }
  }
}

TEST_CASE("snr_sweep: high-SNR medians recover the truth") {
  const auto map = small_map(0.0, 1);
  SweepConfig cfg;
  cfg.sigma1_levels = {nuisance().circle_radius() / 15.0};
  cfg.reps = 4;
  cfg.base_seed = 11;
  cfg.circle_radius = nuisance().circle_radius();
  const auto sweep = snr_sweep(map, cfg);
  CHECK(sweep.divergences[0] == 0);
  const auto truth = smooth_truth();
  CHECK(std::abs(sweep.per_param[0][0].median - truth.f_c_hz) < 0.2e6);
  CHECK(std::abs(sweep.per_param[2][0].median - truth.period_a) < 1e-6);
}

TEST_CASE("snr_sweep: fits outside the qubit grid count as divergent") {
  const auto map = small_map(0.0, 1);
  SweepConfig cfg;
  cfg.sigma1_levels = {nuisance().circle_radius() / 15.0};
  cfg.reps = 2;
  // an absurd grid the fitted f_ge_max can never stay inside
  cfg.analysis.fit.grid.f_ge_max_hz = {30e9, 31e9, 4};
  cfg.circle_radius = nuisance().circle_radius();
  const auto sweep = snr_sweep(map, cfg);
  CHECK(sweep.divergences[0] == cfg.reps);
  CHECK(std::isnan(sweep.per_param[0][0].median));
}

TEST_SUITE_END();

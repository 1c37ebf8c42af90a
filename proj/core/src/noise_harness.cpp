#include "stsfit/noise_harness.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "stsfit/common.hpp"
#include "stsfit/parallel.hpp"
#include "stsfit/rng.hpp"
#include "stsfit/synth.hpp"

namespace stsfit {

StsHeatmap add_noise(const StsHeatmap& map, double sigma1, std::uint64_t seed) {
  if (!(sigma1 >= 0.0)) throw std::invalid_argument("add_noise: sigma1 must be >= 0");
  StsHeatmap out = map;
  if (sigma1 == 0.0) return out;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const std::size_t m = map.n_freqs();
  for (std::size_t row = 0; row < map.n_currents(); ++row) {
    auto engine = make_engine(derive_seed(seed, row));
    std::normal_distribution<double> normal(0.0, sigma1);
    auto slice = out.slice(row);
    for (std::size_t col = 0; col < m; ++col) {
      const double re = normal(engine);
      const double im = normal(engine);
      slice[col] += std::complex<double>(re, im) * inv_sqrt2;
    }
  }
  return out;
}

SnrScale estimate_snr_scale(const StsHeatmap& map, const ExtractConfig& cfg) {
  const ExtractedSpectrum spectrum = extract_spectrum(map, cfg);
  std::vector<double> radii;
  for (const auto& fit : spectrum.slice_fits) {
    if (!fit.converged) continue;
    radii.push_back(fit.amplitude_a * fit.q_loaded / (2.0 * fit.q_ext_mag));
  }
  std::vector<double> noise;
  for (std::size_t row = 0; row < map.n_currents(); ++row) {
    auto slice = map.slice(row);
    std::vector<double> amps(slice.size());
    for (std::size_t i = 0; i < slice.size(); ++i) amps[i] = std::abs(slice[i]);
    // |S21| noise has SD sigma/sqrt(2) for complex noise of total SD sigma.
    noise.push_back(robust_noise_sd(amps) * std::numbers::sqrt2);
  }
  SnrScale scale;
  if (!radii.empty()) scale.circle_radius = median(std::move(radii));
  if (!noise.empty()) scale.sigma0 = median(std::move(noise));
  return scale;
}

SnrSweepResult snr_sweep(const StsHeatmap& map, const SweepConfig& cfg) {
  if (cfg.reps < 2) throw std::invalid_argument("snr_sweep: need reps >= 2");
  if (cfg.sigma1_levels.empty()) throw std::invalid_argument("snr_sweep: no noise levels");

  const std::size_t levels = cfg.sigma1_levels.size();
  const std::size_t cells = levels * cfg.reps;

  // One slot per (level, rep); NaN marks divergence. Inner stages run
  // single-threaded since the sweep parallelizes across cells.
  AnalysisConfig analysis = cfg.analysis;
  analysis.workers = 1;
  const double grid_lo = cfg.analysis.fit.grid.f_ge_max_hz.min;
  const double grid_hi = cfg.analysis.fit.grid.f_ge_max_hz.max;

  std::vector<std::array<double, kNumParams>> samples(
      cells, {std::numeric_limits<double>::quiet_NaN(), 0, 0, 0, 0, 0});
  parallel_for(cells, cfg.workers, [&](std::size_t cell) {
    const std::size_t level = cell / cfg.reps;
    const std::size_t rep = cell % cfg.reps;
    try {
      const StsHeatmap noisy =
          add_noise(map, cfg.sigma1_levels[level], derive_seed(cfg.base_seed, level, rep));
      const AnalysisResult run = analyze(noisy, analysis);
      const double f_ge = run.fit.params.f_ge_max_hz;
      if (f_ge < grid_lo || f_ge > grid_hi) return;  // divergent by definition
      samples[cell] = to_param_array(run.fit.params);
    } catch (const std::exception&) {
      // divergence recorded via the NaN slot
    }
  });

  SnrSweepResult result;
  result.sigma1_levels = cfg.sigma1_levels;
  result.reps = cfg.reps;
  result.snr_levels.resize(levels);
  result.divergences.assign(levels, 0);
  for (auto& per : result.per_param) per.resize(levels);
  if (cfg.keep_samples)
    for (auto& per : result.raw) per.resize(levels);

  for (std::size_t level = 0; level < levels; ++level) {
    const double s1 = cfg.sigma1_levels[level];
    const double denom2 = cfg.sigma0 * cfg.sigma0 + s1 * s1;
    result.snr_levels[level] = denom2 > 0.0 ? cfg.circle_radius / std::sqrt(denom2)
                                            : std::numeric_limits<double>::infinity();

    std::array<std::vector<double>, kNumParams> values;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      const auto& s = samples[level * cfg.reps + rep];
      if (std::isnan(s[0])) {
        ++result.divergences[level];
        continue;
      }
      for (std::size_t k = 0; k < kNumParams; ++k) values[k].push_back(s[k]);
    }
    for (std::size_t k = 0; k < kNumParams; ++k) {
      ParamStats stats;
      if (values[k].empty()) {
        stats.median = stats.p25 = stats.p75 = std::numeric_limits<double>::quiet_NaN();
      } else {
        stats.median = percentile(values[k], 50.0);
        stats.p25 = percentile(values[k], 25.0);
        stats.p75 = percentile(values[k], 75.0);
      }
      result.per_param[k][level] = stats;
      if (cfg.keep_samples) result.raw[k][level] = std::move(values[k]);
    }
  }
  return result;
}

}  // namespace stsfit

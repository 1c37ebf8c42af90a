#include "stsfit/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "stsfit/parallel.hpp"
#include "stsfit/rng.hpp"

namespace stsfit {

void NotchNuisanceParams::validate() const {
  if (!(amplitude_a > 0.0)) throw std::invalid_argument("NotchNuisanceParams: a must be positive");
  if (!(q_loaded > 0.0)) throw std::invalid_argument("NotchNuisanceParams: Q_l must be positive");
  if (!(q_ext_mag > 0.0))
    throw std::invalid_argument("NotchNuisanceParams: |Q_e'| must be positive");
}

std::complex<double> notch_s21(double f_p_hz, double f_r_hz, const NotchNuisanceParams& nu) {
  using namespace std::complex_literals;
  if (!(f_p_hz > 0.0 && f_r_hz > 0.0))
    throw std::invalid_argument("notch_s21: frequencies must be positive");
  const std::complex<double> q_ext = nu.q_ext_mag * std::exp(-1i * nu.q_ext_phase_rad);
  const std::complex<double> dip =
      (nu.q_loaded / q_ext) / (1.0 + 2i * nu.q_loaded * (f_p_hz / f_r_hz - 1.0));
  const std::complex<double> env =
      nu.amplitude_a *
      std::exp(1i * (nu.alpha_rad + 2.0 * std::numbers::pi * f_p_hz * nu.tau_s));
  return env * (1.0 - dip);
}

StsHeatmap generate_heatmap(const HamiltonianParams& truth, const NotchNuisanceParams& nuisance,
                            std::vector<double> currents_a, std::vector<double> probe_freqs_hz,
                            double noise_sd, std::uint64_t seed, int workers) {
  truth.validate();
  nuisance.validate();
  if (currents_a.empty() || probe_freqs_hz.empty())
    throw std::invalid_argument("generate_heatmap: grids must be non-empty");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("generate_heatmap: noise_sd must be >= 0");

  StsHeatmap map;
  map.currents_a = std::move(currents_a);
  map.probe_freqs_hz = std::move(probe_freqs_hz);
  const std::size_t n = map.n_currents();
  const std::size_t m = map.n_freqs();
  map.s21.resize(n * m);
  const double span = map.probe_span_hz();
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  parallel_for(n, workers, [&](std::size_t row) {
    const double f_model = model_frequency(truth, map.currents_a[row], span);
    auto slice = map.slice(row);
    for (std::size_t col = 0; col < m; ++col)
      slice[col] = notch_s21(map.probe_freqs_hz[col], f_model, nuisance);
    if (noise_sd > 0.0) {
      auto engine = make_engine(derive_seed(seed, row));
      std::normal_distribution<double> normal(0.0, noise_sd);
      for (std::size_t col = 0; col < m; ++col) {
        const double re = normal(engine);
        const double im = normal(engine);
        slice[col] += std::complex<double>(re, im) * inv_sqrt2;
      }
    }
  });

  nlohmann::json meta;
  meta["synthetic"] = true;
  meta["seed"] = seed;
  meta["rng"] = rng_algorithm_id();
  meta["noise_sd"] = noise_sd;
  meta["truth"] = {{"f_c_hz", truth.f_c_hz},         {"g_hz", truth.g_hz},
                   {"period_a", truth.period_a},     {"i_ss_a", truth.i_ss_a},
                   {"f_ge_max_hz", truth.f_ge_max_hz}, {"d", truth.d}};
  meta["nuisance"] = {{"amplitude_a", nuisance.amplitude_a},
                      {"alpha_rad", nuisance.alpha_rad},
                      {"tau_s", nuisance.tau_s},
                      {"q_loaded", nuisance.q_loaded},
                      {"q_ext_mag", nuisance.q_ext_mag},
                      {"q_ext_phase_rad", nuisance.q_ext_phase_rad}};
  map.meta = meta.dump();
  map.validate();
  return map;
}

double compute_snr(double circle_radius, double sigma0, double sigma1) {
  if (!(circle_radius >= 0.0 && sigma0 >= 0.0 && sigma1 >= 0.0))
    throw std::invalid_argument("compute_snr: inputs must be non-negative");
  const double denom2 = sigma0 * sigma0 + sigma1 * sigma1;
  if (denom2 == 0.0) throw std::domain_error("compute_snr: sigma0 and sigma1 both zero");
  return circle_radius / std::sqrt(denom2);
}

}  // namespace stsfit

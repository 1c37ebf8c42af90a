#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "stsfit/heatmap.hpp"
#include "stsfit/physics.hpp"

namespace stsfit {

/// Nuisance parameters of the notch-port transmission model
///   S21(f_p) = a e^{i alpha} e^{2 pi i f_p tau}
///              * [1 - (Q_l / Q_e') / (1 + 2 i Q_l (f_p / f_r - 1))],
/// with complex external quality factor Q_e' = q_ext_mag * e^{-i q_ext_phase}.
struct NotchNuisanceParams {
  double amplitude_a = 1.0;
  double alpha_rad = 0.0;
  double tau_s = 0.0;
  double q_loaded = 5e3;
  double q_ext_mag = 1e4;
  double q_ext_phase_rad = 0.0;

  void validate() const;

  /// Radius of the resonance circle traced in the complex plane (tau = 0):
  /// a * Q_l / (2 |Q_e'|). This is the signal amplitude used for SNR scales.
  double circle_radius() const { return amplitude_a * q_loaded / (2.0 * q_ext_mag); }
};

std::complex<double> notch_s21(double f_p_hz, double f_r_hz, const NotchNuisanceParams& nu);

/// Synthetic heatmap: per slice the notch response at the model frequency of
/// `truth`, plus complex Gaussian noise (xi1 + i xi2)/sqrt(2) with
/// xi ~ N(0, noise_sd). Per-slice RNG streams derive from (seed, slice index),
/// so the result does not depend on evaluation order. The probe span fed to
/// the branch-selection window is the full probe_freqs range.
StsHeatmap generate_heatmap(const HamiltonianParams& truth, const NotchNuisanceParams& nuisance,
                            std::vector<double> currents_a, std::vector<double> probe_freqs_hz,
                            double noise_sd, std::uint64_t seed, int workers = 0);

/// SNR = r / sqrt(sigma0^2 + sigma1^2); throws std::domain_error when both
/// noise scales are zero.
double compute_snr(double circle_radius, double sigma0, double sigma1);

}  // namespace stsfit

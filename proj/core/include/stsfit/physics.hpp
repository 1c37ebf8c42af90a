#pragma once

namespace stsfit {

/// The six model parameters of a coupled transmon-resonator cell.
/// All frequencies are in Hz, currents in A.
struct HamiltonianParams {
  double f_c_hz = 0.0;       ///< bare cavity frequency
  double g_hz = 0.0;         ///< cavity-qubit coupling
  double period_a = 0.0;     ///< period of the qubit spectrum in coil current
  double i_ss_a = 0.0;       ///< upper sweet-spot current
  double f_ge_max_hz = 0.0;  ///< qubit frequency at the sweet spot
  double d = 0.0;            ///< SQUID asymmetry, in [0, 1]

  /// Throws std::invalid_argument when a field is outside its physical range.
  void validate() const;
};

/// Transmon energy-scale parameters, both in Hz*h units.
struct TransmonEnergyParams {
  double e_j_sigma_hz = 0.0;  ///< total Josephson energy E_J1 + E_J2
  double e_c_hz = 0.0;        ///< charging energy
  double d = 0.0;             ///< SQUID asymmetry

  void validate() const;
};

/// SQUID energy modulation k(d, x) = sqrt(cos^2 x + d^2 sin^2 x) for reduced
/// flux x; k is pi-periodic and takes values in [d, 1].
/// Throws std::domain_error when d is outside [0, 1].
double squid_modulation(double d, double x);

/// Reduced flux x = pi * (i - i_ss) / period for a given coil current.
double reduced_flux(const HamiltonianParams& p, double i_a);

/// Qubit transition frequency f_ge(I) = f_ge_max * sqrt(k(d, x)).
double transmon_f_ge(const HamiltonianParams& p, double i_a);

struct Branches {
  double f_plus_hz;
  double f_minus_hz;
};

/// Dressed-mode frequencies
///   f± = (f_c + f_ge)/2 ± sqrt(g^2 + (f_ge - f_c)^2 / 4).
/// Always f_plus >= f_minus, with the minimum gap 2g on resonance.
Branches dressed_branches(const HamiltonianParams& p, double i_a);

enum class Branch { plus, minus };

struct ModelPoint {
  double f_hz;
  Branch branch;
};

/// Single-valued model frequency: f_plus while it stays within the probe
/// window of width probe_span_hz centered on f_c, f_minus otherwise.
ModelPoint model_frequency_point(const HamiltonianParams& p, double i_a, double probe_span_hz);

double model_frequency(const HamiltonianParams& p, double i_a, double probe_span_hz);

struct LevelEnergy {
  double energy_hz;
  /// False when E_J(x)/E_C < 10, where the asymptotic level formula degrades.
  bool transmon_limit_ok;
};

/// Energy of transmon level m at reduced flux x:
///   E_m = m * sqrt(8 E_J(x) E_C) - (E_C / 12) * (6 m^2 + 6 m + 3).
LevelEnergy transmon_level_energy(const TransmonEnergyParams& tp, double x, int m);

struct EffectiveCoupling {
  double f_c_prime_hz;
  double g_prime_hz;
};

/// Flux-independent reparametrization of a transmon's flux-dependent coupling:
///   f_c' = f_c - g_max^2 / f_ge_max,   g' = g_max * sqrt(f_c / f_ge_max).
/// The fitted (f_c, g) values are these primed quantities.
EffectiveCoupling effective_coupling_params(double g_max_hz, double f_c_hz, double f_ge_max_hz);

}  // namespace stsfit

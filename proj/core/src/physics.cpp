#include "stsfit/physics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stsfit {

void HamiltonianParams::validate() const {
  if (!(f_c_hz > 0.0)) throw std::invalid_argument("HamiltonianParams: f_c must be positive");
  if (!(f_ge_max_hz > 0.0))
    throw std::invalid_argument("HamiltonianParams: f_ge_max must be positive");
  if (!(g_hz >= 0.0)) throw std::invalid_argument("HamiltonianParams: g must be non-negative");
  if (!(period_a > 0.0)) throw std::invalid_argument("HamiltonianParams: period must be positive");
  if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("HamiltonianParams: d outside [0, 1]");
  if (!std::isfinite(i_ss_a)) throw std::invalid_argument("HamiltonianParams: i_ss not finite");
}

void TransmonEnergyParams::validate() const {
  if (!(e_j_sigma_hz > 0.0))
    throw std::invalid_argument("TransmonEnergyParams: e_j_sigma must be positive");
  if (!(e_c_hz > 0.0)) throw std::invalid_argument("TransmonEnergyParams: e_c must be positive");
  if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("TransmonEnergyParams: d outside [0, 1]");
}

double squid_modulation(double d, double x) {
  if (!(d >= 0.0 && d <= 1.0)) throw std::domain_error("squid_modulation: d outside [0, 1]");
  const double c = std::cos(x);
  const double s = std::sin(x);
  return std::sqrt(c * c + d * d * s * s);
}

double reduced_flux(const HamiltonianParams& p, double i_a) {
  return std::numbers::pi * (i_a - p.i_ss_a) / p.period_a;
}

double transmon_f_ge(const HamiltonianParams& p, double i_a) {
  return p.f_ge_max_hz * std::sqrt(squid_modulation(p.d, reduced_flux(p, i_a)));
}

Branches dressed_branches(const HamiltonianParams& p, double i_a) {
  const double f_ge = transmon_f_ge(p, i_a);
  const double mid = 0.5 * (p.f_c_hz + f_ge);
  const double det = f_ge - p.f_c_hz;
  const double gap = std::sqrt(p.g_hz * p.g_hz + 0.25 * det * det);
  return {mid + gap, mid - gap};
}

ModelPoint model_frequency_point(const HamiltonianParams& p, double i_a, double probe_span_hz) {
  if (!(probe_span_hz > 0.0))
    throw std::invalid_argument("model_frequency: probe span must be positive");
  const Branches b = dressed_branches(p, i_a);
  if (std::abs(b.f_plus_hz - p.f_c_hz) < 0.5 * probe_span_hz)
    return {b.f_plus_hz, Branch::plus};
  return {b.f_minus_hz, Branch::minus};
}

double model_frequency(const HamiltonianParams& p, double i_a, double probe_span_hz) {
  return model_frequency_point(p, i_a, probe_span_hz).f_hz;
}

LevelEnergy transmon_level_energy(const TransmonEnergyParams& tp, double x, int m) {
  if (m < 0) throw std::invalid_argument("transmon_level_energy: level index must be >= 0");
  const double e_j = tp.e_j_sigma_hz * squid_modulation(tp.d, x);
  const double md = static_cast<double>(m);
  const double energy =
      md * std::sqrt(8.0 * e_j * tp.e_c_hz) - (tp.e_c_hz / 12.0) * (6.0 * md * md + 6.0 * md + 3.0);
  return {energy, e_j / tp.e_c_hz >= 10.0};
}

EffectiveCoupling effective_coupling_params(double g_max_hz, double f_c_hz, double f_ge_max_hz) {
  if (!(f_c_hz > 0.0) || !(f_ge_max_hz > 0.0) || !(g_max_hz >= 0.0))
    throw std::invalid_argument("effective_coupling_params: inputs must be positive");
  return {f_c_hz - g_max_hz * g_max_hz / f_ge_max_hz,
          g_max_hz * std::sqrt(f_c_hz / f_ge_max_hz)};
}

}  // namespace stsfit

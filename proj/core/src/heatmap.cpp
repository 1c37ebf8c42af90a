#include "stsfit/heatmap.hpp"

#include <cmath>
#include <stdexcept>

namespace stsfit {

double StsHeatmap::current_step_a() const {
  if (currents_a.size() < 2) throw std::invalid_argument("StsHeatmap: need >= 2 currents");
  return (currents_a.back() - currents_a.front()) / static_cast<double>(currents_a.size() - 1);
}

void StsHeatmap::validate() const {
  if (currents_a.size() < 2) throw std::invalid_argument("StsHeatmap: need >= 2 currents");
  if (probe_freqs_hz.size() < 2) throw std::invalid_argument("StsHeatmap: need >= 2 probe freqs");
  if (s21.size() != currents_a.size() * probe_freqs_hz.size())
    throw std::invalid_argument("StsHeatmap: s21 shape does not match the grids");

  const double step = current_step_a();
  if (!(step > 0.0)) throw std::invalid_argument("StsHeatmap: currents must be ascending");
  for (std::size_t n = 1; n < currents_a.size(); ++n) {
    const double local = currents_a[n] - currents_a[n - 1];
    if (!(local > 0.0)) throw std::invalid_argument("StsHeatmap: currents must be ascending");
    if (std::abs(local - step) > 1e-9 * std::abs(step))
      throw std::invalid_argument("StsHeatmap: current grid is not uniform");
  }
  for (std::size_t m = 1; m < probe_freqs_hz.size(); ++m)
    if (!(probe_freqs_hz[m] > probe_freqs_hz[m - 1]))
      throw std::invalid_argument("StsHeatmap: probe freqs must be strictly ascending");
  for (const auto& v : s21)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("StsHeatmap: non-finite s21 entry");
}

}  // namespace stsfit

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stsfit {

/// Complex transmission recorded on a rectangular (current x probe-frequency)
/// grid. Rows follow the current axis: s21[n * n_freqs() + m] is the response
/// at currents_a[n], probe_freqs_hz[m].
struct StsHeatmap {
  std::vector<double> currents_a;       ///< N values, uniform and ascending
  std::vector<double> probe_freqs_hz;   ///< M values, ascending
  std::vector<std::complex<double>> s21;  ///< row-major N x M
  std::string meta = "{}";              ///< free-form provenance, JSON object text

  std::size_t n_currents() const { return currents_a.size(); }
  std::size_t n_freqs() const { return probe_freqs_hz.size(); }

  std::span<const std::complex<double>> slice(std::size_t n) const {
    return {s21.data() + n * n_freqs(), n_freqs()};
  }
  std::span<std::complex<double>> slice(std::size_t n) {
    return {s21.data() + n * n_freqs(), n_freqs()};
  }

  double probe_span_hz() const { return probe_freqs_hz.back() - probe_freqs_hz.front(); }
  double current_step_a() const;

  /// Throws std::invalid_argument when the grids are not uniform/ascending,
  /// the matrix shape is wrong, or any entry is non-finite.
  void validate() const;
};

}  // namespace stsfit

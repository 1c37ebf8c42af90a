#pragma once

#include <stdexcept>
#include <string>

namespace stsfit {

/// Failure to read, parse or validate a heatmap file.
struct HeatmapIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fewer accepted slices than the downstream fit can work with.
struct EmptySpectrumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The autocorrelation of the standardized trace has no usable local maximum.
struct NoPeriodError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Any unrecoverable failure of the model fit itself.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stsfit

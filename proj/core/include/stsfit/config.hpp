#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "stsfit/pipeline.hpp"

namespace stsfit {

/// Everything a CLI run needs; defaults reproduce the module defaults
/// (threshold k = 5, standard brute grid, standard simplex tolerances).
/// Round-trips through JSON so runs can be replayed from a config file.
struct RunConfig {
  std::string input;
  std::string out_dir = ".";
  QubitHint hint = QubitHint::auto_detect;
  double threshold_k = 5.0;
  std::optional<AxisSpec> grid_f_c_hz;
  std::optional<AxisSpec> grid_g_hz;
  std::optional<AxisSpec> grid_f_ge_max_hz;
  std::optional<AxisSpec> grid_d;
  double nm_diameter_tol = 1e-6;
  double nm_loss_spread_tol = 1e-4;
  int nm_max_iterations = 2000;
  std::uint64_t seed = 1;
  int workers = 0;
  bool verbose = false;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

const char* hint_name(QubitHint hint);
QubitHint hint_from_name(const std::string& name);

/// Maps the flat run configuration onto the per-stage analysis options.
AnalysisConfig to_analysis_config(const RunConfig& cfg);

}  // namespace stsfit

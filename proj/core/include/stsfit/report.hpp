#pragma once

#include <string>

#include "stsfit/config.hpp"
#include "stsfit/noise_harness.hpp"
#include "stsfit/pipeline.hpp"

namespace stsfit {

/// Full fit report, schema "sts-fit-report/1". Raw values are SI (Hz, A) with
/// units in the key names; a params_display block repeats them in GHz / MHz /
/// uA. Deterministic for identical inputs: no timestamps or wall-clock data.
std::string fit_report_json(const AnalysisResult& result, const RunConfig& cfg);

/// Stage timing breakdown, kept out of the fit report so that report.json is
/// byte-identical across reruns.
std::string timings_json(const StageTimings& timings);

/// Noise-sweep report, schema "sts-sweep-report/1".
std::string sweep_report_json(const SnrSweepResult& sweep, const RunConfig& cfg);

/// Per-slice CSV: current_a,f_r_hz,converged. Excluded slices keep an empty
/// f_r field.
std::string spectrum_csv(const StsHeatmap& map, const ExtractedSpectrum& spectrum);

const char* pattern_name(Pattern pattern);
const char* exclusion_reason_name(ExclusionReason reason);

}  // namespace stsfit

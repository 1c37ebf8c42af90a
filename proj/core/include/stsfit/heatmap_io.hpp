#pragma once

#include <filesystem>
#include <string>

#include "stsfit/heatmap.hpp"

namespace stsfit {

/// File format "sts-heatmap/1": a UTF-8 JSON object
///   {"format": "sts-heatmap/1",
///    "currents_a": [N numbers], "probe_freqs_hz": [M numbers],
///    "s21_real": [N arrays of M], "s21_imag": [N arrays of M],
///    "meta": {...}}
/// Numbers are IEEE-754 doubles in shortest round-trip decimal form.
std::string heatmap_to_json_text(const StsHeatmap& map);
StsHeatmap heatmap_from_json_text(const std::string& text);

/// Throws HeatmapIoError on any read/parse/validation failure.
StsHeatmap read_heatmap(const std::filesystem::path& path);
void write_heatmap(const std::filesystem::path& path, const StsHeatmap& map);

}  // namespace stsfit

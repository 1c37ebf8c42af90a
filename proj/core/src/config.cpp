#include "stsfit/config.hpp"

#include <stdexcept>

#include <json.hpp>

namespace stsfit {

namespace {

nlohmann::json axis_to_json(const AxisSpec& axis) {
  return {{"min", axis.min}, {"max", axis.max}, {"steps", axis.steps}};
}

AxisSpec axis_from_json(const nlohmann::json& j) {
  AxisSpec axis;
  axis.min = j.at("min").get<double>();
  axis.max = j.at("max").get<double>();
  axis.steps = j.at("steps").get<std::size_t>();
  if (axis.steps < 1 || !(axis.min <= axis.max))
    throw std::invalid_argument("grid axis: need min <= max and steps >= 1");
  return axis;
}

}  // namespace

const char* hint_name(QubitHint hint) {
  switch (hint) {
    case QubitHint::above: return "above";
    case QubitHint::below: return "below";
    case QubitHint::auto_detect: return "auto";
  }
  return "auto";
}

QubitHint hint_from_name(const std::string& name) {
  if (name == "above") return QubitHint::above;
  if (name == "below") return QubitHint::below;
  if (name == "auto") return QubitHint::auto_detect;
  throw std::invalid_argument("hint must be one of above|below|auto");
}

std::string run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["input"] = cfg.input;
  j["out_dir"] = cfg.out_dir;
  j["hint"] = hint_name(cfg.hint);
  j["threshold_k"] = cfg.threshold_k;
  nlohmann::json grid = nlohmann::json::object();
  if (cfg.grid_f_c_hz) grid["f_c_hz"] = axis_to_json(*cfg.grid_f_c_hz);
  if (cfg.grid_g_hz) grid["g_hz"] = axis_to_json(*cfg.grid_g_hz);
  if (cfg.grid_f_ge_max_hz) grid["f_ge_max_hz"] = axis_to_json(*cfg.grid_f_ge_max_hz);
  if (cfg.grid_d) grid["d"] = axis_to_json(*cfg.grid_d);
  j["grid_overrides"] = grid;
  j["nm"] = {{"diameter_tol", cfg.nm_diameter_tol},
             {"loss_spread_tol", cfg.nm_loss_spread_tol},
             {"max_iterations", cfg.nm_max_iterations}};
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["verbose"] = cfg.verbose;
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (j.contains("input")) cfg.input = j.at("input").get<std::string>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("hint")) cfg.hint = hint_from_name(j.at("hint").get<std::string>());
  if (j.contains("threshold_k")) cfg.threshold_k = j.at("threshold_k").get<double>();
  if (j.contains("grid_overrides")) {
    const auto& grid = j.at("grid_overrides");
    if (grid.contains("f_c_hz")) cfg.grid_f_c_hz = axis_from_json(grid.at("f_c_hz"));
    if (grid.contains("g_hz")) cfg.grid_g_hz = axis_from_json(grid.at("g_hz"));
    if (grid.contains("f_ge_max_hz"))
      cfg.grid_f_ge_max_hz = axis_from_json(grid.at("f_ge_max_hz"));
    if (grid.contains("d")) cfg.grid_d = axis_from_json(grid.at("d"));
  }
  if (j.contains("nm")) {
    const auto& nm = j.at("nm");
    if (nm.contains("diameter_tol")) cfg.nm_diameter_tol = nm.at("diameter_tol").get<double>();
    if (nm.contains("loss_spread_tol"))
      cfg.nm_loss_spread_tol = nm.at("loss_spread_tol").get<double>();
    if (nm.contains("max_iterations")) cfg.nm_max_iterations = nm.at("max_iterations").get<int>();
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
  if (j.contains("verbose")) cfg.verbose = j.at("verbose").get<bool>();
  return cfg;
}

AnalysisConfig to_analysis_config(const RunConfig& cfg) {
  AnalysisConfig out;
  out.extract.slice.threshold_k = cfg.threshold_k;
  out.fit.hint = cfg.hint;
  if (cfg.grid_f_c_hz) out.fit.grid.f_c_hz = *cfg.grid_f_c_hz;
  if (cfg.grid_g_hz) out.fit.grid.g_hz = *cfg.grid_g_hz;
  if (cfg.grid_f_ge_max_hz) out.fit.grid.f_ge_max_hz = *cfg.grid_f_ge_max_hz;
  if (cfg.grid_d) out.fit.grid.d = *cfg.grid_d;
  out.fit.nm.options.diameter_tol = cfg.nm_diameter_tol;
  out.fit.nm.options.loss_spread_tol = cfg.nm_loss_spread_tol;
  out.fit.nm.options.max_iterations = cfg.nm_max_iterations;
  out.workers = cfg.workers;
  out.uncertainty_at_truth = true;
  return out;
}

}  // namespace stsfit

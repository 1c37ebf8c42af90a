#include "stsfit/report.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace stsfit {

namespace {

nlohmann::json params_json(const HamiltonianParams& p) {
  return {{"f_c_hz", p.f_c_hz},         {"g_hz", p.g_hz},
          {"period_a", p.period_a},     {"i_ss_a", p.i_ss_a},
          {"f_ge_max_hz", p.f_ge_max_hz}, {"d", p.d}};
}

nlohmann::json params_display_json(const HamiltonianParams& p) {
  return {{"f_c_ghz", p.f_c_hz / 1e9},         {"g_mhz", p.g_hz / 1e6},
          {"period_ua", p.period_a / 1e-6},    {"i_ss_ua", p.i_ss_a / 1e-6},
          {"f_ge_max_ghz", p.f_ge_max_hz / 1e9}, {"d", p.d}};
}

nlohmann::json matrix_json(const Matrix6& m) {
  auto rows = nlohmann::json::array();
  for (const auto& row : m) rows.push_back(std::vector<double>(row.begin(), row.end()));
  return rows;
}

double json_safe(double v) { return std::isfinite(v) ? v : 0.0; }

nlohmann::json uncertainty_json(const UncertaintyReport& u) {
  nlohmann::json j;
  j["sigma2_hz2"] = u.sigma2_hz2;
  nlohmann::json crlb_sd = nlohmann::json::object();
  nlohmann::json unbounded = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    crlb_sd[param_names()[k]] = std::isfinite(u.crlb.sd[k]) ? nlohmann::json(u.crlb.sd[k])
                                                            : nlohmann::json(nullptr);
    unbounded[param_names()[k]] = u.crlb.unbounded[k];
  }
  j["crlb_sd"] = crlb_sd;
  j["crlb_unbounded"] = unbounded;
  j["crlb_floored_directions"] = u.crlb.floored_directions;
  j["fisher"] = matrix_json(u.fisher.fisher);
  j["fisher_hessian_form"] = matrix_json(u.fisher.fisher_hessian_form);
  j["fisher_cross_check_rel_err"] = u.fisher.cross_check_rel_err;
  j["fisher_excluded_points"] = u.fisher.excluded_points;
  auto pairs = nlohmann::json::array();
  for (const auto& ep : u.eigenpairs) {
    nlohmann::json vec = nlohmann::json::object();
    for (std::size_t k = 0; k < kNumParams; ++k) vec[param_names()[k]] = ep.vector[k];
    pairs.push_back({{"value", ep.value}, {"vector", vec}});
  }
  j["hessian_eigenpairs"] = pairs;
  return j;
}

nlohmann::json outcome_json(const FitOutcome& fit, bool with_residuals) {
  nlohmann::json j;
  j["params"] = params_json(fit.params);
  j["params_display"] = params_display_json(fit.params);
  j["loss_sum_hz2"] = fit.loss_sum_hz2;
  j["rms_per_point_hz"] = fit.rms_per_point_hz;
  j["rms_per_point_khz"] = fit.rms_per_point_hz / 1e3;
  j["hint_used"] = hint_name(fit.hint_used);
  j["i_ss_seed_a"] = fit.i_ss_seed_a;
  j["nm_converged"] = fit.nm_converged;
  if (with_residuals) {
    auto residuals = nlohmann::json::array();
    for (const auto& r : fit.residuals)
      residuals.push_back({{"current_a", r.current_a},
                           {"residual_hz", r.residual_hz},
                           {"branch", r.branch == Branch::plus ? "+" : "-"}});
    j["residuals"] = residuals;
  }
  return j;
}

}  // namespace

const char* pattern_name(Pattern pattern) {
  switch (pattern) {
    case Pattern::anticrossing: return "anticrossing";
    case Pattern::continuous: return "continuous";
    case Pattern::ambiguous: return "ambiguous";
  }
  return "ambiguous";
}

const char* exclusion_reason_name(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::below_threshold: return "below_threshold";
    case ExclusionReason::fit_failed: return "fit_failed";
    case ExclusionReason::too_few_points: return "too_few_points";
  }
  return "fit_failed";
}

std::string fit_report_json(const AnalysisResult& result, const RunConfig& cfg) {
  nlohmann::json j;
  j["format"] = "sts-fit-report/1";
  j["config"] = nlohmann::json::parse(run_config_to_json(cfg));

  j["spectrum"] = {{"n_points", result.spectrum.points.size()},
                   {"n_excluded", result.spectrum.excluded.size()},
                   {"mean_f_r_hz", result.spectrum.mean_f_r_hz},
                   {"current_step_a", result.spectrum.current_step_a}};
  auto excluded = nlohmann::json::array();
  for (const auto& e : result.spectrum.excluded)
    excluded.push_back({{"index", e.index}, {"reason", exclusion_reason_name(e.reason)}});
  j["excluded_slices"] = excluded;

  j["pattern"] = pattern_name(result.period.pattern);
  j["period_phase"] = {{"period_a", result.period.period_a},
                       {"period_ua", result.period.period_a / 1e-6},
                       {"phi_a", result.period.phi_a},
                       {"duty", result.period.duty},
                       {"i_ss_candidates_a", result.period.i_ss_candidates_a}};

  j["fit"] = outcome_json(result.fit, true);
  auto alternates = nlohmann::json::array();
  for (const auto& alt : result.fit.alternates) alternates.push_back(outcome_json(alt, false));
  j["alternates"] = alternates;

  j["uncertainty"] = uncertainty_json(result.uncertainty);
  if (result.uncertainty_at_truth)
    j["uncertainty_at_truth"] = uncertainty_json(*result.uncertainty_at_truth);
  return j.dump(2);
}

std::string timings_json(const StageTimings& t) {
  nlohmann::json j;
  j["extract_f_r_s"] = t.extract_s;
  j["period_i_ss_s"] = t.period_s;
  j["brute_s"] = t.brute_s;
  j["nelder_mead_s"] = t.polish_s;
  j["total_s"] = t.total_s;
  return j.dump(2);
}

std::string sweep_report_json(const SnrSweepResult& sweep, const RunConfig& cfg) {
  nlohmann::json j;
  j["format"] = "sts-sweep-report/1";
  j["config"] = nlohmann::json::parse(run_config_to_json(cfg));
  j["reps"] = sweep.reps;
  j["sigma1_levels"] = sweep.sigma1_levels;
  std::vector<double> snr;
  for (double v : sweep.snr_levels) snr.push_back(json_safe(v));
  j["snr_levels"] = snr;
  j["divergences"] = sweep.divergences;
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    std::vector<double> med, p25, p75;
    for (const auto& s : sweep.per_param[k]) {
      med.push_back(json_safe(s.median));
      p25.push_back(json_safe(s.p25));
      p75.push_back(json_safe(s.p75));
    }
    params[param_names()[k]] = {{"median", med}, {"p25", p25}, {"p75", p75}};
  }
  j["params"] = params;
  if (!sweep.raw[0].empty()) {
    nlohmann::json raw = nlohmann::json::object();
    for (std::size_t k = 0; k < kNumParams; ++k) raw[param_names()[k]] = sweep.raw[k];
    j["raw_samples"] = raw;
  }
  return j.dump(2);
}

std::string spectrum_csv(const StsHeatmap& map, const ExtractedSpectrum& spectrum) {
  std::ostringstream out;
  out << "current_a,f_r_hz,converged\n";
  out.precision(17);
  std::vector<char> converged(map.n_currents(), 0);
  std::vector<double> f_r(map.n_currents(), 0.0);
  for (const auto& p : spectrum.points) {
    converged[p.index] = 1;
    f_r[p.index] = p.f_r_hz;
  }
  for (std::size_t row = 0; row < map.n_currents(); ++row) {
    out << map.currents_a[row] << ',';
    if (converged[row]) out << f_r[row];
    out << ',' << (converged[row] ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace stsfit

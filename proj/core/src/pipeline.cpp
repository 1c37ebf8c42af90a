#include "stsfit/pipeline.hpp"

#include <chrono>

#include <json.hpp>

namespace stsfit {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0, Clock::time_point t1) {
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

std::optional<HamiltonianParams> truth_from_meta(const StsHeatmap& map) {
  try {
    const auto meta = nlohmann::json::parse(map.meta);
    if (!meta.is_object() || !meta.contains("truth")) return std::nullopt;
    const auto& t = meta.at("truth");
    HamiltonianParams p;
    p.f_c_hz = t.at("f_c_hz").get<double>();
    p.g_hz = t.at("g_hz").get<double>();
    p.period_a = t.at("period_a").get<double>();
    p.i_ss_a = t.at("i_ss_a").get<double>();
    p.f_ge_max_hz = t.at("f_ge_max_hz").get<double>();
    p.d = t.at("d").get<double>();
    p.validate();
    return p;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

AnalysisResult analyze(const StsHeatmap& map, const AnalysisConfig& cfg) {
  map.validate();
  AnalysisResult result;

  ExtractConfig extract_cfg = cfg.extract;
  FitConfig fit_cfg = cfg.fit;
  if (cfg.workers != 0) {
    extract_cfg.workers = cfg.workers;
    fit_cfg.workers = cfg.workers;
  }

  const auto t0 = Clock::now();
  result.spectrum = extract_spectrum(map, extract_cfg);
  const auto t1 = Clock::now();
  result.period = estimate_period_phase(result.spectrum, map.n_currents(), cfg.period);
  const auto t2 = Clock::now();
  result.fit = fit_full(result.spectrum, result.period, map.probe_span_hz(), fit_cfg);
  result.uncertainty = uncertainty_report(result.spectrum, result.fit, map.probe_span_hz());

  if (cfg.uncertainty_at_truth) {
    if (const auto truth = truth_from_meta(map)) {
      std::vector<double> residuals;
      residuals.reserve(result.spectrum.points.size());
      for (const auto& p : result.spectrum.points)
        residuals.push_back(p.f_r_hz - model_frequency(*truth, p.current_a, map.probe_span_hz()));
      const double sigma2 = estimate_sigma2(residuals, kNumParams);
      result.uncertainty_at_truth =
          uncertainty_report_at(result.spectrum, *truth, sigma2, map.probe_span_hz());
    }
  }
  const auto t3 = Clock::now();

  result.timings.extract_s = elapsed(t0, t1);
  result.timings.period_s = elapsed(t1, t2);
  result.timings.brute_s = result.fit.brute_s;
  result.timings.polish_s = result.fit.polish_s;
  result.timings.total_s = elapsed(t0, t3);
  return result;
}

}  // namespace stsfit

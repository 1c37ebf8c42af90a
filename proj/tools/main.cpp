// stsfit: analyze single-tone spectroscopy heatmaps of qubit-resonator cells.
//
// Subcommands:
//   fit    run the full analysis pipeline on a heatmap file
//   synth  generate a synthetic heatmap from model parameters
//   sweep  noise-robustness sweep: repeat fits at decreasing SNR

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stsfit/common.hpp"
#include "stsfit/config.hpp"
#include "stsfit/errors.hpp"
#include "stsfit/heatmap_io.hpp"
#include "stsfit/noise_harness.hpp"
#include "stsfit/pipeline.hpp"
#include "stsfit/report.hpp"
#include "stsfit/svg.hpp"
#include "stsfit/synth.hpp"

namespace fs = std::filesystem;
using namespace stsfit;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitEmptySpectrum = 2;
constexpr int kExitFitFailure = 3;

struct StageGuard {
  std::string name = "startup";
};

int exit_code_for(const StageGuard& stage, const std::exception& e) {
  if (dynamic_cast<const HeatmapIoError*>(&e)) return kExitIo;
  if (dynamic_cast<const EmptySpectrumError*>(&e)) return kExitEmptySpectrum;
  if (stage.name == "io" || stage.name == "config") return kExitIo;
  return kExitFitFailure;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HeatmapIoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw HeatmapIoError("failed writing " + path.string());
}

AxisSpec parse_axis(const std::string& text) {
  AxisSpec axis;
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("grid override needs min:max:steps");
  axis.min = std::stod(text.substr(0, c1));
  axis.max = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  axis.steps = static_cast<std::size_t>(std::stoul(text.substr(c2 + 1)));
  if (axis.steps < 1 || !(axis.min <= axis.max))
    throw std::invalid_argument("grid override needs min <= max and steps >= 1");
  return axis;
}

void apply_grid_override(RunConfig& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("grid override format: key=min:max:steps");
  const std::string key = spec.substr(0, eq);
  const AxisSpec axis = parse_axis(spec.substr(eq + 1));
  if (key == "f_c")
    cfg.grid_f_c_hz = axis;
  else if (key == "g")
    cfg.grid_g_hz = axis;
  else if (key == "f_ge_max")
    cfg.grid_f_ge_max_hz = axis;
  else if (key == "d")
    cfg.grid_d = axis;
  else
    throw std::invalid_argument("unknown grid key '" + key + "' (f_c|g|f_ge_max|d)");
}

void print_fit_summary(const AnalysisResult& result) {
  const auto& p = result.fit.params;
  std::printf("pattern: %s\n", pattern_name(result.period.pattern));
  std::printf("f_c      = %.6f GHz\n", p.f_c_hz / 1e9);
  std::printf("g        = %.3f MHz\n", p.g_hz / 1e6);
  std::printf("period   = %.4f uA\n", p.period_a / 1e-6);
  std::printf("i_ss     = %.4f uA\n", p.i_ss_a / 1e-6);
  std::printf("f_ge_max = %.4f GHz\n", p.f_ge_max_hz / 1e9);
  std::printf("d        = %.4f\n", p.d);
  std::printf("rms per point = %.3f kHz over %zu points (%zu excluded)\n",
              result.fit.rms_per_point_hz / 1e3, result.spectrum.points.size(),
              result.spectrum.excluded.size());
  if (!result.fit.alternates.empty())
    std::printf("note: %zu near-tie alternate fit(s) in report\n",
                result.fit.alternates.size());
  const auto& t = result.timings;
  std::printf("time [s]: extract %.2f | period %.2f | brute %.2f | N-M %.2f | total %.2f\n",
              t.extract_s, t.period_s, t.brute_s, t.polish_s, t.total_s);
}

void write_fit_plots(const fs::path& dir, const StsHeatmap& map, const AnalysisResult& result) {
  std::vector<double> data_i, data_f;
  for (const auto& pt : result.spectrum.points) {
    data_i.push_back(pt.current_a / 1e-6);
    data_f.push_back(pt.f_r_hz / 1e9);
  }
  std::vector<double> model_i, model_f;
  for (double i : map.currents_a) {
    model_i.push_back(i / 1e-6);
    model_f.push_back(model_frequency(result.fit.params, i, map.probe_span_hz()) / 1e9);
  }
  SvgPlot fit_plot(760, 480, "extracted spectrum and fitted model", "current [uA]",
                   "frequency [GHz]");
  fit_plot.add_line(model_i, model_f, "#ff7f0e");
  fit_plot.add_points(data_i, data_f, "#1f77b4", 2.5);
  write_text(dir / "fit.svg", fit_plot.render());

  std::vector<double> res_i, res_khz;
  for (const auto& r : result.fit.residuals) {
    res_i.push_back(r.current_a / 1e-6);
    res_khz.push_back(r.residual_hz / 1e3);
  }
  SvgPlot res_plot(760, 320, "fit residuals", "current [uA]", "residual [kHz]");
  res_plot.add_points(res_i, res_khz, "#2ca02c", 2.5);
  write_text(dir / "residuals.svg", res_plot.render());
}

int run_fit(const RunConfig& cfg, StageGuard& stage) {
  stage.name = "io";
  const StsHeatmap map = read_heatmap(cfg.input);
  fs::create_directories(cfg.out_dir);

  stage.name = "analyze";
  const AnalysisConfig analysis = to_analysis_config(cfg);
  const AnalysisResult result = analyze(map, analysis);

  stage.name = "report";
  const fs::path dir(cfg.out_dir);
  write_text(dir / "report.json", fit_report_json(result, cfg));
  write_text(dir / "timings.json", timings_json(result.timings));
  write_text(dir / "spectrum.csv", spectrum_csv(map, result.spectrum));
  write_fit_plots(dir, map, result);
  print_fit_summary(result);
  return 0;
}

struct SynthOptions {
  std::string preset = "anticrossing";
  HamiltonianParams truth;
  NotchNuisanceParams nuisance;
  double current_min_a = 0.0, current_max_a = 0.0;
  std::size_t current_points = 0;
  double probe_center_hz = 0.0, probe_span_hz = 0.0;
  std::size_t probe_points = 0;
  double noise_sd = -1.0;
  double snr = 0.0;
  std::uint64_t seed = 1;
};

/// The three qualitatively different resonator-qubit dispositions.
SynthOptions preset_options(const std::string& name) {
  SynthOptions opt;
  opt.preset = name;
  opt.nuisance = {1.0, 0.3, 40e-9, 3000.0, 6000.0, 0.15};
  opt.truth.g_hz = 30e6;
  opt.truth.period_a = 88e-6;
  opt.truth.i_ss_a = 13e-6;
  opt.current_min_a = -88e-6;
  opt.current_max_a = 88e-6;
  opt.current_points = 221;
  opt.probe_span_hz = 100e6;
  opt.probe_points = 401;
  opt.noise_sd = 0.0;
  if (name == "anticrossing") {
    // Qubit band sweeps through the resonator; the cavity sits above the
    // probe-window center so near-crossing slices lose their dip.
    opt.truth.f_c_hz = 6.44e9;
    opt.truth.f_ge_max_hz = 8.5e9;
    opt.truth.d = 0.3;
    opt.probe_center_hz = 6.42e9;
  } else if (name == "qubit-above") {
    opt.truth.f_c_hz = 6.4e9;
    opt.truth.f_ge_max_hz = 9.5e9;
    opt.truth.d = 0.5;
    opt.probe_center_hz = 6.4e9;
  } else if (name == "qubit-below") {
    opt.truth.f_c_hz = 6.4e9;
    opt.truth.f_ge_max_hz = 5.9e9;
    opt.truth.d = 0.35;
    opt.probe_center_hz = 6.4e9;
  } else {
    throw std::invalid_argument("unknown preset '" + name +
                                "' (anticrossing|qubit-above|qubit-below)");
  }
  return opt;
}

int run_synth(const SynthOptions& opt, const std::string& out_path, StageGuard& stage) {
  stage.name = "config";
  opt.truth.validate();
  opt.nuisance.validate();
  double noise_sd = std::max(opt.noise_sd, 0.0);
  if (opt.snr > 0.0) noise_sd = opt.nuisance.circle_radius() / opt.snr;

  stage.name = "synth";
  const auto currents = linspace(opt.current_min_a, opt.current_max_a, opt.current_points);
  const auto probes = linspace(opt.probe_center_hz - 0.5 * opt.probe_span_hz,
                               opt.probe_center_hz + 0.5 * opt.probe_span_hz, opt.probe_points);
  const StsHeatmap map =
      generate_heatmap(opt.truth, opt.nuisance, currents, probes, noise_sd, opt.seed);

  stage.name = "io";
  write_heatmap(out_path, map);
  std::printf("wrote %s: %zu currents x %zu freqs, noise_sd %.4g (circle radius %.4g)\n",
              out_path.c_str(), map.n_currents(), map.n_freqs(), noise_sd,
              opt.nuisance.circle_radius());
  return 0;
}

int run_sweep(const RunConfig& cfg, std::size_t reps, std::vector<double> sigma1_levels,
              StageGuard& stage) {
  stage.name = "io";
  const StsHeatmap map = read_heatmap(cfg.input);
  fs::create_directories(cfg.out_dir);

  stage.name = "sweep";
  SweepConfig sweep_cfg;
  sweep_cfg.analysis = to_analysis_config(cfg);
  sweep_cfg.analysis.uncertainty_at_truth = false;
  sweep_cfg.reps = reps;
  sweep_cfg.base_seed = cfg.seed;
  sweep_cfg.workers = cfg.workers;
  sweep_cfg.keep_samples = cfg.verbose;

  const SnrScale scale = estimate_snr_scale(map, sweep_cfg.analysis.extract);
  sweep_cfg.circle_radius = scale.circle_radius;
  sweep_cfg.sigma0 = scale.sigma0;
  if (sigma1_levels.empty()) {
    // Default schedule: target SNRs below the original data SNR.
    for (double snr : {12.0, 8.0, 6.0, 4.0, 3.0, 2.5, 2.0}) {
      const double total = scale.circle_radius / snr;
      const double extra2 = total * total - scale.sigma0 * scale.sigma0;
      if (extra2 > 0.0) sigma1_levels.push_back(std::sqrt(extra2));
    }
    if (sigma1_levels.empty())
      throw FitError("sweep: data SNR already below the default target schedule");
  }
  sweep_cfg.sigma1_levels = std::move(sigma1_levels);

  const SnrSweepResult sweep = snr_sweep(map, sweep_cfg);

  stage.name = "report";
  const fs::path dir(cfg.out_dir);
  write_text(dir / "sweep_report.json", sweep_report_json(sweep, cfg));
  const double display[kNumParams] = {1e9, 1e6, 1e-6, 1e-6, 1e9, 1.0};
  const char* unit[kNumParams] = {"GHz", "MHz", "uA", "uA", "GHz", ""};
  for (std::size_t k = 0; k < kNumParams; ++k) {
    std::vector<double> xs, med, lo, hi;
    for (std::size_t level = 0; level < sweep.snr_levels.size(); ++level) {
      const auto& s = sweep.per_param[k][level];
      if (!std::isfinite(s.median)) continue;
      xs.push_back(sweep.snr_levels[level]);
      med.push_back(s.median / display[k]);
      lo.push_back(s.p25 / display[k]);
      hi.push_back(s.p75 / display[k]);
    }
    SvgPlot plot(640, 400, std::string(param_names()[k]) + " vs SNR", "SNR",
                 std::string(param_names()[k]) + (unit[k][0] ? std::string(" [") + unit[k] + "]"
                                                             : std::string()));
    plot.add_band(xs, lo, hi, "#1f77b4", 0.25);
    plot.add_line(xs, med, "#1f77b4", 2.0);
    write_text(dir / (std::string("sweep_") + param_names()[k] + ".svg"), plot.render());
  }
  for (std::size_t level = 0; level < sweep.snr_levels.size(); ++level)
    std::printf("SNR %6.2f: %zu/%zu divergent\n", sweep.snr_levels[level],
                sweep.divergences[level], sweep.reps);
  std::printf("wrote %s\n", (dir / "sweep_report.json").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-tone spectroscopy analyzer for qubit-resonator cells"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::vector<std::string> grid_overrides;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--input", cfg.input, "heatmap JSON file (sts-heatmap/1)");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--hint", [&cfg](const std::vector<std::string>& v) {
      cfg.hint = hint_from_name(v.back());
      return true;
    }, "qubit frequency relative to the resonator: above|below|auto");
    cmd->add_option("--threshold-k", cfg.threshold_k, "dip-presence threshold in noise-SD units");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--workers", cfg.workers, "worker threads (0 = all cores)");
    cmd->add_option("--grid-override", grid_overrides,
                    "brute grid override key=min:max:steps (key: f_c|g|f_ge_max|d)");
    cmd->add_flag("--verbose", cfg.verbose, "keep raw samples / extra output");
    cmd->add_option("--config", config_path, "JSON run-config file (flags take precedence)");
  };

  CLI::App* fit_cmd = app.add_subcommand("fit", "analyze a heatmap end to end");
  add_common(fit_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "noise-robustness sweep");
  add_common(sweep_cmd);
  std::size_t reps = 50;
  std::vector<double> sigma1_levels;
  sweep_cmd->add_option("--reps", reps, "fit repetitions per noise level");
  sweep_cmd->add_option("--sigma1", sigma1_levels, "added complex-noise SD levels");

  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic heatmap");
  std::string synth_out = "heatmap.json";
  std::string preset = "anticrossing";
  double f_c = 0, g = -1, f_ge_max = 0, d = -1, period = 0, i_ss_in = 1e301;
  double cur_min = 1e301, cur_max = 1e301, probe_center = 0, probe_span = 0;
  std::size_t cur_points = 0, probe_points = 0;
  double noise_sd = -1.0, snr = 0.0;
  std::uint64_t synth_seed = 1;
  synth_cmd->add_option("--out", synth_out, "output heatmap path");
  synth_cmd->add_option("--preset", preset, "anticrossing|qubit-above|qubit-below");
  synth_cmd->add_option("--f-c", f_c, "bare cavity frequency [Hz]");
  synth_cmd->add_option("--g", g, "coupling [Hz]");
  synth_cmd->add_option("--f-ge-max", f_ge_max, "sweet-spot qubit frequency [Hz]");
  synth_cmd->add_option("--d", d, "SQUID asymmetry");
  synth_cmd->add_option("--period", period, "current period [A]");
  synth_cmd->add_option("--i-ss", i_ss_in, "sweet-spot current [A]");
  synth_cmd->add_option("--current-min", cur_min, "current grid start [A]");
  synth_cmd->add_option("--current-max", cur_max, "current grid end [A]");
  synth_cmd->add_option("--current-points", cur_points, "current grid length");
  synth_cmd->add_option("--probe-center", probe_center, "probe window center [Hz]");
  synth_cmd->add_option("--probe-span", probe_span, "probe window span [Hz]");
  synth_cmd->add_option("--probe-points", probe_points, "probe grid length");
  synth_cmd->add_option("--noise-sd", noise_sd, "complex noise SD");
  synth_cmd->add_option("--snr", snr, "set noise from target SNR instead of --noise-sd");
  synth_cmd->add_option("--seed", synth_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  StageGuard stage;
  try {
    if (!config_path.empty()) {
      stage.name = "config";
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw HeatmapIoError("cannot open config " + config_path);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      RunConfig from_file = run_config_from_json(text);
      // flags given on the command line win over the file
      if (cfg.input.empty()) cfg.input = from_file.input;
      if (cfg.out_dir == ".") cfg.out_dir = from_file.out_dir;
      if (app.get_subcommand()->count("--hint") == 0) cfg.hint = from_file.hint;
      if (app.get_subcommand()->count("--threshold-k") == 0)
        cfg.threshold_k = from_file.threshold_k;
      if (app.get_subcommand()->count("--seed") == 0) cfg.seed = from_file.seed;
      if (app.get_subcommand()->count("--workers") == 0) cfg.workers = from_file.workers;
      if (app.get_subcommand()->count("--verbose") == 0) cfg.verbose = from_file.verbose;
      if (grid_overrides.empty()) {
        cfg.grid_f_c_hz = from_file.grid_f_c_hz;
        cfg.grid_g_hz = from_file.grid_g_hz;
        cfg.grid_f_ge_max_hz = from_file.grid_f_ge_max_hz;
        cfg.grid_d = from_file.grid_d;
      }
      cfg.nm_diameter_tol = from_file.nm_diameter_tol;
      cfg.nm_loss_spread_tol = from_file.nm_loss_spread_tol;
      cfg.nm_max_iterations = from_file.nm_max_iterations;
    }
    stage.name = "config";
    for (const auto& o : grid_overrides) apply_grid_override(cfg, o);

    if (fit_cmd->parsed()) {
      if (cfg.input.empty()) throw HeatmapIoError("fit: --input is required");
      return run_fit(cfg, stage);
    }
    if (sweep_cmd->parsed()) {
      if (cfg.input.empty()) throw HeatmapIoError("sweep: --input is required");
      return run_sweep(cfg, reps, sigma1_levels, stage);
    }
    if (synth_cmd->parsed()) {
      SynthOptions opt = preset_options(preset);
      if (f_c > 0) opt.truth.f_c_hz = f_c;
      if (g >= 0) opt.truth.g_hz = g;
      if (f_ge_max > 0) opt.truth.f_ge_max_hz = f_ge_max;
      if (d >= 0) opt.truth.d = d;
      if (period > 0) opt.truth.period_a = period;
      if (i_ss_in < 1e300) opt.truth.i_ss_a = i_ss_in;
      if (cur_min < 1e300) opt.current_min_a = cur_min;
      if (cur_max < 1e300) opt.current_max_a = cur_max;
      if (cur_points > 0) opt.current_points = cur_points;
      if (probe_center > 0) opt.probe_center_hz = probe_center;
      if (probe_span > 0) opt.probe_span_hz = probe_span;
      if (probe_points > 0) opt.probe_points = probe_points;
      if (noise_sd >= 0) opt.noise_sd = noise_sd;
      opt.snr = snr;
      opt.seed = synth_seed;
      return run_synth(opt, synth_out, stage);
    }
  } catch (const std::exception& e) {
    std::cerr << "[stsfit] error in stage " << stage.name << ": " << e.what() << "\n";
    return exit_code_for(stage, e);
  }
  return 0;
}

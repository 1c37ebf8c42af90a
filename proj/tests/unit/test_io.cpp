#include <doctest.h>

#include <filesystem>
#include <string>

#include "stsfit/common.hpp"
#include "stsfit/config.hpp"
#include "stsfit/errors.hpp"
#include "stsfit/heatmap_io.hpp"
#include "stsfit/report.hpp"
#include "stsfit/svg.hpp"
#include "stsfit/synth.hpp"

using namespace stsfit;

namespace {

StsHeatmap sample_map() {
  HamiltonianParams truth{6.4e9, 30e6, 88e-6, 13e-6, 5.9e9, 0.35};
  NotchNuisanceParams nu{1.0, 0.3, 40e-9, 3000.0, 6000.0, 0.15};
  return generate_heatmap(truth, nu, linspace(-44e-6, 44e-6, 12),
                          linspace(6.35e9, 6.45e9, 15), 0.013, 42);
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("heatmap json: exact round trip of every double") {
  const auto map = sample_map();
  const std::string text = heatmap_to_json_text(map);
  const auto back = heatmap_from_json_text(text);
  REQUIRE(back.currents_a.size() == map.currents_a.size());
  REQUIRE(back.probe_freqs_hz.size() == map.probe_freqs_hz.size());
  REQUIRE(back.s21.size() == map.s21.size());
  for (std::size_t i = 0; i < map.currents_a.size(); ++i)
    CHECK(back.currents_a[i] == map.currents_a[i]);
  for (std::size_t i = 0; i < map.probe_freqs_hz.size(); ++i)
    CHECK(back.probe_freqs_hz[i] == map.probe_freqs_hz[i]);
  for (std::size_t i = 0; i < map.s21.size(); ++i) CHECK(back.s21[i] == map.s21[i]);
  // a second serialization is byte-identical
  CHECK(heatmap_to_json_text(back) == text);
}

TEST_CASE("heatmap json: malformed inputs raise HeatmapIoError") {
  const auto map = sample_map();
  const std::string text = heatmap_to_json_text(map);
  CHECK_THROWS_AS(heatmap_from_json_text(text.substr(0, text.size() / 2)), HeatmapIoError);
  CHECK_THROWS_AS(heatmap_from_json_text("{}"), HeatmapIoError);
  CHECK_THROWS_AS(heatmap_from_json_text("not json at all"), HeatmapIoError);
  std::string wrong_tag = text;
  const auto pos = wrong_tag.find("sts-heatmap/1");
  wrong_tag.replace(pos, 13, "sts-heatmap/9");
  CHECK_THROWS_AS(heatmap_from_json_text(wrong_tag), HeatmapIoError);
}

TEST_CASE("heatmap file io: write/read and missing-file error") {
  const auto map = sample_map();
  const auto path = std::filesystem::temp_directory_path() / "stsfit_test_map.json";
  write_heatmap(path, map);
  const auto back = read_heatmap(path);
  CHECK(back.s21 == map.s21);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_heatmap(path), HeatmapIoError);
}

TEST_CASE("run config: json round trip preserves every field") {
  RunConfig cfg;
  cfg.input = "map.json";
  cfg.out_dir = "out";
  cfg.hint = QubitHint::below;
  cfg.threshold_k = 7.5;
  cfg.grid_f_ge_max_hz = AxisSpec{5e9, 11e9, 64};
  cfg.grid_d = AxisSpec{0.1, 0.8, 8};
  cfg.nm_diameter_tol = 1e-7;
  cfg.nm_loss_spread_tol = 1e-5;
  cfg.nm_max_iterations = 1234;
  cfg.seed = 987654321;
  cfg.workers = 3;
  cfg.verbose = true;

  const auto back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back.input == cfg.input);
  CHECK(back.out_dir == cfg.out_dir);
  CHECK(back.hint == cfg.hint);
  CHECK(back.threshold_k == cfg.threshold_k);
  REQUIRE(back.grid_f_ge_max_hz.has_value());
  CHECK(back.grid_f_ge_max_hz->min == 5e9);
  CHECK(back.grid_f_ge_max_hz->steps == 64);
  REQUIRE(back.grid_d.has_value());
  CHECK_FALSE(back.grid_f_c_hz.has_value());
  CHECK(back.nm_diameter_tol == cfg.nm_diameter_tol);
  CHECK(back.nm_loss_spread_tol == cfg.nm_loss_spread_tol);
  CHECK(back.nm_max_iterations == cfg.nm_max_iterations);
  CHECK(back.seed == cfg.seed);
  CHECK(back.workers == cfg.workers);
  CHECK(back.verbose == cfg.verbose);

  CHECK_THROWS_AS(run_config_from_json("{bad"), std::invalid_argument);
  CHECK_THROWS_AS(hint_from_name("sideways"), std::invalid_argument);
}

TEST_CASE("spectrum csv: one row per slice, excluded rows keep an empty field") {
  const auto map = sample_map();
  ExtractedSpectrum spectrum;
  spectrum.current_step_a = map.current_step_a();
  for (std::size_t i = 0; i < map.n_currents(); ++i) {
    if (i == 4 || i == 7)
      spectrum.excluded.push_back({i, ExclusionReason::below_threshold});
    else
      spectrum.points.push_back({i, map.currents_a[i], 6.4e9 + 1e5 * static_cast<double>(i)});
  }
  const std::string csv = spectrum_csv(map, spectrum);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == map.n_currents() + 1);
  CHECK(csv.rfind("current_a,f_r_hz,converged\n", 0) == 0);
  CHECK(csv.find(",,0\n") != std::string::npos);
}

TEST_CASE("svg plot: renders a closed document with the requested series") {
  SvgPlot plot(640, 400, "test plot", "x", "y");
  const std::vector<double> xs = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> ys = {1.0, -0.5, 0.25, 2.0};
  const std::vector<double> lo = {0.5, -1.0, 0.0, 1.5};
  const std::vector<double> hi = {1.5, 0.0, 0.5, 2.5};
  plot.add_band(xs, lo, hi, "#1f77b4");
  plot.add_line(xs, ys, "#ff7f0e");
  plot.add_points(xs, ys, "#2ca02c", 2.0);
  const std::string svg = plot.render();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("<path") != std::string::npos);
  CHECK(svg.find("test plot") != std::string::npos);
}

TEST_SUITE_END();

#include "stsfit/heatmap_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stsfit/errors.hpp"

namespace stsfit {

std::string heatmap_to_json_text(const StsHeatmap& map) {
  map.validate();
  const std::size_t n = map.n_currents();
  const std::size_t m = map.n_freqs();
  nlohmann::json j;
  j["format"] = "sts-heatmap/1";
  j["currents_a"] = map.currents_a;
  j["probe_freqs_hz"] = map.probe_freqs_hz;
  auto real = nlohmann::json::array();
  auto imag = nlohmann::json::array();
  for (std::size_t row = 0; row < n; ++row) {
    auto slice = map.slice(row);
    std::vector<double> re(m), im(m);
    for (std::size_t col = 0; col < m; ++col) {
      re[col] = slice[col].real();
      im[col] = slice[col].imag();
    }
    real.push_back(re);
    imag.push_back(im);
  }
  j["s21_real"] = std::move(real);
  j["s21_imag"] = std::move(imag);
  try {
    j["meta"] = nlohmann::json::parse(map.meta);
  } catch (const nlohmann::json::exception&) {
    j["meta"] = nlohmann::json{{"note", map.meta}};
  }
  return j.dump();
}

StsHeatmap heatmap_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw HeatmapIoError(std::string("heatmap parse error: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "sts-heatmap/1")
      throw HeatmapIoError("heatmap: unsupported format tag");
    StsHeatmap map;
    map.currents_a = j.at("currents_a").get<std::vector<double>>();
    map.probe_freqs_hz = j.at("probe_freqs_hz").get<std::vector<double>>();
    const auto& real = j.at("s21_real");
    const auto& imag = j.at("s21_imag");
    const std::size_t n = map.currents_a.size();
    const std::size_t m = map.probe_freqs_hz.size();
    if (real.size() != n || imag.size() != n)
      throw HeatmapIoError("heatmap: s21 row count does not match currents");
    map.s21.resize(n * m);
    for (std::size_t row = 0; row < n; ++row) {
      const auto re = real.at(row).get<std::vector<double>>();
      const auto im = imag.at(row).get<std::vector<double>>();
      if (re.size() != m || im.size() != m)
        throw HeatmapIoError("heatmap: s21 column count does not match probe freqs");
      for (std::size_t col = 0; col < m; ++col)
        map.s21[row * m + col] = {re[col], im[col]};
    }
    map.meta = j.contains("meta") ? j.at("meta").dump() : std::string("{}");
    map.validate();
    return map;
  } catch (const HeatmapIoError&) {
    throw;
  } catch (const std::exception& e) {
    throw HeatmapIoError(std::string("heatmap: ") + e.what());
  }
}

StsHeatmap read_heatmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HeatmapIoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return heatmap_from_json_text(buffer.str());
}

void write_heatmap(const std::filesystem::path& path, const StsHeatmap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HeatmapIoError("cannot open " + path.string() + " for writing");
  out << heatmap_to_json_text(map);
  if (!out) throw HeatmapIoError("failed writing " + path.string());
}

}  // namespace stsfit

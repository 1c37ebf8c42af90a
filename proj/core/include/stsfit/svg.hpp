#pragma once

#include <span>
#include <string>
#include <vector>

namespace stsfit {

/// Minimal hand-rolled SVG line/scatter plot: axes with ticks, polylines,
/// circles and percentile bands. No external plotting dependency.
class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string title, std::string x_label, std::string y_label);

  void add_line(std::span<const double> xs, std::span<const double> ys, std::string color,
                double stroke_width = 1.5);
  void add_points(std::span<const double> xs, std::span<const double> ys, std::string color,
                  double radius = 2.0);
  void add_band(std::span<const double> xs, std::span<const double> lo,
                std::span<const double> hi, std::string color, double opacity = 0.25);

  std::string render() const;

 private:
  struct Series {
    enum class Kind { line, points, band } kind;
    std::vector<double> xs, ys, ys2;
    std::string color;
    double size = 1.5;
    double opacity = 1.0;
  };

  void grow_bounds(std::span<const double> xs, std::span<const double> ys);

  int width_, height_;
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  double x_min_, x_max_, y_min_, y_max_;
  bool has_data_ = false;
};

}  // namespace stsfit

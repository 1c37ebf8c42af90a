#include "stsfit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stsfit {

namespace {

constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 52.0;

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  std::vector<double> ticks;
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  const double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + 0.5 * step; t += step) ticks.push_back(t);
  return ticks;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

SvgPlot::SvgPlot(int width, int height, std::string title, std::string x_label,
                 std::string y_label)
    : width_(width),
      height_(height),
      title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      x_min_(0),
      x_max_(1),
      y_min_(0),
      y_max_(1) {}

void SvgPlot::grow_bounds(std::span<const double> xs, std::span<const double> ys) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
    if (!has_data_) {
      x_min_ = x_max_ = xs[i];
      y_min_ = y_max_ = ys[i];
      has_data_ = true;
    } else {
      x_min_ = std::min(x_min_, xs[i]);
      x_max_ = std::max(x_max_, xs[i]);
      y_min_ = std::min(y_min_, ys[i]);
      y_max_ = std::max(y_max_, ys[i]);
    }
  }
}

void SvgPlot::add_line(std::span<const double> xs, std::span<const double> ys, std::string color,
                       double stroke_width) {
  grow_bounds(xs, ys);
  series_.push_back({Series::Kind::line,
                     {xs.begin(), xs.end()},
                     {ys.begin(), ys.end()},
                     {},
                     std::move(color),
                     stroke_width,
                     1.0});
}

void SvgPlot::add_points(std::span<const double> xs, std::span<const double> ys,
                         std::string color, double radius) {
  grow_bounds(xs, ys);
  series_.push_back({Series::Kind::points,
                     {xs.begin(), xs.end()},
                     {ys.begin(), ys.end()},
                     {},
                     std::move(color),
                     radius,
                     1.0});
}

void SvgPlot::add_band(std::span<const double> xs, std::span<const double> lo,
                       std::span<const double> hi, std::string color, double opacity) {
  grow_bounds(xs, lo);
  grow_bounds(xs, hi);
  series_.push_back({Series::Kind::band,
                     {xs.begin(), xs.end()},
                     {lo.begin(), lo.end()},
                     {hi.begin(), hi.end()},
                     std::move(color),
                     1.0,
                     opacity});
}

std::string SvgPlot::render() const {
  double x_lo = x_min_, x_hi = x_max_, y_lo = y_min_, y_hi = y_max_;
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const double plot_w = width_ - kMarginLeft - kMarginRight;
  const double plot_h = height_ - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kMarginTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width_ / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title_ << "</text>\n";

  for (double t : nice_ticks(x_lo, x_hi)) {
    const double x = px(t);
    svg << "<line x1=\"" << x << "\" y1=\"" << py(y_lo) << "\" x2=\"" << x << "\" y2=\""
        << py(y_hi) << "\" stroke=\"#e0e0e0\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << height_ - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(t)
        << "</text>\n";
  }
  for (double t : nice_ticks(y_lo, y_hi)) {
    const double y = py(t);
    svg << "<line x1=\"" << px(x_lo) << "\" y1=\"" << y << "\" x2=\"" << px(x_hi) << "\" y2=\""
        << y << "\" stroke=\"#e0e0e0\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << y + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(t)
        << "</text>\n";
  }

  for (const auto& s : series_) {
    if (s.kind == Series::Kind::band) {
      svg << "<path d=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        svg << (i == 0 ? 'M' : 'L') << px(s.xs[i]) << ' ' << py(s.ys[i]) << ' ';
      for (std::size_t i = s.xs.size(); i-- > 0;)
        svg << 'L' << px(s.xs[i]) << ' ' << py(s.ys2[i]) << ' ';
      svg << "Z\" fill=\"" << s.color << "\" fill-opacity=\"" << s.opacity
          << "\" stroke=\"none\"/>\n";
    } else if (s.kind == Series::Kind::line) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.size
          << "\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (!std::isfinite(s.ys[i])) continue;
        svg << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
      }
      svg << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (!std::isfinite(s.ys[i])) continue;
        svg << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i]) << "\" r=\"" << s.size
            << "\" fill=\"" << s.color << "\"/>\n";
      }
    }
  }

  svg << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << height_ - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label_
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << kMarginTop + plot_h / 2 << ")\">" << y_label_
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace stsfit

// SPDX-License-Identifier: Apache-2.0
#include "qilens/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qilens/errors.hpp"

namespace qilens {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 78.0, kRight = 24.0, kTop = 46.0, kBottom = 58.0;

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// round a span to 1/2/5 * 10^k tick steps
std::vector<double> ticks(double lo, double hi, int target = 6) {
  std::vector<double> out;
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  const double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 0.5 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_points(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<double>& yerr, const std::string& color,
                         const std::string& label) {
  if (x.size() != y.size() || (!yerr.empty() && yerr.size() != y.size())) {
    throw ValidationError("SvgPlot: series arrays must have matching length");
  }
  series_.push_back(Series{x, y, yerr, color, label, false});
}

void SvgPlot::add_line(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& color, const std::string& label) {
  if (x.size() != y.size()) {
    throw ValidationError("SvgPlot: series arrays must have matching length");
  }
  series_.push_back(Series{x, y, {}, color, label, true});
}

void SvgPlot::write(const std::filesystem::path& path) const {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Series& s : series_) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double e = (i < s.yerr.size() && std::isfinite(s.yerr[i])) ? s.yerr[i] : 0.0;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i] - e);
      ymax = std::max(ymax, s.y[i] + e);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
    xmin = 0.0; xmax = 1.0; ymin = 0.0; ymax = 1.0;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double ypad = 0.04 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return kTop + (ymax - v) / (ymax - ymin) * ph; };

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write SVG file: " + path.string());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  out << "<text x=\"" << kWidth / 2 << "\" y=\"26\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"17\">" << xml_escape(title_)
      << "</text>\n";

  // frame and grid
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ticks(xmin, xmax)) {
    const double X = px(v);
    out << "<line x1=\"" << num(X) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(X)
        << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << num(X) << "\" y1=\"" << kTop << "\" x2=\"" << num(X)
        << "\" y2=\"" << kTop + ph << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << num(X) << "\" y=\"" << kTop + ph + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << num(v) << "</text>\n";
  }
  for (double v : ticks(ymin, ymax)) {
    const double Y = py(v);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(Y) << "\" x2=\"" << kLeft
        << "\" y2=\"" << num(Y) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << num(Y) << "\" x2=\"" << kLeft + pw
        << "\" y2=\"" << num(Y) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(Y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << num(v)
        << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(x_label_) << "</text>\n";
  out << "<text x=\"20\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
      << "transform=\"rotate(-90 20 " << kTop + ph / 2 << ")\">" << xml_escape(y_label_)
      << "</text>\n";

  double legend_y = kTop + 16.0;
  for (const Series& s : series_) {
    if (s.line) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
      }
      out << "\"/>\n";
    } else {
      // subsample markers on dense traces to keep files small
      const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 1200);
      for (std::size_t i = 0; i < s.x.size(); i += stride) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        const double X = px(s.x[i]);
        const double Y = py(s.y[i]);
        if (i < s.yerr.size() && std::isfinite(s.yerr[i]) && s.yerr[i] > 0.0) {
          out << "<line x1=\"" << num(X) << "\" y1=\"" << num(py(s.y[i] - s.yerr[i]))
              << "\" x2=\"" << num(X) << "\" y2=\"" << num(py(s.y[i] + s.yerr[i]))
              << "\" stroke=\"" << s.color << "\" stroke-width=\"0.8\"/>\n";
        }
        out << "<circle cx=\"" << num(X) << "\" cy=\"" << num(Y)
            << "\" r=\"1.8\" fill=\"" << s.color << "\"/>\n";
      }
    }
    if (!s.label.empty()) {
      out << "<rect x=\"" << kLeft + pw - 150 << "\" y=\"" << legend_y - 9
          << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n"
          << "<text x=\"" << kLeft + pw - 134 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.label)
          << "</text>\n";
      legend_y += 16.0;
    }
  }
  out << "</svg>\n";
  if (!out) throw IoError("short write to SVG file: " + path.string());
}

}  // namespace qilens

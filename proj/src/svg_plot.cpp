#include "gwl/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gwl {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
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

// Roughly five "nice" tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) out.push_back(t);
  return out;
}

}  // namespace

PlotSeries series_from_table(const EntropyTable& table, std::string label) {
  PlotSeries s{std::move(label), {}, {}};
  for (std::size_t b = 0; b < table.s.size(); ++b) {
    if (!table.present[b]) continue;
    s.x.push_back(table.spec.center(b));
    s.y.push_back(table.s[b]);
  }
  return s;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x0 <= x1)) throw InvalidArgument("nothing to plot");
  if (x1 - x0 < 1e-12) {
    x0 -= 1;
    x1 += 1;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 1;
    y1 += 1;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1 - (y - y0) / (y1 - y0)) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape(title) + "</text>\n";

  // axes
  out += "<g stroke=\"black\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(kTop + ph) + "\"/>\n";
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kTop + ph) +
         "\"/>\n";
  out += "</g>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t : ticks(x0, x1))
    out += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" + num(t) +
           "</text>\n";
  for (double t : ticks(y0, y1))
    out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(t) + 4) + "\" text-anchor=\"end\">" + num(t) +
           "</text>\n";
  out += "</g>\n";
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + num(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(y_label) +
         "</text>\n";

  std::size_t k = 0;
  for (const auto& s : series) {
    if (s.x.empty()) continue;
    const char* color = kColors[k % std::size(kColors)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out += ' ';
      out += num(px(s.x[i])) + "," + num(py(s.y[i]));
    }
    out += "\"/>\n";
    out += "<text x=\"" + num(kLeft + pw - 4) + "\" y=\"" + num(kTop + 14 + 16 * static_cast<double>(k)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" +
           escape(s.label) + "</text>\n";
    ++k;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace gwl

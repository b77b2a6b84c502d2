#include "bpsim/svg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "bpsim/csvio.hpp"
#include "bpsim/errors.hpp"

namespace bpsim {

namespace {

constexpr double kWidth = 960, kHeight = 540;
constexpr double kLeft = 70, kRight = 930, kTop = 50, kBottom = 480;
constexpr std::size_t kMaxPoints = 2400;

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// screen coordinates, two fixed decimals
std::string px(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::fixed, 2);
  if (ec != std::errc{}) throw std::runtime_error("svg coordinate overflow");
  return std::string(buf.data(), end);
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double scale(double v, double a, double b) const {
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

Range pad_range(double lo, double hi, bool anchor_zero) {
  if (anchor_zero && lo >= 0.0) lo = 0.0;
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    if (!(anchor_zero && lo == 0.0)) lo -= pad;
    hi += pad;
  }
  return {lo, hi};
}

std::vector<double> nice_ticks(const Range& r) {
  const double raw = (r.hi - r.lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  double t = std::ceil(r.lo / step) * step;
  for (; t <= r.hi + 1e-9 * step; t += step) {
    // snap near-zero ticks so labels read 0 instead of 1e-17
    ticks.push_back(std::abs(t) < step * 1e-6 ? 0.0 : t);
  }
  return ticks;
}

void chart_frame(std::string& out, const std::string& title,
                 const std::string& x_label, const std::string& y_label) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" "
         "width=\"960\" height=\"540\" font-family=\"Helvetica, Arial, "
         "sans-serif\">\n";
  out += "<rect width=\"960\" height=\"540\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"480\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" "
         "fill=\"#222222\">" +
         esc(title) + "</text>\n";
  out += "<text x=\"500\" y=\"526\" text-anchor=\"middle\" font-size=\"13\" "
         "fill=\"#444444\">" +
         esc(x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"265\" text-anchor=\"middle\" font-size=\"13\" "
         "fill=\"#444444\" transform=\"rotate(-90 18 265)\">" +
         esc(y_label) + "</text>\n";
}

void y_axis(std::string& out, const Range& yr) {
  for (double t : nice_ticks(yr)) {
    const double sy = yr.scale(t, kBottom, kTop);
    out += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(sy) + "\" x2=\"" +
           px(kRight) + "\" y2=\"" + px(sy) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(sy + 4) +
           "\" text-anchor=\"end\" font-size=\"11\" fill=\"#444444\">" +
           format_double(t) + "</text>\n";
  }
}

void axes_box(std::string& out) {
  out += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kBottom) + "\" x2=\"" +
         px(kRight) + "\" y2=\"" + px(kBottom) +
         "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop) + "\" x2=\"" +
         px(kLeft) + "\" y2=\"" + px(kBottom) +
         "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
}

void check_finite(double v) {
  if (!std::isfinite(v)) throw ConfigError("chart data must be finite");
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series) {
  std::size_t total = 0;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size())
      throw ConfigError("series " + s.label + " has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      check_finite(s.x[i]);
      check_finite(s.y[i]);
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
    total += s.x.size();
  }
  if (total == 0) throw ConfigError("chart needs at least one point");

  const Range xr = pad_range(xmin, xmax, false);
  const Range yr = pad_range(ymin, ymax, true);

  std::string out;
  chart_frame(out, title, x_label, y_label);
  y_axis(out, yr);
  for (double t : nice_ticks(xr)) {
    const double sx = xr.scale(t, kLeft, kRight);
    out += "<line x1=\"" + px(sx) + "\" y1=\"" + px(kBottom) + "\" x2=\"" +
           px(sx) + "\" y2=\"" + px(kBottom + 5) +
           "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + px(sx) + "\" y=\"" + px(kBottom + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#444444\">" +
           format_double(t) + "</text>\n";
  }
  axes_box(out);

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    if (s.x.empty()) continue;
    const char* color = kPalette[si % kPalette.size()];
    const std::size_t stride = (s.x.size() + kMaxPoints - 1) / kMaxPoints;
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      out += px(xr.scale(s.x[i], kLeft, kRight)) + "," +
             px(yr.scale(s.y[i], kBottom, kTop)) + " ";
    }
    // keep the true endpoint when thinning skipped it
    if (stride > 1 && (s.x.size() - 1) % stride != 0)
      out += px(xr.scale(s.x.back(), kLeft, kRight)) + "," +
             px(yr.scale(s.y.back(), kBottom, kTop));
    out += "\"/>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const double ly = kTop + 16 + 18 * static_cast<double>(si);
    const char* color = kPalette[si % kPalette.size()];
    out += "<line x1=\"" + px(kRight - 150) + "\" y1=\"" + px(ly - 4) +
           "\" x2=\"" + px(kRight - 126) + "\" y2=\"" + px(ly - 4) +
           "\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + px(kRight - 120) + "\" y=\"" + px(ly) +
           "\" font-size=\"12\" fill=\"#222222\">" + esc(series[si].label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string bar_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label,
                      const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
  if (labels.size() != values.size())
    throw ConfigError("bar chart labels and values must align");
  if (values.empty()) throw ConfigError("chart needs at least one point");
  double ymin = 0.0, ymax = 0.0;
  for (double v : values) {
    check_finite(v);
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  const Range yr = pad_range(ymin, ymax, true);

  std::string out;
  chart_frame(out, title, x_label, y_label);
  y_axis(out, yr);
  axes_box(out);

  const double n = static_cast<double>(values.size());
  const double slot_w = (kRight - kLeft) / n;
  const double bar_w = slot_w * 0.6;
  const double base = yr.scale(0.0, kBottom, kTop);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cx = kLeft + slot_w * (static_cast<double>(i) + 0.5);
    const double sy = yr.scale(values[i], kBottom, kTop);
    const double top = std::min(sy, base);
    const double h = std::abs(base - sy);
    out += "<rect x=\"" + px(cx - bar_w / 2) + "\" y=\"" + px(top) +
           "\" width=\"" + px(bar_w) + "\" height=\"" + px(h) + "\" fill=\"";
    out += kPalette[i % kPalette.size()];
    out += "\"/>\n";
    out += "<text x=\"" + px(cx) + "\" y=\"" + px(std::min(top, base) - 6) +
           "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#222222\">" +
           format_double(values[i]) + "</text>\n";
    out += "<text x=\"" + px(cx) + "\" y=\"" + px(kBottom + 18) +
           "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#444444\">" +
           esc(labels[i]) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace bpsim

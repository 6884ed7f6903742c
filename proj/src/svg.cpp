#include "smi/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace smi::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void widen(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
}

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  return s;
}

std::string axes(const Frame& f, const std::string& xl, const std::string& yl) {
  std::string s;
  const double xa = kHeight - kBottom;
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(xa) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" + num(xa) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(xa) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(xa + 16) + "\" text-anchor=\"middle\">" + tick(xv) +
         "</text>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" + tick(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
       "\" text-anchor=\"middle\">" + escape(xl) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num((kTop + xa) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num((kTop + xa) / 2) + ")\">" + escape(yl) + "</text>\n";
  return s;
}

} // namespace

std::string render(const LinePlot& plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto take = [](double v, double& lo, double& hi) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  for (const auto& s : plot.series) {
    for (double v : s.x)
      take(v, x0, x1);
    for (double v : s.y)
      take(v, y0, y1);
    for (double v : s.lower)
      take(v, y0, y1);
    for (double v : s.upper)
      take(v, y0, y1);
  }
  widen(x0, x1);
  widen(y0, y1);
  const double pad = 0.05 * (y1 - y0);
  const Frame f{x0, x1, y0 - pad, y1 + pad};

  std::string out = header(plot.title) + axes(f, plot.x_label, plot.y_label);
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const std::string color = kColors[k % 5];
    if (!s.lower.empty() && s.lower.size() == s.x.size() && s.upper.size() == s.x.size()) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.upper[i])) pts += num(f.px(s.x[i])) + "," + num(f.py(s.upper[i])) + " ";
      for (std::size_t i = s.x.size(); i-- > 0;)
        if (std::isfinite(s.lower[i])) pts += num(f.px(s.x[i])) + "," + num(f.py(s.lower[i])) + " ";
      out += "<polygon points=\"" + pts + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (std::isfinite(s.y[i])) pts += num(f.px(s.x[i])) + "," + num(f.py(s.y[i])) + " ";
    out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kWidth - kRight - 5) + "\" y=\"" + num(kTop + 14 * (k + 1)) +
           "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(s.label) + "</text>\n";
  }
  if (plot.marker_x && std::isfinite(*plot.marker_x)) {
    const double x = f.px(*plot.marker_x);
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(kHeight - kBottom) + "\" stroke=\"black\" stroke-dasharray=\"5,4\"/>\n";
    out += "<text x=\"" + num(x + 4) + "\" y=\"" + num(kTop + 12) + "\">" + escape(plot.marker_label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render(const Histogram& hist) {
  std::vector<double> v;
  for (double x : hist.values)
    if (std::isfinite(x)) v.push_back(x);
  double lo = hist.lo.value_or(v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()));
  double hi = hist.hi.value_or(v.empty() ? 1.0 : *std::max_element(v.begin(), v.end()));
  widen(lo, hi);
  const int bins = std::max(hist.bins, 1);
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (double x : v) {
    auto b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const int top = std::max(1, *std::max_element(counts.begin(), counts.end()));
  const Frame f{lo, hi, 0.0, static_cast<double>(top) * 1.05};

  std::string out = header(hist.title) + axes(f, hist.x_label, "count");
  const double w = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double xl = f.px(lo + b * w), xr = f.px(lo + (b + 1) * w);
    const double yt = f.py(counts[static_cast<std::size_t>(b)]), yb = f.py(0.0);
    out += "<rect x=\"" + num(xl) + "\" y=\"" + num(yt) + "\" width=\"" + num(xr - xl) + "\" height=\"" +
           num(yb - yt) + "\" fill=\"#1f77b4\" stroke=\"white\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

} // namespace smi::svg

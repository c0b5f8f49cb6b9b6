#include "odegrow/cli/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace odegrow::cli {

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace {

constexpr double kWidth = 820.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 220.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;
constexpr double kMarker = 6.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Round step of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double unit = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
  return unit * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish(bool from_zero) {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (from_zero) lo = std::min(lo, 0.0);
    if (hi - lo <= 0.0) hi = lo + 1.0;
  }
};

}  // namespace

std::string render_svg(const PlotData& plot) {
  Range tr;
  Range vr;
  for (double t : plot.calibration_times) tr.add(t);
  for (double t : plot.holdout_times) tr.add(t);
  for (double v : plot.calibration_volumes) vr.add(v);
  for (double v : plot.holdout_volumes) vr.add(v);
  for (const auto& c : plot.curves) {
    if (c.diverged) continue;
    for (double t : c.times) tr.add(t);
    for (double v : c.volumes) vr.add(v);
  }
  tr.finish(false);
  vr.finish(true);
  const double y_step = nice_step(vr.hi - vr.lo, 5);
  vr.hi = std::ceil(vr.hi / y_step) * y_step;
  const double x_step = nice_step(tr.hi - tr.lo, 6);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double t) { return kLeft + (t - tr.lo) / (tr.hi - tr.lo) * pw; };
  auto sy = [&](double v) { return kTop + ph - (v - vr.lo) / (vr.hi - vr.lo) * ph; };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
    << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight) << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(plot.title) << "</text>\n";

  // Axes, ticks and labels.
  s << "<g stroke=\"black\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\""
    << fmt(kTop + ph) << "\"/>\n";
  s << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
    << fmt(kTop + ph) << "\"/>\n";
  s << "</g>\n<g font-size=\"11\">\n";
  for (double t = std::ceil(tr.lo / x_step) * x_step; t <= tr.hi + 1e-9 * x_step; t += x_step) {
    const double x = sx(t);
    s << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(x) << "\" y2=\""
      << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>";
    s << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + ph + 18) << "\" text-anchor=\"middle\">"
      << tick_label(std::abs(t) < 1e-12 * x_step ? 0.0 : t) << "</text>\n";
  }
  for (double v = vr.lo; v <= vr.hi + 1e-9 * y_step; v += y_step) {
    const double y = sy(v);
    s << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(y)
      << "\" stroke=\"black\"/>";
    s << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">"
      << tick_label(std::abs(v) < 1e-12 * y_step ? 0.0 : v) << "</text>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 22)
    << "\" text-anchor=\"middle\">time (days)</text>\n";
  s << "<text x=\"22\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 22 "
    << fmt(kTop + ph / 2) << ")\">volume</text>\n";

  // Fitted curves, one path each.
  for (std::size_t i = 0; i < plot.curves.size(); ++i) {
    const auto& c = plot.curves[i];
    if (c.diverged || c.times.empty()) continue;
    s << "<path fill=\"none\" stroke=\"" << kPalette[i % kPalette.size()] << "\" stroke-width=\"1.8\" d=\"";
    for (std::size_t k = 0; k < c.times.size(); ++k) {
      s << (k == 0 ? "M" : " L") << fmt(sx(c.times[k])) << ',' << fmt(sy(c.volumes[k]));
    }
    s << "\"/>\n";
  }

  auto diamond = [&](double x, double y, bool filled) {
    s << "<polygon points=\"" << fmt(x) << ',' << fmt(y - kMarker) << ' ' << fmt(x + kMarker) << ',' << fmt(y) << ' '
      << fmt(x) << ',' << fmt(y + kMarker) << ' ' << fmt(x - kMarker) << ',' << fmt(y) << "\" "
      << (filled ? "fill=\"black\"" : "fill=\"white\"") << " stroke=\"black\" stroke-width=\"1.2\"/>\n";
  };
  for (std::size_t k = 0; k < plot.calibration_times.size(); ++k) {
    diamond(sx(plot.calibration_times[k]), sy(plot.calibration_volumes[k]), true);
  }
  for (std::size_t k = 0; k < plot.holdout_times.size(); ++k) {
    diamond(sx(plot.holdout_times[k]), sy(plot.holdout_volumes[k]), false);
  }

  // Legend.
  const double lx = kLeft + pw + 20;
  double ly = kTop + 10;
  s << "<g font-size=\"12\">\n";
  diamond(lx + 12, ly, true);
  s << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly + 4) << "\">calibration</text>\n";
  ly += 20;
  diamond(lx + 12, ly, false);
  s << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly + 4) << "\">holdout</text>\n";
  for (std::size_t i = 0; i < plot.curves.size(); ++i) {
    ly += 20;
    const auto& c = plot.curves[i];
    if (!c.diverged) {
      s << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 24) << "\" y2=\"" << fmt(ly)
        << "\" stroke=\"" << kPalette[i % kPalette.size()] << "\" stroke-width=\"1.8\"/>\n";
    }
    s << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly + 4) << "\">" << xml_escape(c.label)
      << (c.diverged ? " (diverged)" : "") << "</text>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

}  // namespace odegrow::cli

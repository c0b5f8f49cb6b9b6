#pragma once

#include <string>
#include <vector>

namespace odegrow::cli {

struct PlotCurve {
  std::string label;
  std::vector<double> times;
  std::vector<double> volumes;
  /// Legend-only entry marked "(diverged)"; no path is drawn.
  bool diverged = false;
};

struct PlotData {
  std::string title;
  std::vector<double> calibration_times;
  std::vector<double> calibration_volumes;
  std::vector<double> holdout_times;
  std::vector<double> holdout_volumes;
  std::vector<PlotCurve> curves;
};

/// Standalone SVG document. Measurements are diamonds (calibration filled,
/// holdout open); each non-diverged curve is exactly one <path>. No other
/// element of the document is a <path>.
[[nodiscard]] std::string render_svg(const PlotData& plot);

/// Escapes &, <, >, " and ' for XML text and attribute values.
[[nodiscard]] std::string xml_escape(const std::string& text);

}  // namespace odegrow::cli

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "minty/algorithms.hpp"

namespace minty {

struct PlotSeries {
  std::string label;
  std::vector<IterationRecord> records;
};

struct PlotFrame {
  std::optional<Box> box;
  /// Circular cycles (radii about the origin) and traced closed orbits.
  std::vector<double> cycles;
  std::vector<std::vector<Vector>> cycle_paths;
  std::optional<Vector> z_star;
};

/// Two-panel SVG: phase plane (left) and log10 residual per iteration (right).
/// Residuals are clamped below at 1e-16.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotFrame& frame);

}  // namespace minty

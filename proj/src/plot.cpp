#include "minty/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace minty {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 380.0;
constexpr double kMargin = 40.0;
constexpr double kResidualFloor = 1e-16;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = -1.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotFrame& frame) {
  // Phase plane uses the first two coordinates.
  Range xr, yr;
  if (frame.box && frame.box->dim() >= 2) {
    xr.add(frame.box->lo[0]);
    xr.add(frame.box->hi[0]);
    yr.add(frame.box->lo[1]);
    yr.add(frame.box->hi[1]);
  }
  for (double r : frame.cycles) {
    xr.add(-r), xr.add(r), yr.add(-r), yr.add(r);
  }
  for (const auto& path : frame.cycle_paths) {
    for (const auto& p : path) xr.add(p[0]), yr.add(p[1]);
  }
  for (const auto& s : series) {
    for (const auto& rec : s.records) {
      if (rec.z.size() < 2) continue;
      xr.add(rec.z[0]);
      yr.add(rec.z[1]);
    }
  }
  xr.finish();
  yr.finish();
  // Equal aspect ratio.
  const double span = std::max(xr.hi - xr.lo, yr.hi - yr.lo);
  const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
  const double inner = std::min(kPanelW, kPanelH) - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (x - (cx - span / 2)) / span * inner; };
  auto py = [&](double y) { return kMargin + ((cy + span / 2) - y) / span * inner; };

  std::size_t kmax = 1;
  Range lr;
  for (const auto& s : series) {
    kmax = std::max(kmax, s.records.size());
    for (const auto& rec : s.records) lr.add(std::log10(std::max(rec.residual, kResidualFloor)));
  }
  lr.finish();
  const double ox = kPanelW;
  auto qx = [&](double k) { return ox + kMargin + k / static_cast<double>(kmax) * (kPanelW - 2 * kMargin); };
  auto qy = [&](double lv) { return kMargin + (lr.hi - lv) / (lr.hi - lr.lo) * (kPanelH - 2 * kMargin); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(2 * kPanelW) << "\" height=\""
     << num(kPanelH + 20.0 * static_cast<double>(series.size())) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Left panel.
  os << "<text x=\"" << num(kMargin) << "\" y=\"20\" font-size=\"13\">phase plane</text>\n";
  if (frame.box && frame.box->dim() >= 2) {
    const double x0 = px(frame.box->lo[0]), x1 = px(frame.box->hi[0]);
    const double y0 = py(frame.box->hi[1]), y1 = py(frame.box->lo[1]);
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
       << num(y1 - y0) << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (double r : frame.cycles) {
    os << "<circle cx=\"" << num(px(0)) << "\" cy=\"" << num(py(0)) << "\" r=\"" << num(r / span * inner)
       << "\" class=\"cycle\" fill=\"none\" stroke=\"#bbb\"/>\n";
  }
  for (const auto& path : frame.cycle_paths) {
    os << "<polyline class=\"cycle\" fill=\"none\" stroke=\"#bbb\" stroke-width=\"2\" points=\"";
    for (const auto& p : path) os << num(px(p[0])) << ',' << num(py(p[1])) << ' ';
    os << "\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    os << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (const auto& rec : series[i].records) {
      if (rec.z.size() < 2 || !std::isfinite(rec.z[0]) || !std::isfinite(rec.z[1])) continue;
      os << num(px(rec.z[0])) << ',' << num(py(rec.z[1])) << ' ';
    }
    os << "\"/>\n";
    if (!series[i].records.empty() && series[i].records.front().z.size() >= 2) {
      const auto& z0 = series[i].records.front().z;
      os << "<circle cx=\"" << num(px(z0[0])) << "\" cy=\"" << num(py(z0[1])) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
  }
  if (frame.z_star && frame.z_star->size() >= 2) {
    os << "<path d=\"M" << num(px((*frame.z_star)[0]) - 4) << ',' << num(py((*frame.z_star)[1]) - 4) << " l8,8 m0,-8 l-8,8\" stroke=\"black\"/>\n";
  }

  // Right panel.
  os << "<text x=\"" << num(ox + kMargin) << "\" y=\"20\" font-size=\"13\">log10 residual</text>\n";
  os << "<line x1=\"" << num(ox + kMargin) << "\" y1=\"" << num(kPanelH - kMargin) << "\" x2=\""
     << num(2 * kPanelW - kMargin) << "\" y2=\"" << num(kPanelH - kMargin) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(ox + kMargin) << "\" y1=\"" << num(kMargin) << "\" x2=\"" << num(ox + kMargin)
     << "\" y2=\"" << num(kPanelH - kMargin) << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(ox + 4) << "\" y=\"" << num(kMargin + 4) << "\" font-size=\"10\">" << num(lr.hi)
     << "</text>\n";
  os << "<text x=\"" << num(ox + 4) << "\" y=\"" << num(kPanelH - kMargin) << "\" font-size=\"10\">" << num(lr.lo)
     << "</text>\n";
  os << "<text x=\"" << num(2 * kPanelW - kMargin - 30) << "\" y=\"" << num(kPanelH - kMargin + 14)
     << "\" font-size=\"10\">k=" << kmax << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    os << "<polyline class=\"residual\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (const auto& rec : series[i].records) {
      os << num(qx(rec.k)) << ',' << num(qy(std::log10(std::max(rec.residual, kResidualFloor)))) << ' ';
    }
    os << "\"/>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kPanelH + 14.0 + 20.0 * static_cast<double>(i);
    os << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
       << kPalette[i % std::size(kPalette)] << "\"/>";
    os << "<text x=\"" << num(kMargin + 16) << "\" y=\"" << num(y) << "\" font-size=\"11\">"
       << escape(series[i].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace minty

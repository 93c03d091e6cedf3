#pragma once
// Minimal deterministic SVG line plots (linear and log-log) with optional
// least-squares slope annotations.  Plots are regenerable views of CSV data,
// never sources of truth; output bytes depend only on the inputs.

#include <string>
#include <vector>

namespace ring {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

// log-log plot of |y| vs |x| (non-positive / non-finite points are skipped).
// When annotate_slopes is set, each series is annotated with the slope of a
// least-squares line through (log10 x, log10 y).
void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series,
                      bool annotate_slopes);

// linear-axes plot (non-finite points skipped).
void write_linear_svg(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series);

}  // namespace ring

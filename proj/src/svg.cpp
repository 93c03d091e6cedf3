#include "ring/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ring/fitting.hpp"

namespace ring {

namespace {

constexpr double kW = 640, kH = 480;
constexpr double kL = 72, kR = 24, kT = 44, kB = 56;

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                           "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string sig(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;  // data bounds
  double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

void emit_header(std::ofstream& os, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (int)kW
     << "\" height=\"" << (int)kH << "\" viewBox=\"0 0 " << (int)kW << " "
     << (int)kH << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << (int)(kW / 2) << "\" y=\"24\" font-size=\"15\" "
        "text-anchor=\"middle\" font-family=\"monospace\">"
     << title << "</text>\n"
     << "<text x=\"" << (int)(kW / 2) << "\" y=\"" << (int)(kH - 12)
     << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"monospace\">"
     << xlabel << "</text>\n"
     << "<text x=\"16\" y=\"" << (int)(kH / 2)
     << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"monospace\" "
        "transform=\"rotate(-90 16 "
     << (int)(kH / 2) << ")\">" << ylabel << "</text>\n"
     << "<rect x=\"" << num(kL) << "\" y=\"" << num(kT) << "\" width=\""
     << num(kW - kL - kR) << "\" height=\"" << num(kH - kT - kB)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
}

void emit_series(std::ofstream& os, const Frame& fr,
                 const std::vector<std::vector<std::pair<double, double>>>& pts,
                 const std::vector<PlotSeries>& series,
                 const std::vector<std::string>& notes) {
  for (size_t k = 0; k < pts.size(); ++k) {
    const char* col = kPalette[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& q : pts[k])
      os << num(fr.px(q.first)) << "," << num(fr.py(q.second)) << " ";
    os << "\"/>\n";
    std::string leg = series[k].label;
    if (!notes[k].empty()) leg += "  " + notes[k];
    os << "<text x=\"" << num(kW - kR - 8) << "\" y=\""
       << num(kT + 18 + 16 * (double)k)
       << "\" font-size=\"12\" text-anchor=\"end\" font-family=\"monospace\" "
          "fill=\""
       << col << "\">" << leg << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace

void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series,
                      bool annotate_slopes) {
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  double x0 = std::numeric_limits<double>::max(), x1 = -x0, y0 = x0, y1 = -x0;
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double ax = std::abs(s.x[i]), ay = std::abs(s.y[i]);
      if (!(ax > 0) || !(ay > 0) || !std::isfinite(ax) || !std::isfinite(ay))
        continue;
      const double lx = std::log10(ax), ly = std::log10(ay);
      pts[k].push_back({lx, ly});
      x0 = std::min(x0, lx), x1 = std::max(x1, lx);
      y0 = std::min(y0, ly), y1 = std::max(y1, ly);
    }
  }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.04 * (x1 - x0), pady = 0.06 * (y1 - y0);
  Frame fr{x0 - padx, x1 + padx, y0 - pady, y1 + pady};

  std::ofstream os(path);
  if (!os) throw std::invalid_argument("svg: cannot write " + path);
  emit_header(os, title, xlabel + " (log10)", ylabel + " (log10)");
  for (int d = (int)std::ceil(fr.x0); d <= (int)std::floor(fr.x1); ++d) {
    os << "<line x1=\"" << num(fr.px(d)) << "\" y1=\"" << num(kH - kB)
       << "\" x2=\"" << num(fr.px(d)) << "\" y2=\"" << num(kT)
       << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << num(fr.px(d)) << "\" y=\"" << num(kH - kB + 16)
       << "\" font-size=\"11\" text-anchor=\"middle\" "
          "font-family=\"monospace\">1e"
       << d << "</text>\n";
  }
  for (int d = (int)std::ceil(fr.y0); d <= (int)std::floor(fr.y1); ++d) {
    os << "<line x1=\"" << num(kL) << "\" y1=\"" << num(fr.py(d)) << "\" x2=\""
       << num(kW - kR) << "\" y2=\"" << num(fr.py(d))
       << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << num(kL - 6) << "\" y=\"" << num(fr.py(d) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\" "
          "font-family=\"monospace\">1e"
       << d << "</text>\n";
  }
  std::vector<std::string> notes(series.size());
  if (annotate_slopes) {
    for (size_t k = 0; k < pts.size(); ++k) {
      if (pts[k].size() < 2) continue;
      std::vector<double> lx, ly;
      for (const auto& q : pts[k]) lx.push_back(q.first), ly.push_back(q.second);
      notes[k] = "slope " + sig(fit_line(lx, ly).slope);
    }
  }
  emit_series(os, fr, pts, series, notes);
}

void write_linear_svg(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series) {
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  double x0 = std::numeric_limits<double>::max(), x1 = -x0, y0 = x0, y1 = -x0;
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts[k].push_back({s.x[i], s.y[i]});
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.04 * (x1 - x0), pady = 0.06 * (y1 - y0);
  Frame fr{x0 - padx, x1 + padx, y0 - pady, y1 + pady};
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("svg: cannot write " + path);
  emit_header(os, title, xlabel, ylabel);
  std::vector<std::string> notes(series.size());
  emit_series(os, fr, pts, series, notes);
}

}  // namespace ring

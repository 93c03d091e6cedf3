#pragma once
// Plain-text exchange formats.  Field CSVs carry 17 significant digits so
// round-trips are bit-exact for doubles.

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ring/grid.hpp"

namespace ring {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- real field: header "y,value" -----------------------------------------
inline void write_field_csv(const std::filesystem::path& path, const Grid1D& g,
                            const Eigen::ArrayXd& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "y,value\n";
  for (int i = 0; i < g.n; ++i)
    out << fmt17(g.y[i]) << ',' << fmt17(f[i]) << '\n';
}

// --- complex field: header "y,re,im" ---------------------------------------
inline void write_field_csv(const std::filesystem::path& path, const Grid1D& g,
                            const Eigen::ArrayXcd& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "y,re,im\n";
  for (int i = 0; i < g.n; ++i)
    out << fmt17(g.y[i]) << ',' << fmt17(f[i].real()) << ','
        << fmt17(f[i].imag()) << '\n';
}

struct FieldCsv {
  Eigen::ArrayXd y;
  Eigen::ArrayXd re;
  Eigen::ArrayXd im;      // empty for real fields
  bool is_complex = false;
};

inline FieldCsv read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty field csv: " + path.string());
  bool cplx = line.find("re") != std::string::npos &&
              line.find("im") != std::string::npos;
  std::vector<double> y, re, im;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() < 2u + (cplx ? 1u : 0u))
      throw std::runtime_error("malformed row in " + path.string());
    y.push_back(vals[0]);
    re.push_back(vals[1]);
    if (cplx) im.push_back(vals[2]);
  }
  FieldCsv f;
  f.is_complex = cplx;
  f.y = Eigen::Map<Eigen::ArrayXd>(y.data(), static_cast<int>(y.size()));
  f.re = Eigen::Map<Eigen::ArrayXd>(re.data(), static_cast<int>(re.size()));
  if (cplx)
    f.im = Eigen::Map<Eigen::ArrayXd>(im.data(), static_cast<int>(im.size()));
  return f;
}

// --- generic numeric table -------------------------------------------------
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    for (size_t c = 0; c < columns.size(); ++c)
      out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
    for (const auto& r : rows) {
      for (size_t c = 0; c < r.size(); ++c)
        out << fmt17(r[c]) << (c + 1 < r.size() ? ',' : '\n');
    }
  }

  static CsvTable read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("empty csv: " + path.string());
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) t.columns.push_back(tok);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::vector<double> vals;
      while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
      t.rows.push_back(std::move(vals));
    }
    return t;
  }

  int col(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw std::runtime_error("csv column not found: " + name);
  }
};

}  // namespace ring

#pragma once
// Least-squares line fits and the power-law exponent fits built on them.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ring {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int npoints = 0;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || y.size() != x.size())
    throw std::invalid_argument("fit_line: need >= 3 matched points");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.slope_stderr = (n > 2) ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  f.npoints = n;
  return f;
}

struct PowerLawFit {
  double exponent = 0.0;   // slope of log|y| vs log|x|
  double stderr_ = 0.0;
  double prefactor = 0.0;  // exp(intercept)
  double x_lo = 0.0, x_hi = 0.0;
  int npoints = 0;
};

// Fits |y| ~ C |x|^e over the subset of samples with x_lo <= |x| <= x_hi and
// y != 0.
inline PowerLawFit fit_power_law(const std::vector<double>& x,
                                 const std::vector<double>& y, double x_lo,
                                 double x_hi) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x[i]), ay = std::abs(y[i]);
    if (ax >= x_lo && ax <= x_hi && ay > 0.0 && std::isfinite(ay)) {
      lx.push_back(std::log(ax));
      ly.push_back(std::log(ay));
    }
  }
  LineFit lf = fit_line(lx, ly);
  PowerLawFit pf;
  pf.exponent = lf.slope;
  pf.stderr_ = lf.slope_stderr;
  pf.prefactor = std::exp(lf.intercept);
  pf.x_lo = x_lo;
  pf.x_hi = x_hi;
  pf.npoints = lf.npoints;
  return pf;
}

// Convenience: fit over the last `decades` decades of |x| (samples assumed to
// span the range; uses min |x| over the data as the anchor).
inline PowerLawFit fit_power_law_last_decades(const std::vector<double>& x,
                                              const std::vector<double>& y,
                                              double decades) {
  double xmin = std::numeric_limits<double>::infinity();
  for (double v : x)
    if (std::abs(v) > 0 && std::isfinite(v)) xmin = std::min(xmin, std::abs(v));
  return fit_power_law(x, y, xmin, xmin * std::pow(10.0, decades));
}

}  // namespace ring

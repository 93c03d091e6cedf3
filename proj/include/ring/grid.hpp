#pragma once
// Uniform 1-d grids.  All profile-side numerics (quadrature, derivatives,
// banded operators) assume uniform spacing; non-uniform sampling is rejected
// at construction.

#include <Eigen/Dense>
#include <stdexcept>

namespace ring {

struct Grid1D {
  double ymin = 0.0;
  double ymax = 0.0;
  int n = 0;          // number of nodes
  double h = 0.0;     // spacing, (ymax - ymin) / (n - 1)
  Eigen::ArrayXd y;   // node coordinates

  int index_left_of(double yy) const {
    // floor index such that y[i] <= yy, clamped to valid range
    int i = static_cast<int>((yy - ymin) / h);
    if (i < 0) i = 0;
    if (i > n - 2) i = n - 2;
    return i;
  }
};

inline Grid1D make_grid(double ymin, double ymax, int n) {
  if (!(ymax > ymin) || n < 8)
    throw std::invalid_argument("make_grid: need ymax > ymin and n >= 8");
  Grid1D g;
  g.ymin = ymin;
  g.ymax = ymax;
  g.n = n;
  g.h = (ymax - ymin) / (n - 1);
  g.y = Eigen::ArrayXd::LinSpaced(n, ymin, ymax);
  return g;
}

// Default grid for the profile expansion: [-60, 60] with h = 0.02.
// Tails of every expansion field are ~exp(-60) ~ 1e-26, far below every
// tolerance used by the construction.
inline Grid1D default_profile_grid() { return make_grid(-60.0, 60.0, 6001); }

}  // namespace ring

#pragma once
// Six-point Lagrange interpolation of gridded fields at scattered points.
// Accuracy O(h^6) for smooth data; used when grid data must be sampled on a
// different mesh (e.g. profile corrections evaluated on a radial grid).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ring/grid.hpp"

namespace ring {

// interpolate uniformly gridded samples f (node i at y0 + i h, n nodes) at
// point yy; clamps the stencil to the grid and returns 0 outside the grid
// (fields of interest decay to ~1e-20 well before the boundary, so extension
// by zero is the right continuation).
template <class Arr>
typename Arr::Scalar interp6_uniform(double y0, double h, int n, const Arr& f,
                                     double yy) {
  using Scalar = typename Arr::Scalar;
  const double ymax = y0 + (n - 1) * h;
  if (yy < y0 || yy > ymax) return Scalar(0);
  int i0 = static_cast<int>(std::floor((yy - y0) / h)) - 2;
  i0 = std::clamp(i0, 0, n - 6);
  Scalar acc(0);
  for (int a = 0; a < 6; ++a) {
    double w = 1.0;
    const double ya = y0 + (i0 + a) * h;
    for (int bq = 0; bq < 6; ++bq) {
      if (bq == a) continue;
      w *= (yy - (y0 + (i0 + bq) * h)) / (ya - (y0 + (i0 + bq) * h));
    }
    acc += Scalar(w) * f[i0 + a];
  }
  return acc;
}

template <class Arr>
typename Arr::Scalar interp6(const Grid1D& g, const Arr& f, double yy) {
  return interp6_uniform(g.ymin, g.h, g.n, f, yy);
}

}  // namespace ring

#pragma once
// Fourth-order finite-difference first and second derivatives on uniform
// grids.  Interior nodes use centred 5-point stencils; the two nodes nearest
// each boundary use one-sided stencils of the same order, so the operators
// are uniformly fourth-order accurate.

#include <Eigen/Dense>

#include "ring/grid.hpp"

namespace ring {

// d/dy, fourth order.  Works for real, complex, and long double scalars.
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> derivative(
    const Grid1D& g, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& f) {
  using A = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const int n = g.n;
  const double h = g.h;
  A d(n);
  // one-sided 5-point stencils at the edges (order h^4)
  d[0] = (Scalar(-25.0) * f[0] + Scalar(48.0) * f[1] - Scalar(36.0) * f[2] +
          Scalar(16.0) * f[3] - Scalar(3.0) * f[4]) /
         Scalar(12.0 * h);
  d[1] = (Scalar(-3.0) * f[0] - Scalar(10.0) * f[1] + Scalar(18.0) * f[2] -
          Scalar(6.0) * f[3] + Scalar(1.0) * f[4]) /
         Scalar(12.0 * h);
  d[n - 2] = -(Scalar(-3.0) * f[n - 1] - Scalar(10.0) * f[n - 2] +
               Scalar(18.0) * f[n - 3] - Scalar(6.0) * f[n - 4] +
               Scalar(1.0) * f[n - 5]) /
             Scalar(12.0 * h);
  d[n - 1] = -(Scalar(-25.0) * f[n - 1] + Scalar(48.0) * f[n - 2] -
               Scalar(36.0) * f[n - 3] + Scalar(16.0) * f[n - 4] -
               Scalar(3.0) * f[n - 5]) /
             Scalar(12.0 * h);
  for (int i = 2; i < n - 2; ++i) {
    d[i] = (Scalar(-1.0) * f[i + 2] + Scalar(8.0) * f[i + 1] -
            Scalar(8.0) * f[i - 1] + Scalar(1.0) * f[i - 2]) /
           Scalar(12.0 * h);
  }
  return d;
}

// d^2/dy^2, fourth order.
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> second_derivative(
    const Grid1D& g, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& f) {
  using A = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const int n = g.n;
  const double h2 = g.h * g.h;
  A d(n);
  // one-sided 6-point stencils at the edges (order h^4)
  auto edge = [&](int i0, int s) {
    // s = +1 forward, s = -1 backward
    return (Scalar(45.0) * f[i0] - Scalar(154.0) * f[i0 + s] +
            Scalar(214.0) * f[i0 + 2 * s] - Scalar(156.0) * f[i0 + 3 * s] +
            Scalar(61.0) * f[i0 + 4 * s] - Scalar(10.0) * f[i0 + 5 * s]) /
           Scalar(12.0 * h2);
  };
  auto edge1 = [&](int i0, int s) {
    return (Scalar(10.0) * f[i0 - s] - Scalar(15.0) * f[i0] -
            Scalar(4.0) * f[i0 + s] + Scalar(14.0) * f[i0 + 2 * s] -
            Scalar(6.0) * f[i0 + 3 * s] + Scalar(1.0) * f[i0 + 4 * s]) /
           Scalar(12.0 * h2);
  };
  d[0] = edge(0, 1);
  d[1] = edge1(1, 1);
  d[n - 1] = edge(n - 1, -1);
  d[n - 2] = edge1(n - 2, -1);
  for (int i = 2; i < n - 2; ++i) {
    d[i] = (Scalar(-1.0) * f[i + 2] + Scalar(16.0) * f[i + 1] -
            Scalar(30.0) * f[i] + Scalar(16.0) * f[i - 1] -
            Scalar(1.0) * f[i - 2]) /
           Scalar(12.0 * h2);
  }
  return d;
}

}  // namespace ring

#pragma once
// Composite Simpson quadrature and the weighted norms built on it.
//
// On an even number of intervals composite Simpson is exact for cubics; for
// an odd interval count the last panel falls back to the trapezoid rule.  On
// smooth exponentially-decaying integrands (everything this project
// integrates) the rule superconverges, so grid-level identities hold to
// near machine precision.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "ring/derivative.hpp"
#include "ring/grid.hpp"

namespace ring {

// Simpson weights for the grid (includes the trapezoid patch for odd
// interval counts).  Returned as a plain array so weighted products are
// expression-friendly: integrate(f) == (weights * f).sum().
inline Eigen::ArrayXd simpson_weights(const Grid1D& g) {
  const int n = g.n;
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n);
  int m = n - 1;                    // interval count
  int simpson_end = (m % 2 == 0) ? n - 1 : n - 2;
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += g.h / 3.0;
    w[i + 1] += 4.0 * g.h / 3.0;
    w[i + 2] += g.h / 3.0;
  }
  if (m % 2 != 0) {                 // one trapezoid panel at the end
    w[n - 2] += g.h / 2.0;
    w[n - 1] += g.h / 2.0;
  }
  return w;
}

template <class Derived>
typename Derived::Scalar integrate(const Grid1D& g,
                                   const Eigen::ArrayBase<Derived>& f) {
  using Scalar = typename Derived::Scalar;
  if (f.size() != g.n) throw std::invalid_argument("integrate: size mismatch");
  const int m = g.n - 1;
  const int simpson_end = (m % 2 == 0) ? g.n - 1 : g.n - 2;
  Scalar acc{};
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    acc += f[i] + Scalar(4.0) * f[i + 1] + f[i + 2];
  }
  acc *= Scalar(g.h / 3.0);
  if (m % 2 != 0) acc += Scalar(g.h / 2.0) * (f[g.n - 2] + f[g.n - 1]);
  return acc;
}

// L^2 inner product (f, g) = integral of f*g (real fields).
inline double inner(const Grid1D& g, const Eigen::ArrayXd& f,
                    const Eigen::ArrayXd& q) {
  return integrate(g, (f * q).eval());
}

inline double l2_norm(const Grid1D& g, const Eigen::ArrayXd& f) {
  return std::sqrt(integrate(g, (f * f).eval()));
}

// ---------------------------------------------------------------------------
// Weighted H^1 norm.  The weight is the renormalized radial measure
//
//     mu(y) = (1 + (alpha b)/(2 beta) y)^{N-1}   where positive, else 0,
//
// i.e. the Jacobian of the ring coordinate change truncated at its zero.
struct WeightSpec {
  double b = 0.0;        // > 0
  double beta = 0.0;     // > 0 (beta_inf + btilde)
  double alpha = 0.0;    // in (0,1)
  int N = 3;             // >= 1

  double slope() const { return 0.5 * alpha * b / beta; }
};

inline Eigen::ArrayXd mu_weight(const Grid1D& g, const WeightSpec& w) {
  if (!(w.b > 0.0) || !(w.beta > 0.0))
    throw std::invalid_argument("mu_weight: need b > 0 and beta > 0");
  Eigen::ArrayXd base = 1.0 + w.slope() * g.y;
  Eigen::ArrayXd mu(g.n);
  for (int i = 0; i < g.n; ++i)
    mu[i] = base[i] > 0.0 ? std::pow(base[i], w.N - 1) : 0.0;
  return mu;
}

// || f ||_{H^1_mu}^2 = int (|f'|^2 + |f|^2) mu dy.
inline double h1mu_norm(const Grid1D& g, const Eigen::ArrayXcd& f,
                        const WeightSpec& w) {
  Eigen::ArrayXd mu = mu_weight(g, w);
  Eigen::ArrayXcd df = derivative<std::complex<double>>(g, f);
  Eigen::ArrayXd dens = (df.abs2() + f.abs2()) * mu;
  return std::sqrt(integrate(g, dens));
}

inline double h1_norm(const Grid1D& g, const Eigen::ArrayXcd& f) {
  Eigen::ArrayXcd df = derivative<std::complex<double>>(g, f);
  return std::sqrt(integrate(g, (df.abs2() + f.abs2()).eval()));
}

}  // namespace ring

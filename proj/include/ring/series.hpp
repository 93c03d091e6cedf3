#pragma once
// Truncated bivariate power series in the two small expansion parameters
// (b, btilde), with either real scalar coefficients (SeriesS) or complex
// field coefficients over a grid (SeriesF).  All products truncate at a
// shared total degree; coefficients are indexed by (j, l) with j + l <= deg.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ring {

inline int series_size(int deg) { return (deg + 1) * (deg + 2) / 2; }
inline int series_idx(int deg, int j, int l) {
  return j * (deg + 1) - j * (j - 1) / 2 + l;
}

// --- real scalar coefficients ----------------------------------------------
struct SeriesS {
  int deg = 0;
  std::vector<double> c;

  SeriesS() = default;
  explicit SeriesS(int d) : deg(d), c(series_size(d), 0.0) {}

  double& at(int j, int l) { return c[series_idx(deg, j, l)]; }
  double at(int j, int l) const { return c[series_idx(deg, j, l)]; }
  bool valid(int j, int l) const { return j >= 0 && l >= 0 && j + l <= deg; }

  SeriesS& operator+=(const SeriesS& o) {
    for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }

  template <class Real>
  Real eval(Real b, Real bt) const {
    // Horner in b with inner Horner in bt
    Real acc = Real(0);
    for (int j = deg; j >= 0; --j) {
      Real inner = Real(0);
      for (int l = deg - j; l >= 0; --l) inner = inner * bt + Real(at(j, l));
      acc = acc * b + inner;
    }
    return acc;
  }
};

inline SeriesS series_mul(const SeriesS& a, const SeriesS& b) {
  SeriesS r(a.deg);
  for (int j1 = 0; j1 <= a.deg; ++j1)
    for (int l1 = 0; l1 + j1 <= a.deg; ++l1) {
      const double a1 = a.at(j1, l1);
      if (a1 == 0.0) continue;
      for (int j2 = 0; j1 + l1 + j2 <= a.deg; ++j2)
        for (int l2 = 0; j1 + l1 + j2 + l2 <= a.deg; ++l2)
          r.at(j1 + j2, l1 + l2) += a1 * b.at(j2, l2);
    }
  return r;
}

// multiply by the monomial b^j0 * bt^l0 (degree-raising shift)
inline SeriesS series_shift(const SeriesS& a, int j0, int l0) {
  SeriesS r(a.deg);
  for (int j = 0; j + j0 <= a.deg; ++j)
    for (int l = 0; j + l + j0 + l0 <= a.deg; ++l)
      r.at(j + j0, l + l0) = a.at(j, l);
  return r;
}

inline SeriesS series_scale(const SeriesS& a, double s) {
  SeriesS r = a;
  for (auto& v : r.c) v *= s;
  return r;
}

// --- complex field coefficients ---------------------------------------------
struct SeriesF {
  int deg = 0;
  int n = 0;  // field length
  std::vector<Eigen::ArrayXcd> c;

  SeriesF() = default;
  SeriesF(int d, int n_) : deg(d), n(n_) {
    c.assign(series_size(d), Eigen::ArrayXcd::Zero(n_));
  }

  Eigen::ArrayXcd& at(int j, int l) { return c[series_idx(deg, j, l)]; }
  const Eigen::ArrayXcd& at(int j, int l) const {
    return c[series_idx(deg, j, l)];
  }

  SeriesF& operator+=(const SeriesF& o) {
    for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }
  SeriesF& operator-=(const SeriesF& o) {
    for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    return *this;
  }
};

inline SeriesF series_mul(const SeriesF& a, const SeriesF& b) {
  SeriesF r(a.deg, a.n);
  for (int j1 = 0; j1 <= a.deg; ++j1)
    for (int l1 = 0; l1 + j1 <= a.deg; ++l1) {
      const auto& ca = a.at(j1, l1);
      if (!ca.abs2().any()) continue;
      for (int j2 = 0; j1 + l1 + j2 <= a.deg; ++j2)
        for (int l2 = 0; j1 + l1 + j2 + l2 <= a.deg; ++l2)
          r.at(j1 + j2, l1 + l2) += ca * b.at(j2, l2);
    }
  return r;
}

inline SeriesF series_mul(const SeriesF& a, const SeriesS& s) {
  SeriesF r(a.deg, a.n);
  for (int j2 = 0; j2 <= a.deg; ++j2)
    for (int l2 = 0; j2 + l2 <= a.deg; ++l2) {
      const double sv = s.at(j2, l2);
      if (sv == 0.0) continue;
      for (int j1 = 0; j1 + j2 <= a.deg; ++j1)
        for (int l1 = 0; j1 + l1 + j2 + l2 <= a.deg; ++l1)
          r.at(j1 + j2, l1 + l2) += sv * a.at(j1, l1);
    }
  return r;
}

inline SeriesF series_scale(const SeriesF& a, std::complex<double> s) {
  SeriesF r = a;
  for (auto& v : r.c) v *= s;
  return r;
}

// multiply every coefficient pointwise by a fixed (real or complex) field
template <class Arr>
inline SeriesF series_pointwise(const SeriesF& a, const Arr& f) {
  SeriesF r = a;
  for (auto& v : r.c) v *= f;
  return r;
}

inline SeriesF series_conj(const SeriesF& a) {
  SeriesF r = a;
  for (auto& v : r.c) v = v.conjugate();
  return r;
}

// lift a scalar series to a field series along a fixed profile f
inline SeriesF series_from_scalar(const SeriesS& s, const Eigen::ArrayXcd& f) {
  SeriesF r(s.deg, static_cast<int>(f.size()));
  for (int j = 0; j <= s.deg; ++j)
    for (int l = 0; j + l <= s.deg; ++l)
      if (s.at(j, l) != 0.0) r.at(j, l) = s.at(j, l) * f;
  return r;
}

// reciprocal of a series whose constant term is pointwise nonvanishing:
// coefficients satisfy the usual convolution recursion degree by degree
inline SeriesF series_invert_unit(const SeriesF& a) {
  const Eigen::ArrayXcd& a0 = a.at(0, 0);
  if (a0.abs().minCoeff() <= 0.0)
    throw std::invalid_argument("series_invert_unit: vanishing constant term");
  SeriesF r(a.deg, a.n);
  const Eigen::ArrayXcd inv0 = a0.inverse();
  r.at(0, 0) = inv0;
  for (int m = 1; m <= a.deg; ++m)
    for (int j = m; j >= 0; --j) {
      const int l = m - j;
      Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(a.n);
      for (int q = 0; q <= j; ++q)
        for (int s = 0; s <= l; ++s) {
          if (q == 0 && s == 0) continue;
          acc += a.at(q, s) * r.at(j - q, l - s);
        }
      r.at(j, l) = -inv0 * acc;
    }
  return r;
}

}  // namespace ring

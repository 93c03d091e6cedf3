#pragma once
// Compact banded LU with partial pivoting (classic band-storage algorithm),
// templated on the scalar so the same kernel backs the real fourth-order
// operators on the profile grid and the complex Crank-Nicolson solves in the
// radial simulation.
//
// Storage: row-compact.  a(i, j) holds A(i, i - m1 + j) for j in [0, m1+m2];
// m1 = lower bandwidth, m2 = upper bandwidth.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ring {

namespace detail {
inline double band_abs(double x) { return std::abs(x); }
inline double band_abs(const std::complex<double>& x) { return std::abs(x); }
}  // namespace detail

template <class T>
struct BandedMatrix {
  int n = 0, m1 = 0, m2 = 0;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a;

  BandedMatrix() = default;
  BandedMatrix(int n_, int m1_, int m2_) : n(n_), m1(m1_), m2(m2_) {
    a.setZero(n, m1 + m2 + 1);
  }

  bool in_band(int i, int j) const {
    return j - i >= -m1 && j - i <= m2 && i >= 0 && i < n && j >= 0 && j < n;
  }
  T& at(int i, int j) { return a(i, j - i + m1); }
  T get(int i, int j) const { return in_band(i, j) ? a(i, j - i + m1) : T{}; }

  Eigen::Array<T, Eigen::Dynamic, 1> multiply(
      const Eigen::Array<T, Eigen::Dynamic, 1>& x) const {
    Eigen::Array<T, Eigen::Dynamic, 1> y(n);
    for (int i = 0; i < n; ++i) {
      T acc{};
      const int j0 = std::max(0, i - m1), j1 = std::min(n - 1, i + m2);
      for (int j = j0; j <= j1; ++j) acc += a(i, j - i + m1) * x[j];
      y[i] = acc;
    }
    return y;
  }

  double inf_norm() const {
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < m1 + m2 + 1; ++j) s += detail::band_abs(a(i, j));
      nrm = std::max(nrm, s);
    }
    return nrm;
  }
};

// LU factorization with partial pivoting; U kept in band storage, the
// multipliers and the pivot permutation on the side.
template <class T>
class BandedLU {
 public:
  explicit BandedLU(const BandedMatrix<T>& A)
      : n_(A.n), m1_(A.m1), m2_(A.m2), u_(A.a), al_(A.n, std::max(A.m1, 1)),
        indx_(A.n) {
    factor();
  }

  Eigen::Array<T, Eigen::Dynamic, 1> solve(
      const Eigen::Array<T, Eigen::Dynamic, 1>& rhs) const {
    Eigen::Array<T, Eigen::Dynamic, 1> b = rhs;
    const int mm = m1_ + m2_ + 1;
    int l = m1_;
    for (int k = 0; k < n_; ++k) {
      int i = indx_[k];
      if (i != k) std::swap(b[k], b[i]);
      if (l < n_) ++l;
      for (int j = k + 1; j < l; ++j) b[j] -= al_(k, j - k - 1) * b[k];
    }
    l = 1;
    for (int i = n_ - 1; i >= 0; --i) {
      T dum = b[i];
      for (int k = 1; k < l; ++k) dum -= u_(i, k) * b[i + k];
      b[i] = dum / u_(i, 0);
      if (l < mm) ++l;
    }
    return b;
  }

  bool near_singular() const { return near_singular_; }

 private:
  void factor() {
    const int mm = m1_ + m2_ + 1;
    int l = m1_;
    for (int i = 0; i < m1_; ++i) {  // left-justify the top rows
      for (int j = m1_ - i; j < mm; ++j) u_(i, j - l) = u_(i, j);
      --l;
      for (int j = mm - l - 1; j < mm; ++j) u_(i, j) = T{};
    }
    l = m1_;
    for (int k = 0; k < n_; ++k) {
      T dum = u_(k, 0);
      int ipiv = k;
      if (l < n_) ++l;
      for (int j = k + 1; j < l; ++j) {
        if (detail::band_abs(u_(j, 0)) > detail::band_abs(dum)) {
          dum = u_(j, 0);
          ipiv = j;
        }
      }
      indx_[k] = ipiv;
      if (detail::band_abs(dum) == 0.0) {
        u_(k, 0) = T(1e-300);  // numerically singular; flag and continue
        near_singular_ = true;
      }
      if (ipiv != k)
        for (int j = 0; j < mm; ++j) std::swap(u_(k, j), u_(ipiv, j));
      for (int i = k + 1; i < l; ++i) {
        T m = u_(i, 0) / u_(k, 0);
        al_(k, i - k - 1) = m;
        for (int j = 1; j < mm; ++j) u_(i, j - 1) = u_(i, j) - m * u_(k, j);
        u_(i, mm - 1) = T{};
      }
    }
  }

  int n_, m1_, m2_;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> u_;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> al_;
  std::vector<int> indx_;
  bool near_singular_ = false;
};

struct BandedSolveReport {
  double residual = 0.0;  // ||Ax-b||_inf / (||A||_inf ||x||_inf + ||b||_inf)
  bool near_singular = false;
};

// One-shot solve with a scaled residual report.
template <class T>
Eigen::Array<T, Eigen::Dynamic, 1> solve_banded(
    const BandedMatrix<T>& A, const Eigen::Array<T, Eigen::Dynamic, 1>& b,
    BandedSolveReport* report = nullptr) {
  if (b.size() != A.n) throw std::invalid_argument("solve_banded: size mismatch");
  BandedLU<T> lu(A);
  Eigen::Array<T, Eigen::Dynamic, 1> x = lu.solve(b);
  if (report) {
    Eigen::Array<T, Eigen::Dynamic, 1> r = A.multiply(x) - b;
    double rn = 0.0, xn = 0.0, bn = 0.0;
    for (int i = 0; i < A.n; ++i) {
      rn = std::max(rn, detail::band_abs(r[i]));
      xn = std::max(xn, detail::band_abs(x[i]));
      bn = std::max(bn, detail::band_abs(b[i]));
    }
    report->residual = rn / (A.inf_norm() * xn + bn + 1e-300);
    report->near_singular = lu.near_singular();
  }
  return x;
}

}  // namespace ring

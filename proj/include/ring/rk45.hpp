#pragma once
// Adaptive Dormand-Prince 5(4) integrator.  Steps land exactly on requested
// output abscissae; integration direction follows sign(s1 - s0).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ring/params.hpp"

namespace ring {

struct Rk45Options {
  double rtol = 1e-10;
  double atol = 1e-13;
  double h0 = 0.0;          // 0 => auto
  double hmax = 0.0;        // 0 => |s1 - s0|
  long max_steps = 50'000'000;
};

// f(s, y, dy): fills dy.  record(i, s, y) is called once per output point
// s_out[i]; s_out must be monotone in the direction of integration and lie in
// [s0, s1].
template <class F>
void rk45_integrate(F&& f, double s0, double s1, Eigen::ArrayXd y,
                    const std::vector<double>& s_out,
                    const std::function<void(int, double, const Eigen::ArrayXd&)>& record,
                    const Rk45Options& opt = {}) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600,
                      e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640,
                      e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  const double dir = (s1 >= s0) ? 1.0 : -1.0;
  const double span = std::abs(s1 - s0);
  if (span == 0.0) return;
  const double hmax = opt.hmax > 0 ? opt.hmax : span;
  double h = opt.h0 > 0 ? opt.h0 : std::min(hmax, span / 100.0);
  h *= dir;

  const int n = static_cast<int>(y.size());
  Eigen::ArrayXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y5(n);
  double s = s0;
  size_t iout = 0;
  f(s, y, k1);
  long steps = 0;

  while (dir * (s1 - s) > 0) {
    if (++steps > opt.max_steps)
      throw NumericalError("rk45: step limit exceeded");
    // do not step past the next output point or the end
    double target = s1;
    if (iout < s_out.size() && dir * (s_out[iout] - s) <= dir * (s1 - s))
      target = s_out[iout];
    if (dir * (s + h - target) > 0) h = target - s;

    yt = y + h * a21 * k1;
    f(s + c2 * h, yt, k2);
    yt = y + h * (a31 * k1 + a32 * k2);
    f(s + c3 * h, yt, k3);
    yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(s + c4 * h, yt, k4);
    yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(s + c5 * h, yt, k5);
    yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(s + h, yt, k6);
    y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(s + h, y5, k7);

    Eigen::ArrayXd err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double enorm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      enorm = std::max(enorm, std::abs(err[i]) / sc);
    }
    if (!std::isfinite(enorm)) throw NumericalError("rk45: non-finite state");

    if (enorm <= 1.0) {                       // accept
      s += h;
      y = y5;
      k1 = k7;                                // FSAL
      while (iout < s_out.size() && dir * (s - s_out[iout]) >= 0) {
        record(static_cast<int>(iout), s_out[iout], y);
        ++iout;
      }
    }
    const double fac =
        std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(enorm, 1e-10), -0.2)));
    h *= fac;
    if (std::abs(h) > hmax) h = dir * hmax;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(s)))
      throw NumericalError("rk45: step size underflow");
  }
  while (iout < s_out.size()) {               // end point outputs
    record(static_cast<int>(iout), s_out[iout], y);
    ++iout;
  }
}

}  // namespace ring

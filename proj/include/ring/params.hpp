#pragma once
// Problem parameters for the radial nonlinear Schrodinger equation
//
//     i u_t + Delta u + |u|^{p-1} u = 0,   x in R^N,
//
// in the slightly mass-supercritical window where collapsing-ring blow-up
// solutions exist:
//
//     1 + 4/N < p < min((N+2)/(N-2), 5)          (upper bound = 5 when N = 2).
//
// Derived constants used throughout:
//
//     alpha    = (5-p) / ((p-1)(N-1))   in (0,1)   ring collapse-rate exponent
//     beta_inf = sqrt((5-p)/(p+3))      in (0,1)   asymptotic ring velocity
//     s_c      = N/2 - 2/(p-1)          in (0,1)   critical Sobolev index
//     k                                            profile truncation order,
//                                                  k >= 5 and k > 2/(1-alpha) + 1
//
// The default k is max(5, ceil(2/(1-alpha)) + 2).

#include <stdexcept>
#include <string>

namespace ring {

struct ProblemParams {
  int N = 3;            // spatial dimension, >= 2
  double p = 3.0;       // nonlinearity exponent
  double alpha = 0.0;
  double beta_inf = 0.0;
  double s_c = 0.0;
  int k = 0;            // truncation order of the profile expansion
};

// Thrown by operations that hit a genuine numerical breakdown (non-finite
// values, solver failure).  CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Validates (N, p), fills the derived constants.  k < 0 selects the default
// truncation order.  Throws std::invalid_argument on inadmissible input.
ProblemParams make_params(int N, double p, int k = -1);

}  // namespace ring

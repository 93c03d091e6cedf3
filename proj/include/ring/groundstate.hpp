#pragma once
// The 1-d ground state Q and its closed-form relatives.  Q is the unique
// positive even decaying solution of
//
//     Q'' - Q + Q^p = 0,
//
// given explicitly by
//
//     Q(y)      = ( (p+1) / (2 cosh^2((p-1)y/2)) )^{1/(p-1)},
//     Q'(y)     = -Q(y) tanh((p-1)y/2),
//     Q^{p-1}(y) = (p+1) / (2 cosh^2((p-1)y/2)),
//
// together with the scaling generator  Lam f = (2/(p-1)) f + y f'.
//
// Grid-level identities checked by check_identities():
//     int Q^2   = (p+3)/(p-1) * int (Q')^2          (Pohozaev)
//     (Q, LamQ) = (5-p)/(2(p-1)) * int Q^2

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>

#include "ring/grid.hpp"
#include "ring/params.hpp"

namespace ring {

// Scalar-templated closed forms (long double instances back the residual
// evaluation path).
template <class Real>
Real Q_closed(double p, Real y) {
  const Real a = Real(0.5) * Real(p - 1.0);
  const Real sech = Real(1) / std::cosh(a * y);
  return std::pow(Real(0.5) * Real(p + 1.0) * sech * sech,
                  Real(1) / Real(p - 1.0));
}

template <class Real>
Real Qprime_closed(double p, Real y) {
  const Real a = Real(0.5) * Real(p - 1.0);
  return -Q_closed<Real>(p, y) * std::tanh(a * y);
}

template <class Real>
Real Qpm1_closed(double p, Real y) {  // Q^{p-1}
  const Real a = Real(0.5) * Real(p - 1.0);
  const Real sech = Real(1) / std::cosh(a * y);
  return Real(0.5) * Real(p + 1.0) * sech * sech;
}

struct GroundState {
  ProblemParams prm;
  Grid1D grid;
  Eigen::ArrayXd Q;      // Q(y_i)
  Eigen::ArrayXd Qp;     // Q'
  Eigen::ArrayXd Qpm1;   // Q^{p-1}
  Eigen::ArrayXd Qpow;   // Q^p
  Eigen::ArrayXd LamQ;   // (2/(p-1)) Q + y Q'
  Eigen::ArrayXd yQ;     // y Q
};

GroundState eval_groundstate(const ProblemParams& prm, const Grid1D& grid);

struct IdentityReport {
  double intQ2 = 0.0;            // int Q^2
  double intQp2 = 0.0;           // int (Q')^2
  double QLamQ = 0.0;            // (Q, LamQ)
  double pohozaev_defect = 0.0;  // relative defect of the Pohozaev identity
  double lamQ_defect = 0.0;      // relative defect of (Q,LamQ) vs closed form
};

IdentityReport check_identities(const GroundState& gs);

void write_identity_report(const std::filesystem::path& path,
                           const IdentityReport& rep);

}  // namespace ring

#pragma once
// Linearized operators around the ground state:
//
//     L+ = -d^2/dy^2 + 1 - p Q^{p-1}        (real part)
//     L- = -d^2/dy^2 + 1 - Q^{p-1}          (imaginary part)
//
// Kernel identities:  L- Q = 0,  L+ Q' = 0,  L+ (Lam Q) = -2Q,
// L- (yQ) = -2Q'.
//
// Solves are posed as bordered (augmented) systems
//
//     [ L+-  c ] [x ]   [h]
//     [ r^T  0 ] [mu] = [0]
//
// with c the discrete kernel direction and r its quadrature-weighted copy,
// which simultaneously removes the kernel (multiplier mu absorbs the
// solvability defect) and pins the gauge (x, kernel)_{L^2} = 0.  The border
// keeps the system well conditioned even though L+- themselves are nearly
// singular on the grid.

#include <Eigen/Dense>
#include <memory>

#include "ring/banded.hpp"
#include "ring/groundstate.hpp"
#include "ring/quadrature.hpp"

namespace ring {

struct ConstrainedSolution {
  Eigen::ArrayXd x;
  double mu = 0.0;        // multiplier (~ solvability defect / ||kernel||^2)
  double defect = 0.0;    // (h, kernel)_{L^2} of the given right-hand side
  double gauge = 0.0;     // (x, kernel)_{L^2} after the solve
  double residual = 0.0;  // scaled residual of the bordered system
};

class LinearizedPair {
 public:
  LinearizedPair(const GroundState& gs);

  const GroundState& gs() const { return *gs_; }
  const Grid1D& grid() const { return gs_->grid; }

  // Full fourth-order applications (one-sided stencils at the edges).
  Eigen::ArrayXd apply_Lplus(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd apply_Lminus(const Eigen::ArrayXd& f) const;

  // Applications of the exact solve matrices (Dirichlet identity rows at the
  // ends); inverse to solve_L* up to the gauge multiplier.
  Eigen::ArrayXd apply_Lplus_matrix(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd apply_Lminus_matrix(const Eigen::ArrayXd& f) const;

  // Bordered solves; gauge (x, Q')=0 resp. (x, Q)=0.
  ConstrainedSolution solve_Lplus(const Eigen::ArrayXd& h) const;
  ConstrainedSolution solve_Lminus(const Eigen::ArrayXd& h) const;

  const Eigen::ArrayXd& weights() const { return w_; }

 private:
  ConstrainedSolution solve_one(const BandedLU<double>& lu,
                                const BandedMatrix<double>& A,
                                const Eigen::ArrayXd& kernel,
                                const Eigen::ArrayXd& x2,
                                const Eigen::ArrayXd& h) const;

  std::shared_ptr<const GroundState> gs_;
  Eigen::ArrayXd w_;        // Simpson weights
  Eigen::ArrayXd Vp_, Vm_;  // potentials 1 - pQ^{p-1}, 1 - Q^{p-1}
  BandedMatrix<double> Ap_, Am_;
  std::unique_ptr<BandedLU<double>> lup_, lum_;
  Eigen::ArrayXd x2p_, x2m_;  // cached A^{-1} * kernel columns
};

// ---------------------------------------------------------------------------
// Coercivity of the linearized energy.  theta_plus is the smallest Rayleigh
// quotient of (L+ e, e) over the H^1-unit sphere subject to (e,Q)=(e,yQ)=0;
// theta_minus the same for L- subject to (e,LamQ)=0.  Both are computed by
// inverse iteration on bordered banded systems; theta_min = min of the two.
struct CoercivityResult {
  double theta_min = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  int iters = 0;
  double resid = 0.0;  // ||A x - theta M x|| / ||M x|| at convergence
};

CoercivityResult coercivity_min_eig(const GroundState& gs);

// Unconstrained smallest H^1 Rayleigh quotient of L+ (negative: one unstable
// direction).
double lplus_min_eig_unconstrained(const GroundState& gs);

// Symmetric banded quadratic forms used by the eigensolves (exposed for the
// dense test oracle): x^T A x = int ((x')^2 + V x^2),  x^T M x = int ((x')^2 + x^2).
BandedMatrix<double> quadratic_form_banded(const Grid1D& g,
                                           const Eigen::ArrayXd& V);
BandedMatrix<double> h1_gram_banded(const Grid1D& g);

}  // namespace ring

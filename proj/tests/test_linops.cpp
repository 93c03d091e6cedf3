// Linearized operators: kernel identities, bordered solves against known
// right-hand sides, and the constrained/unconstrained eigenvalue machinery
// checked against a dense generalized eigensolver on the same grid.

#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "ring/groundstate.hpp"
#include "ring/linops.hpp"
#include "ring/quadrature.hpp"

using namespace ring;

namespace {

Eigen::MatrixXd densify(const BandedMatrix<double>& A) {
  Eigen::MatrixXd D(A.n, A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) D(i, j) = A.get(i, j);
  return D;
}

// Orthonormal basis of the subspace { x : C^T x = 0 } via full QR.
Eigen::MatrixXd null_basis(const Eigen::MatrixXd& C) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  Eigen::MatrixXd Qfull = qr.householderQ();
  return Qfull.rightCols(C.rows() - C.cols());
}

// Smallest generalized eigenvalue of (Z^T A Z) x = theta (Z^T M Z) x.
double dense_min_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                     const Eigen::MatrixXd& Z) {
  Eigen::MatrixXd Ar = Z.transpose() * A * Z;
  Eigen::MatrixXd Mr = Z.transpose() * M * Z;
  Ar = 0.5 * (Ar + Ar.transpose()).eval();
  Mr = 0.5 * (Mr + Mr.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ar, Mr);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("kernel identities hold at 1e-6 sup norm across the matrix") {
  const int Ns[4] = {3, 2, 4, 5};
  const double ps[4] = {3.0, 4.0, 2.5, 2.0};
  for (int i = 0; i < 4; ++i) {
    CAPTURE(Ns[i]);
    CAPTURE(ps[i]);
    const ProblemParams prm = make_params(Ns[i], ps[i]);
    const GroundState gs = eval_groundstate(prm, default_profile_grid());
    const LinearizedPair L(gs);
    CHECK(L.apply_Lminus(gs.Q).abs().maxCoeff() <= 1e-6);
    CHECK(L.apply_Lplus(gs.Qp).abs().maxCoeff() <= 1e-6);
    CHECK((L.apply_Lplus(gs.LamQ) + 2.0 * gs.Q).abs().maxCoeff() <= 1e-6);
    CHECK((L.apply_Lminus(gs.yQ) + 2.0 * gs.Qp).abs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("bordered solves invert onto the known preimages") {
  const ProblemParams prm = make_params(3, 3.0);
  const GroundState gs = eval_groundstate(prm, default_profile_grid());
  const LinearizedPair L(gs);

  // L+ LamQ = -2Q and (LamQ, Q') = 0 by parity, so the gauge-pinned solve
  // of L+ x = -2Q must return LamQ itself.
  {
    const ConstrainedSolution sol = L.solve_Lplus((-2.0 * gs.Q).eval());
    CHECK((sol.x - gs.LamQ).abs().maxCoeff() <= 1e-6);
    CHECK(std::abs(sol.gauge) <= 1e-9);
    CHECK(std::abs(sol.defect) <= 1e-9);   // even rhs vs odd kernel
    CHECK(std::abs(sol.mu) <= 1e-6);
    CHECK(sol.residual <= 1e-12);
    // the committed matrix reproduces the right-hand side up to mu
    const Eigen::ArrayXd back = L.apply_Lplus_matrix(sol.x);
    CHECK((back + 2.0 * gs.Q).abs().maxCoeff() <= 1e-6);
  }

  // L- (yQ) = -2Q' and (yQ, Q) = 0 by parity.
  {
    const ConstrainedSolution sol = L.solve_Lminus((-2.0 * gs.Qp).eval());
    CHECK((sol.x - gs.yQ).abs().maxCoeff() <= 1e-6);
    CHECK(std::abs(sol.gauge) <= 1e-9);
    CHECK(std::abs(sol.defect) <= 1e-9);
    CHECK(sol.residual <= 1e-12);
    const Eigen::ArrayXd back = L.apply_Lminus_matrix(sol.x);
    CHECK((back + 2.0 * gs.Qp).abs().maxCoeff() <= 1e-6);
  }

  // a right-hand side with a kernel component: the multiplier absorbs it and
  // the reported defect matches the L^2 pairing with the kernel direction
  {
    const Eigen::ArrayXd h = gs.Qp + gs.Q;  // (h, Q') = int (Q')^2 != 0
    const ConstrainedSolution sol = L.solve_Lplus(h);
    const double expect = inner(gs.grid, h, gs.Qp);
    CHECK(sol.defect == doctest::Approx(expect).epsilon(1e-10));
    CHECK(std::abs(sol.gauge) <= 1e-9);
    CHECK(sol.residual <= 1e-12);
  }
}

TEST_CASE("constrained and unconstrained minimal quotients match a dense oracle") {
  const ProblemParams prm = make_params(3, 3.0);
  const Grid1D g = make_grid(-25.0, 25.0, 801);
  const GroundState gs = eval_groundstate(prm, g);

  const Eigen::ArrayXd w = simpson_weights(g);
  const Eigen::MatrixXd A =
      densify(quadratic_form_banded(g, (1.0 - prm.p * gs.Qpm1).eval()));
  const Eigen::MatrixXd Am =
      densify(quadratic_form_banded(g, (1.0 - gs.Qpm1).eval()));
  const Eigen::MatrixXd M = densify(h1_gram_banded(g));

  const CoercivityResult cr = coercivity_min_eig(gs);
  CHECK(cr.theta_plus > 0.0);
  CHECK(cr.theta_minus > 0.0);
  CHECK(cr.theta_min ==
        doctest::Approx(std::min(cr.theta_plus, cr.theta_minus)));
  CHECK(cr.resid <= 1e-8);

  // dense oracle for theta_plus: constraints (e, Q) = (e, yQ) = 0
  {
    Eigen::MatrixXd C(g.n, 2);
    C.col(0) = (w * gs.Q).matrix();
    C.col(1) = (w * gs.yQ).matrix();
    const double dense = dense_min_eig(A, M, null_basis(C));
    CHECK(cr.theta_plus == doctest::Approx(dense).epsilon(1e-6));
  }
  // dense oracle for theta_minus: constraint (e, LamQ) = 0
  {
    Eigen::MatrixXd C(g.n, 1);
    C.col(0) = (w * gs.LamQ).matrix();
    const double dense = dense_min_eig(Am, M, null_basis(C));
    CHECK(cr.theta_minus == doctest::Approx(dense).epsilon(1e-6));
  }
  // unconstrained L+ quotient is negative (one unstable direction) and
  // matches the dense solver on the full space
  {
    const double un = lplus_min_eig_unconstrained(gs);
    CHECK(un < 0.0);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (A + A.transpose()), 0.5 * (M + M.transpose()));
    CHECK(un == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-6));
  }
}

TEST_CASE("quadratic forms evaluate the declared integrals") {
  const Grid1D g = make_grid(-15.0, 15.0, 601);
  const Eigen::ArrayXd V = (-0.5 * g.y.square()).exp() + 0.25;
  const BandedMatrix<double> A = quadratic_form_banded(g, V);
  const BandedMatrix<double> M = h1_gram_banded(g);

  const Eigen::ArrayXd x = (-g.y.square()).exp() * (1.0 + 0.3 * g.y);
  const Eigen::ArrayXd dx = derivative<double>(g, x);

  const double xAx = (x * A.multiply(x)).sum();
  const double expectA = integrate(g, (dx.square() + V * x.square()).eval());
  CHECK(xAx == doctest::Approx(expectA).epsilon(1e-6));

  const double xMx = (x * M.multiply(x)).sum();
  const double expectM = integrate(g, (dx.square() + x.square()).eval());
  CHECK(xMx == doctest::Approx(expectM).epsilon(1e-6));
}

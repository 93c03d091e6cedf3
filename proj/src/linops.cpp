#include "ring/linops.hpp"

#include <cmath>
#include <vector>

#include "ring/derivative.hpp"

namespace ring {

namespace {

// Solve matrix for  -d^2/dy^2 + V  with Dirichlet ends.  Interior rows use
// the centred fourth-order stencil; the rows adjacent to the boundary drop to
// the second-order stencil (field values there are ~exp(-60) tails, so no
// accuracy is lost) keeping the bandwidth at 2.
BandedMatrix<double> schrodinger_matrix(const Grid1D& g,
                                        const Eigen::ArrayXd& V) {
  const int n = g.n;
  const double h2 = g.h * g.h;
  BandedMatrix<double> A(n, 2, 2);
  A.at(0, 0) = 1.0;
  A.at(n - 1, n - 1) = 1.0;
  for (int i : {1, n - 2}) {
    A.at(i, i - 1) = -1.0 / h2;
    A.at(i, i) = 2.0 / h2 + V[i];
    A.at(i, i + 1) = -1.0 / h2;
  }
  for (int i = 2; i < n - 2; ++i) {
    A.at(i, i - 2) = 1.0 / (12.0 * h2);
    A.at(i, i - 1) = -16.0 / (12.0 * h2);
    A.at(i, i) = 30.0 / (12.0 * h2) + V[i];
    A.at(i, i + 1) = -16.0 / (12.0 * h2);
    A.at(i, i + 2) = 1.0 / (12.0 * h2);
  }
  return A;
}

// First-derivative stencil of row i as (column, coefficient) pairs.
std::vector<std::pair<int, double>> d1_row(const Grid1D& g, int i) {
  const int n = g.n;
  std::vector<std::pair<int, double>> r;
  if (i == 0)
    r = {{0, -25}, {1, 48}, {2, -36}, {3, 16}, {4, -3}};
  else if (i == 1)
    r = {{0, -3}, {1, -10}, {2, 18}, {3, -6}, {4, 1}};
  else if (i == n - 2)
    r = {{n - 1, 3}, {n - 2, 10}, {n - 3, -18}, {n - 4, 6}, {n - 5, -1}};
  else if (i == n - 1)
    r = {{n - 1, 25}, {n - 2, -48}, {n - 3, 36}, {n - 4, -16}, {n - 5, 3}};
  else
    r = {{i - 2, 1}, {i - 1, -8}, {i + 1, 8}, {i + 2, -1}};
  for (auto& e : r) e.second /= 12.0 * g.h;
  return r;
}

}  // namespace

BandedMatrix<double> quadratic_form_banded(const Grid1D& g,
                                           const Eigen::ArrayXd& V) {
  const int n = g.n;
  Eigen::ArrayXd w = simpson_weights(g);
  BandedMatrix<double> A(n, 4, 4);
  for (int k = 0; k < n; ++k) {
    auto row = d1_row(g, k);
    for (const auto& [i, ci] : row)
      for (const auto& [j, cj] : row) A.at(i, j) += ci * w[k] * cj;
  }
  for (int i = 0; i < n; ++i) A.at(i, i) += w[i] * V[i];
  return A;
}

BandedMatrix<double> h1_gram_banded(const Grid1D& g) {
  return quadratic_form_banded(g, Eigen::ArrayXd::Ones(g.n));
}

// ---------------------------------------------------------------------------

LinearizedPair::LinearizedPair(const GroundState& gs)
    : gs_(std::make_shared<GroundState>(gs)) {
  const Grid1D& g = gs_->grid;
  w_ = simpson_weights(g);
  Vp_ = 1.0 - gs_->prm.p * gs_->Qpm1;
  Vm_ = 1.0 - gs_->Qpm1;
  Ap_ = schrodinger_matrix(g, Vp_);
  Am_ = schrodinger_matrix(g, Vm_);
  lup_ = std::make_unique<BandedLU<double>>(Ap_);
  lum_ = std::make_unique<BandedLU<double>>(Am_);
  x2p_ = lup_->solve(gs_->Qp);  // kernel of L+ is Q'
  x2m_ = lum_->solve(gs_->Q);   // kernel of L- is Q
}

Eigen::ArrayXd LinearizedPair::apply_Lplus(const Eigen::ArrayXd& f) const {
  return -second_derivative<double>(gs_->grid, f) + Vp_ * f;
}

Eigen::ArrayXd LinearizedPair::apply_Lminus(const Eigen::ArrayXd& f) const {
  return -second_derivative<double>(gs_->grid, f) + Vm_ * f;
}

Eigen::ArrayXd LinearizedPair::apply_Lplus_matrix(
    const Eigen::ArrayXd& f) const {
  return Ap_.multiply(f);
}

Eigen::ArrayXd LinearizedPair::apply_Lminus_matrix(
    const Eigen::ArrayXd& f) const {
  return Am_.multiply(f);
}

ConstrainedSolution LinearizedPair::solve_one(const BandedLU<double>& lu,
                                              const BandedMatrix<double>& A,
                                              const Eigen::ArrayXd& kernel,
                                              const Eigen::ArrayXd& x2,
                                              const Eigen::ArrayXd& h) const {
  ConstrainedSolution sol;
  const Eigen::ArrayXd r = w_ * kernel;  // quadrature-weighted constraint row
  sol.defect = (r * h).sum();            // (h, kernel)_{L^2}

  // Schur complement of the bordered system: column = kernel, row = r.
  Eigen::ArrayXd x1 = lu.solve(h);
  const double S = (r * x2).sum();
  double mu = (r * x1).sum() / S;
  Eigen::ArrayXd x = x1 - mu * x2;

  // Two refinement passes against the full bordered residual remove the
  // error amplification the near-singular A induces in the Schur path.
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::ArrayXd rm = h - A.multiply(x) - mu * kernel;
    const double rc = -(r * x).sum();
    Eigen::ArrayXd d1 = lu.solve(rm);
    const double dmu = ((r * d1).sum() - rc) / S;
    x += d1 - dmu * x2;
    mu += dmu;
  }

  Eigen::ArrayXd rm = h - A.multiply(x) - mu * kernel;
  const double rc = (r * x).sum();
  const double scale =
      A.inf_norm() * (x.abs().maxCoeff() + std::abs(mu)) +
      h.abs().maxCoeff() + 1e-300;
  sol.x = std::move(x);
  sol.mu = mu;
  sol.gauge = rc;
  sol.residual =
      std::max(rm.abs().maxCoeff(), std::abs(rc)) / scale;
  return sol;
}

ConstrainedSolution LinearizedPair::solve_Lplus(const Eigen::ArrayXd& h) const {
  return solve_one(*lup_, Ap_, gs_->Qp, x2p_, h);
}

ConstrainedSolution LinearizedPair::solve_Lminus(const Eigen::ArrayXd& h) const {
  return solve_one(*lum_, Am_, gs_->Q, x2m_, h);
}

// ---------------------------------------------------------------------------
// Constrained inverse iteration for the pencil (A, M) restricted to the
// intersection of the constraint hyperplanes (x, q_i)_{L^2} = 0.
namespace {

struct PencilEig {
  double theta = 0.0;
  int iters = 0;
  double resid = 0.0;
};

PencilEig constrained_min_eig(const Grid1D& g, const BandedMatrix<double>& A,
                              const BandedMatrix<double>& M,
                              const std::vector<Eigen::ArrayXd>& constraints,
                              double shift = 0.0) {
  const int n = g.n;
  const int m = static_cast<int>(constraints.size());
  Eigen::ArrayXd w = simpson_weights(g);

  BandedMatrix<double> As = A;
  if (shift != 0.0) {
    for (int i = 0; i < n; ++i)
      for (int j = std::max(0, i - A.m1); j <= std::min(n - 1, i + A.m2); ++j)
        As.at(i, j) = A.get(i, j) - shift * M.get(i, j);
  }
  BandedLU<double> lu(As);

  std::vector<Eigen::ArrayXd> rows, X2;
  Eigen::MatrixXd S(m, m);
  for (int i = 0; i < m; ++i) rows.push_back((w * constraints[i]).eval());
  for (int i = 0; i < m; ++i) X2.push_back(lu.solve(rows[i]));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) S(i, j) = (rows[i] * X2[j]).sum();
  Eigen::PartialPivLU<Eigen::MatrixXd> slu;
  if (m > 0) slu.compute(S);

  auto bordered_solve = [&](const Eigen::ArrayXd& f) {
    Eigen::ArrayXd x1 = lu.solve(f);
    if (m == 0) return x1;
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = (rows[i] * x1).sum();
    Eigen::VectorXd mu = slu.solve(rhs);
    for (int i = 0; i < m; ++i) x1 -= mu[i] * X2[i];
    return x1;
  };

  // deterministic start, loosely matching the expected ground shape
  Eigen::ArrayXd x = (-(g.y * g.y) / 8.0).exp() * (1.0 + 0.3 * g.y);
  x = bordered_solve(M.multiply(x));  // project into the constraint space

  PencilEig out;
  double theta_prev = 1e300;
  for (int it = 1; it <= 500; ++it) {
    Eigen::ArrayXd Mx = M.multiply(x);
    Eigen::ArrayXd xn = bordered_solve(Mx);
    const double nrm = std::sqrt((xn * M.multiply(xn)).sum());
    x = xn / nrm;
    const double theta = (x * A.multiply(x)).sum() / (x * M.multiply(x)).sum();
    out.iters = it;
    if (std::abs(theta - theta_prev) <= 1e-13 * std::max(1.0, std::abs(theta))) {
      out.theta = theta;
      break;
    }
    theta_prev = theta;
    out.theta = theta;
  }
  Eigen::ArrayXd res = A.multiply(x) - out.theta * M.multiply(x);
  out.resid = std::sqrt((res * res).sum()) /
              std::sqrt((M.multiply(x) * M.multiply(x)).sum());
  return out;
}

}  // namespace

CoercivityResult coercivity_min_eig(const GroundState& gs) {
  const Grid1D& g = gs.grid;
  const double p = gs.prm.p;
  BandedMatrix<double> Ap = quadratic_form_banded(g, (1.0 - p * gs.Qpm1).eval());
  BandedMatrix<double> Am = quadratic_form_banded(g, (1.0 - gs.Qpm1).eval());
  BandedMatrix<double> M = h1_gram_banded(g);

  PencilEig ep = constrained_min_eig(g, Ap, M, {gs.Q, gs.yQ});
  PencilEig em = constrained_min_eig(g, Am, M, {gs.LamQ});

  CoercivityResult out;
  out.theta_plus = ep.theta;
  out.theta_minus = em.theta;
  out.theta_min = std::min(ep.theta, em.theta);
  out.iters = ep.iters + em.iters;
  out.resid = std::max(ep.resid, em.resid);
  return out;
}

double lplus_min_eig_unconstrained(const GroundState& gs) {
  const Grid1D& g = gs.grid;
  const double p = gs.prm.p;
  Eigen::ArrayXd V = 1.0 - p * gs.Qpm1;
  BandedMatrix<double> A = quadratic_form_banded(g, V);
  BandedMatrix<double> M = h1_gram_banded(g);
  // shift strictly below the bottom of the spectrum
  const double sigma = V.minCoeff() - 0.5;
  PencilEig e = constrained_min_eig(g, A, M, {}, sigma);
  return e.theta;
}

}  // namespace ring

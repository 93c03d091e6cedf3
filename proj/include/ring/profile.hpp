#pragma once
// Near-soliton profile expansion.  The ansatz is
//   P(y; b, btilde) = Q(y) + sum_{1 <= j+l <= k-1} b^j btilde^l (T_jl + i S_jl)
// together with scalar polynomials P1, P2 collecting the solvability
// constants c1, c2 of each order.  build_expansion() generates all orders by
// solving one pair of constrained 1-D linear problems per order; the full
// evolution operator applied to the truncated ansatz then vanishes to order
// k in (b, btilde), which residual_Psi() measures pointwise.

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ring/grid.hpp"
#include "ring/groundstate.hpp"
#include "ring/linops.hpp"
#include "ring/params.hpp"
#include "ring/series.hpp"

namespace ring {

struct OrderData {
  int j = 0, l = 0;
  Eigen::ArrayXd T, S;        // real / imaginary profile corrections
  Eigen::ArrayXd rhs1, rhs2;  // committed right-hand sides after c-correction
  double c1 = 0.0, c2 = 0.0;
  // diagnostics from the constrained solves
  double raw_defect1 = 0.0;  // (h1, Q')_W before correction
  double raw_defect2 = 0.0;  // (h2, Q)_W  before correction
  double defect1 = 0.0, defect2 = 0.0;  // post-correction solvability defects
  double gauge1 = 0.0, gauge2 = 0.0;    // gauge projections of the solutions
  double resid1 = 0.0, resid2 = 0.0;    // linear-solve backward errors
};

struct ProfileExpansion {
  ProblemParams prm;
  Grid1D grid;
  std::shared_ptr<GroundState> gs;
  int deg = 0;                    // truncation degree = k - 1
  std::vector<OrderData> orders;  // total degree 1..deg, j descending within
  SeriesS P1, P2;                 // c1/c2 constants as polynomials in (b, bt)

  const OrderData* find(int j, int l) const;
  double c1(int j, int l) const { return P1.at(j, l); }
  double c2(int j, int l) const { return P2.at(j, l); }
};

ProfileExpansion build_expansion(const ProblemParams& prm, const Grid1D& grid);

// Largest relative mismatch between apply_L{+,-}(T/S) and the committed
// right-hand sides over all stored orders (weighted L2).
double verify_expansion(const ProfileExpansion& ex);

// sup over |y| in [ylo, yhi] of |T_jl(y)| e^{|y|} / (1+|y|)^{2(j+l)} plus the
// same for S_jl: bounds the decay envelope of a stored order.
double decay_envelope(const ProfileExpansion& ex, int j, int l, double ylo,
                      double yhi);

// smooth cutoff: 1 for y >= -1, 0 for y <= -2, C^infty in between
double zeta_cutoff(double y);
Eigen::ArrayXd zeta_b(const Grid1D& g, double b);

// P evaluated at numeric (b, btilde) on the expansion grid (no cutoff/phase)
Eigen::ArrayXcd eval_P(const ProfileExpansion& ex, double b, double bt);

// full localized profile Q_b = zeta_b(y) P(y) e^{-i beta y - i b y^2/4}
Eigen::ArrayXcd assemble_Qb(const ProfileExpansion& ex, double b, double bt);

// Point evaluations at arbitrary y: Q from the closed form, the correction
// fields by 6-point interpolation (0 outside the expansion grid, where they
// have decayed below roundoff anyway).
std::complex<double> eval_P_at(const ProfileExpansion& ex, double b, double bt,
                               double y);
std::complex<double> eval_Qb_at(const ProfileExpansion& ex, double b, double bt,
                                double y);

struct PsiReport {
  Eigen::ArrayXcd Psi;  // pointwise residual, flat-phase frame
  double h1mu = 0.0;    // weighted H^1 norm
  double l2mu = 0.0;    // weighted L^2 norm
  double sup = 0.0;
};

// Exact (non-series) evaluation of the evolution operator on the truncated
// ansatz at numeric (b, btilde), in extended precision, returned in the
// flat-phase frame.  Norms are taken over |y| <= ywin (the window where the
// weight is uniformly positive for every admissible b).
PsiReport residual_Psi(const ProfileExpansion& ex, double b, double bt,
                       double ywin = 50.0);

// truncated series for f(P) = |P|^{p-1} P around Q; exposed for testing
SeriesF nonlinearity_series(const GroundState& gs, const SeriesF& P);

void save_expansion(const ProfileExpansion& ex,
                    const std::filesystem::path& dir);
ProfileExpansion load_expansion(const std::filesystem::path& dir);

}  // namespace ring

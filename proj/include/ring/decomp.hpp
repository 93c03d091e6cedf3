#pragma once
// Decomposition of a radial wave field into the modulated ring ansatz plus a
// remainder pinned by four orthogonality conditions, the modulation-equation
// residuals along a sequence of decompositions, and the localized
// energy/Morawetz functional with its coercivity diagnostic.
//
// The decomposition writes
//   u(r) = lambda^{-2/(p-1)} [ Q_{b,btilde}(y) + eps(y) ] e^{i gamma},
//   y = (r - r0)/lambda,   b = 2 beta lambda / (alpha r0)   (frozen law),
// with eps_tilde = eps e^{i beta y} satisfying
//   (Re eps~, zeta_b yQ) = (Re eps~, zeta_b Q) = 0,
//   (Im eps~, zeta_b LamQ) = (Im eps~, zeta_b Q') = 0.
// (lambda, r0, gamma, btilde) are solved by a damped Newton iteration; b is
// never an independent unknown.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ring/modode.hpp"
#include "ring/nlsim.hpp"
#include "ring/params.hpp"
#include "ring/profile.hpp"

namespace ring {

struct NewtonOptions {
  int max_iters = 50;
  double tol = 1e-11;       // absolute tolerance on the residual norm
  double fd_rel = 1e-6;     // FD Jacobian step, scaled per unknown
  double basin_delta = 0.1; // documented trust region for initial guesses
};

struct DecompResult {
  ModState m;                   // lambda, r, gamma, btilde, b (frozen), t
  Eigen::ArrayXcd eps;          // remainder on the expansion y-grid
  Eigen::ArrayXcd eps_tilde;    // eps * e^{i beta y}
  double eps_h1mu = 0, eps_l2mu = 0, eps_sup = 0;
  std::array<double, 4> ortho{};  // orthogonality residuals at the solution
  int newton_iters = 0;
  double newton_residual = 0;
};

// Orthogonality residuals (yQ, Q | LamQ, Q') of the candidate parameters.
std::array<double, 4> orthogonality_residuals(const ProfileExpansion& ex,
                                              const RadialGrid& rg,
                                              const Eigen::ArrayXcd& u,
                                              double lambda, double r0,
                                              double gamma, double btilde);

// Damped Newton on (lambda, r0, gamma, btilde) from the given guess.  Throws
// NumericalError when the iteration stalls or the Jacobian degenerates.
DecompResult decompose(const ProfileExpansion& ex, const RadialGrid& rg,
                       const Eigen::ArrayXcd& u, double t, const ModState& guess,
                       const NewtonOptions& opt = {});

// Determinant of the deformation-map Jacobian at an exact ansatz with
// parameters (b0, btilde0), rows ordered (yQ, Q, Q', LamQ) and columns
// (z, mu, btilde, gamma); approaches -(1/16) ((5-p)/(p-1))^2 ||Q||_2^8 as
// b0 -> 0.
double jacobian_determinant(const ProfileExpansion& ex, double b0, double bt0);

// Decompose a time-ordered snapshot sequence, warm-starting each solve from
// the previous solution with the phase advanced by the predicted
// (1 + beta^2) * ds (keeps gamma on the same branch between snapshots).
// guess0 seeds the first snapshot.
std::vector<DecompResult> decompose_chain(const ProfileExpansion& ex,
                                          const RadialGrid& rg,
                                          const std::vector<Snapshot>& snaps,
                                          const ModState& guess0,
                                          const NewtonOptions& opt = {});

// Modulation-equation residuals along a chained sequence of decompositions.
// s is the rescaled clock ds = dt/lambda^2 accumulated by trapezoid; the four
// residual channels use centered second-order difference quotients in s
// (nonuniform-spacing form), endpoints dropped.
struct ModSeries {
  std::vector<double> t, s;
  std::vector<double> r_channel;       // |r_s/lambda + 2 beta|
  std::vector<double> gamma_channel;   // |gamma_s - 1 - beta^2|
  std::vector<double> lambda_channel;  // |lambda_s/lambda + b - P1|
  std::vector<double> btilde_channel;  // |btilde_s - P2|
  std::vector<double> total;           // sum of the four
  std::vector<double> bound_ref;       // b ||eps~||_H1mu + b^k
  double max_spacing_variation = 0;    // max relative jump of consecutive ds
};
ModSeries mod_residuals(const ProfileExpansion& ex,
                        const std::vector<DecompResult>& seq);

// Morawetz cutoff: C^infty bump, phi(0) = 1, supported in (-1/2, 1/2),
// sup phi = 1 < sqrt(1 + beta_inf^2)/beta_inf for every admissible parameter
// set (asserted by functional_I).
double morawetz_phi(double z);

// Renormalized energy/Morawetz functional (the value lambda^2 * I of the
// physical functional):
//   1/2 { int |d_y eps|^2 mu + 2 beta Im int phi(z) d_y eps conj(eps) mu
//         + (1+beta^2) int |eps|^2 mu
//         - 2 int [F(Qb+eps) - F(Qb) - Re(f(Qb) conj(eps))] mu },
// z = (alpha b / (2 beta)) y, F(u) = |u|^{p+1}/(p+1), f(u) = |u|^{p-1} u.
double functional_I(const ProfileExpansion& ex, double b, double bt,
                    const Eigen::ArrayXcd& eps);

// Coercivity probe: the ratio functional_I / ||eps||_{H^1_mu}^2.
double coercivity_ratio(const ProfileExpansion& ex, double b, double bt,
                        const Eigen::ArrayXcd& eps);

// Draw a smooth random complex field on the expansion grid (fixed-seed
// mt19937_64), then project out the four orthogonality directions at the
// given b.  Used to sample the coercivity constant.
Eigen::ArrayXcd random_orthogonalized_field(const ProfileExpansion& ex,
                                            double b, double bt,
                                            std::uint64_t seed);

// decomposition CSV: t,lambda,r,gamma,btilde,b,eps_h1mu,ortho1..4,mod_total
void write_decomposition_csv(const std::string& path,
                             const std::vector<DecompResult>& seq,
                             const ModSeries& mods);

}  // namespace ring

#pragma once
// Finite-dimensional modulation system in rescaled time s.
//
// State (g, b, btilde, gamma) with beta = beta_inf + btilde and the derived
// quantities
//     lambda = (alpha * b * g / (2 beta))^(1/(1-alpha)),   r = g * lambda^alpha,
// evolving as
//     dg/ds      = -alpha * P1 * g
//     db/ds      = -(1-alpha) b^2 + (b/beta) P2 + b P1
//     dbtilde/ds = P2
//     dgamma/ds  = 1 + beta^2
// plus the quadrature dtau/ds = lambda^2 that recovers physical time.
// P1, P2 are the modulation polynomials of the ring profile expansion; the
// leading truncation P1 = 0, P2 = -2 b btilde is available for closed-form
// checks.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ring/fitting.hpp"
#include "ring/params.hpp"
#include "ring/profile.hpp"
#include "ring/series.hpp"

namespace ring {

// Evaluator for the modulation polynomials.
class ModPolys {
 public:
  // Leading truncation: P1 = 0, P2 = -2 b btilde.
  ModPolys() = default;
  // Full tables from a built profile expansion.
  explicit ModPolys(const ProfileExpansion& ex) : leading_(false), p1_(ex.P1), p2_(ex.P2) {}

  double P1(double b, double bt) const {
    return leading_ ? 0.0 : p1_.eval(b, bt);
  }
  double P2(double b, double bt) const {
    return leading_ ? -2.0 * b * bt : p2_.eval(b, bt);
  }
  bool leading() const { return leading_; }

 private:
  bool leading_ = true;
  SeriesS p1_, p2_;
};

struct ModState {
  double s = 0;       // rescaled time
  double t = 0;       // physical time, shifted so blow-up sits at t = 0
  double lambda = 0;  // scale
  double r = 0;       // ring radius
  double b = 0;
  double btilde = 0;
  double gamma = 0;
  double g = 0;       // r / lambda^alpha
  double tau = 0;     // integral of lambda^2 ds from s0 (raw clock)
};

struct ModTrajectory {
  ProblemParams prm;
  std::vector<ModState> states;      // log-spaced in s
  double s0 = 0, s1 = 0;
  double g0 = 0, gamma0 = 0;
  // Tail power-law fit lambda ~ C s^-q used to close the time integral.
  PowerLawFit lambda_tail;
  double tau_to_blowup = 0;          // tau(s1) + closed-form tail integral
  // First s at which |btilde| > s^{-3/2}, or 0 if the bound held throughout.
  double bootstrap_exit_s = 0;
};

// Derived scales from the frozen law.
double mod_lambda(const ProblemParams& prm, double g, double b, double beta);

// Integrate the exact system from s0 to s1 (s1 > s0 >= 100) with initial data
//   b(s0) = 1/((1-alpha) s0),  btilde(s0) = 1/s0^2,  g(s0) = g0 in (1/2, 1),
//   gamma(s0) = gamma0,
// recording n_out log-spaced states.  Throws std::invalid_argument on an
// out-of-range s0 or g0.
ModTrajectory integrate_exact(const ProblemParams& prm, const ModPolys& polys,
                              double s0, double s1, double g0, double gamma0,
                              int n_out = 600, double rtol = 1e-10);

// Power-law fits of lambda, r, gamma against |t| over the last `decades`
// decades of |t| (the asymptotic regime near blow-up).
struct BlowupExponents {
  PowerLawFit lambda_fit;  // expected exponent 1/(1+alpha)
  PowerLawFit r_fit;       // expected exponent alpha/(1+alpha)
  PowerLawFit gamma_fit;   // expected exponent -(1-alpha)/(1+alpha)
};
BlowupExponents fit_blowup_exponents(const ModTrajectory& traj, double decades = 2.0);

// g(s) limit extracted from two tail windows (last decade and the one before);
// returns {g_inf, |window difference|}.
std::array<double, 2> extract_g_infinity(const ModTrajectory& traj);

// Max over the trajectory tail (s >= s_floor) of |b (1-alpha) s - 1| * s / log s,
// i.e. the measured constant in the b-law residual bound C log s / s.
double b_law_residual_constant(const ModTrajectory& traj, double s_floor = 1e3);

// Worst relative drift of the frozen-law identity b = 2 beta lambda / (alpha r)
// over the recorded states (identically small by construction; a consistency
// check on the derived columns).
double frozen_law_drift(const ModTrajectory& traj);

// trajectory CSV: columns s,t,lambda,r,b,btilde,gamma,g
void write_trajectory_csv(const std::string& path, const ModTrajectory& traj);

// Perturbed twin experiment: settle the exact system on its attractor by a
// forward pass s_end -> sbar, then integrate it together with a copy whose
// right-hand sides carry O(b^k) forcings
//     forcing_i = forcing_scale * sign_i * b^k
// on the (g, b, btilde, gamma) equations, both initialized identically at
// s = sbar and integrated backward to s_end < sbar (away from blow-up, |t|
// increasing).  The differences obey |delta| <~ |t|^e with
//     e = k(1-alpha)/(1+alpha) + 1 - 2/(1+alpha),
// fitted over the last two decades of |t|.
struct PerturbedRun {
  ProblemParams prm;
  double forcing_scale = 0;
  std::uint64_t seed = 0;            // 0 => deterministic worst case (all +1)
  std::array<int, 4> signs{1, 1, 1, 1};
  std::vector<double> s, t;          // t from the exact trajectory, blow-up at 0
  std::vector<double> dg, db, dbt, dgamma;
  PowerLawFit fit;                   // |db|+|dbt|+|dg| vs |t|
  double predicted_exponent = 0;     // k(1-a)/(1+a) + 1 - 2/(1+a)
  // First s (going down from sbar) at which |delta b|+|delta btilde|+|delta g|
  // exceeds |t|^{2/(1+alpha)}, or 0 if never.
  double bound_exit_s = 0;
};

double perturbed_decay_exponent(const ProblemParams& prm);

PerturbedRun integrate_perturbed(const ProblemParams& prm, const ModPolys& polys,
                                 double forcing_scale, double sbar = 1.0e4,
                                 double s_end = 100.0, bool random_signs = false,
                                 std::uint64_t seed = 20260815ull,
                                 int n_out = 400, double rtol = 1e-10);

}  // namespace ring

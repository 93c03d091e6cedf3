#include "ring/modode.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ring/io.hpp"
#include "ring/rk45.hpp"

namespace ring {

namespace {

std::vector<double> log_spaced(double s0, double s1, int n) {
  std::vector<double> s(n);
  const double ratio = std::log(s1 / s0);
  for (int i = 0; i < n; ++i)
    s[i] = s0 * std::exp(ratio * double(i) / double(n - 1));
  s.front() = s0;
  s.back() = s1;
  return s;
}

}  // namespace

double mod_lambda(const ProblemParams& prm, double g, double b, double beta) {
  const double x = prm.alpha * b * g / (2.0 * beta);
  if (!(x > 0))
    throw NumericalError("mod_lambda: nonpositive scale argument");
  return std::pow(x, 1.0 / (1.0 - prm.alpha));
}

ModTrajectory integrate_exact(const ProblemParams& prm, const ModPolys& polys,
                              double s0, double s1, double g0, double gamma0,
                              int n_out, double rtol) {
  if (!(s0 >= 100.0))
    throw std::invalid_argument("integrate_exact: require s0 >= 100");
  if (!(s1 > s0))
    throw std::invalid_argument("integrate_exact: require s1 > s0");
  if (!(g0 > 0.5 && g0 < 1.0))
    throw std::invalid_argument("integrate_exact: require g0 in (1/2, 1)");
  if (n_out < 10) throw std::invalid_argument("integrate_exact: n_out < 10");

  const double alpha = prm.alpha, binf = prm.beta_inf;

  ModTrajectory traj;
  traj.prm = prm;
  traj.s0 = s0;
  traj.s1 = s1;
  traj.g0 = g0;
  traj.gamma0 = gamma0;
  traj.states.reserve(n_out);

  // y = (g, b, btilde, gamma, tau)
  Eigen::ArrayXd y(5);
  y << g0, 1.0 / ((1.0 - alpha) * s0), 1.0 / (s0 * s0), gamma0, 0.0;

  auto rhs = [&](double /*s*/, const Eigen::ArrayXd& u, Eigen::ArrayXd& du) {
    const double g = u[0], b = u[1], bt = u[2];
    const double beta = binf + bt;
    const double p1 = polys.P1(b, bt), p2 = polys.P2(b, bt);
    du.resize(5);
    du[0] = -alpha * p1 * g;
    du[1] = -(1.0 - alpha) * b * b + (b / beta) * p2 + b * p1;
    du[2] = p2;
    du[3] = 1.0 + beta * beta;
    const double lam = std::pow(alpha * b * g / (2.0 * beta), 1.0 / (1.0 - alpha));
    du[4] = lam * lam;
  };

  auto push_state = [&](double s, const Eigen::ArrayXd& u) {
    ModState st;
    st.s = s;
    st.g = u[0];
    st.b = u[1];
    st.btilde = u[2];
    st.gamma = u[3];
    st.tau = u[4];
    const double beta = binf + st.btilde;
    st.lambda = mod_lambda(prm, st.g, st.b, beta);
    st.r = st.g * std::pow(st.lambda, alpha);
    traj.states.push_back(st);
    if (traj.bootstrap_exit_s == 0.0 &&
        std::abs(st.btilde) > std::pow(s, -1.5))
      traj.bootstrap_exit_s = s;
  };

  push_state(s0, y);
  std::vector<double> s_out = log_spaced(s0, s1, n_out);
  s_out.erase(s_out.begin());  // initial state already recorded

  Rk45Options opt;
  opt.rtol = rtol;
  opt.atol = 1e-16;
  rk45_integrate(rhs, s0, s1, y, s_out,
                 [&](int, double s, const Eigen::ArrayXd& u) { push_state(s, u); },
                 opt);

  // Tail fit lambda ~ C s^-q over the last decade of s, then close the clock:
  // integral_{s1}^{inf} lambda^2 ds = C^2 s1^{1-2q} / (2q - 1).
  {
    std::vector<double> xs, ys;
    for (const auto& st : traj.states) {
      xs.push_back(st.s);
      ys.push_back(st.lambda);
    }
    traj.lambda_tail = fit_power_law(xs, ys, s1 / 10.0, s1);
    const double q = -traj.lambda_tail.exponent, C = traj.lambda_tail.prefactor;
    if (!(2.0 * q > 1.0))
      throw NumericalError("integrate_exact: lambda tail decays too slowly to close the time integral");
    const double tail = C * C * std::pow(s1, 1.0 - 2.0 * q) / (2.0 * q - 1.0);
    traj.tau_to_blowup = traj.states.back().tau + tail;
    for (auto& st : traj.states) st.t = st.tau - traj.tau_to_blowup;
  }
  return traj;
}

BlowupExponents fit_blowup_exponents(const ModTrajectory& traj, double decades) {
  std::vector<double> at, lam, rr, gam;
  for (const auto& st : traj.states) {
    at.push_back(std::abs(st.t));
    lam.push_back(st.lambda);
    rr.push_back(st.r);
    gam.push_back(std::abs(st.gamma));
  }
  BlowupExponents e;
  e.lambda_fit = fit_power_law_last_decades(at, lam, decades);
  e.r_fit = fit_power_law_last_decades(at, rr, decades);
  e.gamma_fit = fit_power_law_last_decades(at, gam, decades);
  return e;
}

std::array<double, 2> extract_g_infinity(const ModTrajectory& traj) {
  const double s1 = traj.states.back().s;
  double g_prev = traj.states.front().g;
  for (const auto& st : traj.states)
    if (st.s <= s1 / 10.0) g_prev = st.g;
  const double g_inf = traj.states.back().g;
  return {g_inf, std::abs(g_inf - g_prev)};
}

double b_law_residual_constant(const ModTrajectory& traj, double s_floor) {
  double worst = 0.0;
  for (const auto& st : traj.states) {
    if (st.s < s_floor) continue;
    const double resid = std::abs(st.b * (1.0 - traj.prm.alpha) * st.s - 1.0);
    worst = std::max(worst, resid * st.s / std::log(st.s));
  }
  return worst;
}

double frozen_law_drift(const ModTrajectory& traj) {
  double worst = 0.0;
  for (const auto& st : traj.states) {
    const double beta = traj.prm.beta_inf + st.btilde;
    const double b_law = 2.0 * beta * st.lambda / (traj.prm.alpha * st.r);
    worst = std::max(worst, std::abs(b_law - st.b) / std::abs(st.b));
  }
  return worst;
}

void write_trajectory_csv(const std::string& path, const ModTrajectory& traj) {
  CsvTable t;
  t.columns = {"s", "t", "lambda", "r", "b", "btilde", "gamma", "g"};
  for (const auto& st : traj.states)
    t.rows.push_back({st.s, st.t, st.lambda, st.r, st.b, st.btilde, st.gamma, st.g});
  t.write(path);
}

double perturbed_decay_exponent(const ProblemParams& prm) {
  const double a = prm.alpha;
  return prm.k * (1.0 - a) / (1.0 + a) + 1.0 - 2.0 / (1.0 + a);
}

PerturbedRun integrate_perturbed(const ProblemParams& prm, const ModPolys& polys,
                                 double forcing_scale, double sbar, double s_end,
                                 bool random_signs, std::uint64_t seed,
                                 int n_out, double rtol) {
  if (!(s_end >= 50.0))
    throw std::invalid_argument("integrate_perturbed: require s_end >= 50");
  if (!(sbar >= 10.0 * s_end))
    throw std::invalid_argument("integrate_perturbed: require sbar >= 10 * s_end");

  const double alpha = prm.alpha, binf = prm.beta_inf;
  const int k = prm.k;

  PerturbedRun run;
  run.prm = prm;
  run.forcing_scale = forcing_scale;
  run.predicted_exponent = perturbed_decay_exponent(prm);
  if (random_signs) {
    run.seed = seed;
    std::mt19937_64 gen(seed);
    for (int i = 0; i < 4; ++i) run.signs[i] = (gen() & 1u) ? 1 : -1;
  }

  Rk45Options opt;
  opt.rtol = rtol;
  opt.atol = 1e-18;

  // Settle the base trajectory onto the attractor by running the exact system
  // forward from s_end (where b = 1/((1-alpha) s_end)) up to sbar.  Starting
  // the twins directly at sbar with the closed-form seed would put them
  // off-attractor, and the backward-growing homogeneous mode excited by that
  // mismatch distorts the fitted decay power of the differences.
  Eigen::ArrayXd yb(4);
  yb << 0.8, 1.0 / ((1.0 - alpha) * s_end), 1.0 / (s_end * s_end), 0.0;
  auto settle_rhs = [&](double /*s*/, const Eigen::ArrayXd& u, Eigen::ArrayXd& du) {
    const double g = u[0], b = u[1], bt = u[2];
    const double beta = binf + bt;
    const double p1 = polys.P1(b, bt), p2 = polys.P2(b, bt);
    du.resize(4);
    du[0] = -alpha * p1 * g;
    du[1] = -(1.0 - alpha) * b * b + (b / beta) * p2 + b * p1;
    du[2] = p2;
    du[3] = 1.0 + beta * beta;
  };
  rk45_integrate(settle_rhs, s_end, sbar, yb, {sbar},
                 [&yb](int, double, const Eigen::ArrayXd& u) { yb = u; }, opt);

  // y = (g, b, bt, gamma) exact | (g, b, bt, gamma) perturbed | tau
  Eigen::ArrayXd y(9);
  y << yb[0], yb[1], yb[2], yb[3], yb[0], yb[1], yb[2], yb[3], 0.0;

  auto rhs = [&](double /*s*/, const Eigen::ArrayXd& u, Eigen::ArrayXd& du) {
    du.resize(9);
    for (int block = 0; block < 2; ++block) {
      const int o = 4 * block;
      const double g = u[o + 0], b = u[o + 1], bt = u[o + 2];
      const double beta = binf + bt;
      const double p1 = polys.P1(b, bt), p2 = polys.P2(b, bt);
      const double force =
          (block == 1) ? forcing_scale * std::pow(std::abs(b), k) : 0.0;
      du[o + 0] = -alpha * p1 * g + force * run.signs[0];
      du[o + 1] = -(1.0 - alpha) * b * b + (b / beta) * p2 + b * p1 +
                  force * run.signs[1];
      du[o + 2] = p2 + force * run.signs[2];
      du[o + 3] = 1.0 + beta * beta + force * run.signs[3];
    }
    const double lam =
        std::pow(alpha * u[1] * u[0] / (2.0 * (binf + u[2])), 1.0 / (1.0 - alpha));
    du[8] = lam * lam;
  };

  std::vector<double> s_out = log_spaced(sbar, s_end, n_out);  // descending
  auto record = [&](int, double s, const Eigen::ArrayXd& u) {
    run.s.push_back(s);
    run.t.push_back(u[8]);  // raw tau, shifted below
    run.dg.push_back(u[4] - u[0]);
    run.db.push_back(u[5] - u[1]);
    run.dbt.push_back(u[6] - u[2]);
    run.dgamma.push_back(u[7] - u[3]);
  };
  record(0, sbar, y);
  s_out.erase(s_out.begin());

  rk45_integrate(rhs, sbar, s_end, y, s_out, record, opt);

  // Physical time: fit the exact lambda tail near sbar to anchor |t(sbar)|,
  // then t(s) = -|t(sbar)| + tau(s) with tau(sbar) = 0 and tau decreasing.
  {
    // lambda^2 = d tau / ds recovered from the recorded clock by centered
    // differences, then fitted as a power law in s.
    std::vector<double> lam2s, lam2v;
    for (size_t i = 1; i + 1 < run.s.size(); ++i) {
      const double d = (run.t[i + 1] - run.t[i - 1]) / (run.s[i + 1] - run.s[i - 1]);
      if (d > 0) {
        lam2s.push_back(run.s[i]);
        lam2v.push_back(std::sqrt(d));
      }
    }
    PowerLawFit lf = fit_power_law(lam2s, lam2v, sbar / 10.0, sbar);
    const double q = -lf.exponent, C = lf.prefactor;
    if (!(2.0 * q > 1.0))
      throw NumericalError("integrate_perturbed: lambda tail decays too slowly");
    const double t_sbar = -C * C * std::pow(sbar, 1.0 - 2.0 * q) / (2.0 * q - 1.0);
    for (auto& tv : run.t) tv += t_sbar;
  }

  // Bound check and difference fit.
  const double expo_bound = 2.0 / (1.0 + alpha);
  std::vector<double> at, dsum;
  for (size_t i = 0; i < run.s.size(); ++i) {
    const double sum =
        std::abs(run.db[i]) + std::abs(run.dbt[i]) + std::abs(run.dg[i]);
    at.push_back(std::abs(run.t[i]));
    dsum.push_back(sum);
    if (run.bound_exit_s == 0.0 && sum > std::pow(std::abs(run.t[i]), expo_bound))
      run.bound_exit_s = run.s[i];
  }
  // Fit window: the last two decades of |t| (the far end of the backward run),
  // well clear of the zero difference at sbar and of integrator noise.
  double t_hi = 0.0;
  for (double v : at) t_hi = std::max(t_hi, v);
  if (forcing_scale != 0.0)
    run.fit = fit_power_law(at, dsum, t_hi / 100.0, t_hi);
  return run;
}

}  // namespace ring

#include "ring/nlsim.hpp"

#include <algorithm>
#include <cmath>

#include "ring/io.hpp"

namespace ring {

using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using cplx = std::complex<double>;

RadialGrid make_radial_grid(int N, double rmax, int n) {
  if (N < 1 || N > 12)
    throw std::invalid_argument("make_radial_grid: N out of range [1, 12]");
  if (!(rmax > 0) || n < 16)
    throw std::invalid_argument("make_radial_grid: need rmax > 0 and n >= 16");
  RadialGrid g;
  g.N = N;
  g.rmax = rmax;
  g.n = n;
  g.h = rmax / (n - 1);
  g.r = ArrayXd::LinSpaced(n, 0.0, rmax);
  g.face.resize(n - 1);
  g.vol.resize(n);
  for (int i = 0; i + 1 < n; ++i) {
    const double rf = (i + 0.5) * g.h;
    g.face[i] = std::pow(rf, N - 1) / g.h;
  }
  g.vol[0] = std::pow(0.5 * g.h, N) / N;
  for (int i = 1; i + 1 < n; ++i)
    g.vol[i] =
        (std::pow(g.r[i] + 0.5 * g.h, N) - std::pow(g.r[i] - 0.5 * g.h, N)) / N;
  g.vol[n - 1] = (std::pow(rmax, N) - std::pow(rmax - 0.5 * g.h, N)) / N;
  return g;
}

double sphere_area(int N) {
  return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

Eigen::ArrayXcd radial_laplacian(const RadialGrid& g, const Eigen::ArrayXcd& u) {
  const int n = g.n;
  ArrayXcd out = ArrayXcd::Zero(n);
  out[0] = g.face[0] * (u[1] - u[0]) / g.vol[0];
  for (int i = 1; i + 1 < n; ++i)
    out[i] = (g.face[i] * (u[i + 1] - u[i]) - g.face[i - 1] * (u[i] - u[i - 1])) /
             g.vol[i];
  // Dirichlet boundary node pinned to zero
  return out;
}

WaveField build_initial_data(const ProfileExpansion& ex, const ModState& m,
                             const RadialGrid& grid) {
  const double p = ex.prm.p;
  if (!(m.lambda > 0) || !(m.r > 0))
    throw std::invalid_argument("build_initial_data: need lambda, r > 0");
  if (!(m.b > 0) || !(m.b < 0.5))
    throw std::invalid_argument("build_initial_data: b outside (0, 0.5)");
  if (m.r - 2.0 / std::sqrt(m.b) * m.lambda <= 0.0)
    throw std::invalid_argument(
        "build_initial_data: cutoff support reaches r <= 0; increase r(tbar) "
        "or b");
  WaveField f;
  f.grid = grid;
  f.t = m.t;
  f.u.resize(grid.n);
  const double amp = std::pow(m.lambda, -2.0 / (p - 1.0));
  const cplx phase(std::cos(m.gamma), std::sin(m.gamma));
  for (int i = 0; i < grid.n; ++i) {
    const double y = (grid.r[i] - m.r) / m.lambda;
    f.u[i] = amp * eval_Qb_at(ex, m.b, m.btilde, y) * phase;
  }
  const double sup = f.u.abs().maxCoeff();
  if (std::abs(f.u[grid.n - 1]) > 1e-8 * sup ||
      std::abs(f.u[grid.n - 2]) > 1e-8 * sup)
    throw std::invalid_argument(
        "build_initial_data: profile has not decayed at rmax; enlarge rmax");
  f.u[grid.n - 1] = 0.0;
  return f;
}

void add_ring_perturbation(const ProblemParams& prm, const ModState& m,
                           double amp, WaveField& f) {
  if (amp == 0.0) return;
  if (!(m.lambda > 0) || !(m.r > 0))
    throw std::invalid_argument("add_ring_perturbation: need lambda, r > 0");
  const double scale = amp * std::pow(m.lambda, -2.0 / (prm.p - 1.0));
  const cplx phase(std::cos(m.gamma), std::sin(m.gamma));
  for (int i = 0; i < f.grid.n - 1; ++i) {
    const double y = (f.grid.r[i] - m.r) / m.lambda;
    if (std::abs(y) > 40.0) continue;
    const double env = std::exp(-y * y / 50.0);
    const cplx shape(env * std::cos(0.7 * y),
                     env * 0.6 * std::sin(1.3 * y + 0.4));
    f.u[i] += scale * shape * phase;
  }
}

Conserved conserved_quantities(const RadialGrid& g, const Eigen::ArrayXcd& u,
                               double p) {
  const double area = sphere_area(g.N);
  Conserved c;
  const ArrayXd a2 = u.abs2();
  c.mass = area * (g.vol * a2).sum();
  double gs = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) gs += g.face[i] * std::norm(u[i + 1] - u[i]);
  c.grad_sq = area * gs;
  const double pot = (g.vol * a2.pow(0.5 * (p + 1.0))).sum();
  c.energy = 0.5 * c.grad_sq - area * pot / (p + 1.0);
  c.sup_amp = std::sqrt(a2.maxCoeff());
  return c;
}

// quintic C^2 ramp H on [0,1]: H(0)=2, H'(0)=2, H''(0)=1, H(1)=H'(1)=H''(1)=0
namespace {
inline double ramp(double x) {
  return 2.0 + x * (2.0 + x * (0.5 + x * (-33.5 + x * (47.5 - 18.5 * x))));
}
inline double ramp_prime(double x) {
  return 2.0 + x * (1.0 + x * (-100.5 + x * (190.0 - 92.5 * x)));
}
}  // namespace

double virial_psi(double rho) {
  if (rho <= 2.0) return 0.5 * rho * rho;
  if (rho >= 3.0) return 0.0;
  return ramp(rho - 2.0);
}

double virial_psi_prime(double rho) {
  if (rho <= 2.0) return rho;
  if (rho >= 3.0) return 0.0;
  return ramp_prime(rho - 2.0);
}

Virial localized_virial(const RadialGrid& g, const Eigen::ArrayXcd& u,
                        double R) {
  if (!(R > 0) || !(R < g.rmax / 3.0))
    throw std::invalid_argument("localized_virial: need 0 < R < rmax/3");
  const double area = sphere_area(g.N);
  Virial v;
  double chi = 0.0, flux = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double rho = g.r[i] / R;
    const double psi = R * R * virial_psi(rho);
    chi += g.vol[i] * psi * std::norm(u[i]);
    if (i > 0 && i + 1 < g.n) {
      const double psip = R * virial_psi_prime(rho);
      if (psip != 0.0) {
        const cplx du = (u[i + 1] - u[i - 1]) / (2.0 * g.h);
        flux += g.vol[i] * psip * std::imag(du * std::conj(u[i]));
      }
    }
  }
  v.chi = area * chi;
  v.flux = area * flux;
  return v;
}

Stepper::Stepper(const RadialGrid& g, double p)
    : g_(g), p_(p), lhs_(g.n, 1, 1), rhs_(g.n, 1, 1) {}

void Stepper::refactor(double dt) {
  const int n = g_.n;
  const cplx ih(0.0, 0.5 * dt);  // i dt/2
  lhs_.a.setZero();
  rhs_.a.setZero();
  auto couple = [&](int i, int j, double Lij) {
    lhs_.at(i, j) += -ih * Lij;
    rhs_.at(i, j) += ih * Lij;
  };
  for (int i = 0; i + 1 < n; ++i) {
    lhs_.at(i, i) = 1.0;
    rhs_.at(i, i) = 1.0;
    if (i > 0) {
      couple(i, i - 1, g_.face[i - 1] / g_.vol[i]);
      couple(i, i, -(g_.face[i - 1] + g_.face[i]) / g_.vol[i]);
    } else {
      couple(0, 0, -g_.face[0] / g_.vol[0]);
    }
    couple(i, i + 1, g_.face[i] / g_.vol[i]);
  }
  lhs_.at(n - 1, n - 1) = 1.0;  // Dirichlet
  rhs_.at(n - 1, n - 1) = 1.0;
  lu_ = std::make_unique<BandedLU<cplx>>(lhs_);
  dt_cached_ = dt;
  ++refactors_;
}

void Stepper::step(Eigen::ArrayXcd& u, double dt) {
  if (dt != dt_cached_) refactor(dt);
  const double half = 0.5 * dt;
  auto phase_kick = [&](ArrayXcd& v) {
    const int n = static_cast<int>(v.size());
    if (p_ == 3.0) {
      for (int i = 0; i < n; ++i) {
        const double th = half * std::norm(v[i]);
        v[i] *= cplx(std::cos(th), std::sin(th));
      }
    } else {
      const double e = 0.5 * (p_ - 1.0);
      for (int i = 0; i < n; ++i) {
        const double th = half * std::pow(std::norm(v[i]), e);
        v[i] *= cplx(std::cos(th), std::sin(th));
      }
    }
  };
  phase_kick(u);
  ArrayXcd rv = rhs_.multiply(u);
  u = lu_->solve(rv);
  phase_kick(u);
}

namespace {

double estimate_radius(const RadialGrid& g, const ArrayXd& a2) {
  int im = 0;
  double best = -1.0;
  for (int i = 0; i < g.n; ++i)
    if (a2[i] > best) {
      best = a2[i];
      im = i;
    }
  if (im == 0 || im + 1 == g.n) return g.r[im];
  const double d2 = a2[im - 1] - 2.0 * a2[im] + a2[im + 1];
  if (d2 >= 0.0) return g.r[im];
  const double off = 0.5 * (a2[im - 1] - a2[im + 1]) / d2;
  return g.r[im] + off * g.h;
}

}  // namespace

double estimate_blowup_time(const std::vector<DiagRow>& diag, double alpha) {
  const int n = static_cast<int>(diag.size());
  if (n < 8) throw std::invalid_argument("estimate_blowup_time: too few rows");
  std::vector<double> t, G;
  for (int i = n / 2; i < n; ++i) {
    t.push_back(diag[i].t);
    G.push_back(std::pow(diag[i].grad_norm, -(1.0 + alpha)));
  }
  LineFit lf = fit_line(t, G);
  if (!(lf.slope < 0))
    throw NumericalError(
        "estimate_blowup_time: gradient is not growing toward blow-up");
  return -lf.intercept / lf.slope;
}

SimResult run_to_blowup(const ProblemParams& prm, WaveField field,
                        const SimOptions& opt) {
  const RadialGrid& g = field.grid;
  ArrayXcd& u = field.u;
  double t = field.t;
  const double p = prm.p;
  const double Q0 = Q_closed<double>(p, 0.0);
  const double R = opt.virial_R > 0 ? opt.virial_R : g.rmax / 3.5;

  SimResult res;
  res.prm = prm;

  auto lambda_of_sup = [&](double sup) {
    return std::pow(Q0 / sup, 0.5 * (p - 1.0));
  };
  auto record = [&](double tv) {
    Conserved c = conserved_quantities(g, u, p);
    Virial v = localized_virial(g, u, R);
    DiagRow row;
    row.t = tv;
    row.mass = c.mass;
    row.energy = c.energy;
    row.grad_norm = std::sqrt(c.grad_sq);
    row.sup_amp = c.sup_amp;
    row.virial_chi = v.chi;
    row.virial_flux = v.flux;
    row.r_est = estimate_radius(g, u.abs2());
    row.lambda_est = lambda_of_sup(c.sup_amp);
    res.diag.push_back(row);
    return row;
  };

  DiagRow r0 = record(t);
  const double mass0 = r0.mass, energy0 = r0.energy, sup0 = r0.sup_amp;
  const bool want_snaps = opt.snapshot_stride > 0 || opt.snapshot_ds > 0;
  if (want_snaps) res.snapshots.push_back({t, u});
  double s_accum = 0;  // rescaled time since the last snapshot

  Stepper st(g, p);
  auto dt_wanted = [&](double sup) {
    return std::min(opt.dt_cap,
                    opt.dt_phase / std::pow(sup * sup, 0.5 * (p - 1.0)));
  };
  double dt = dt_wanted(sup0);
  long steps = 0;

  while (true) {
    if (steps >= opt.max_steps) {
      res.stop_reason = "step limit";
      break;
    }
    st.step(u, dt);
    t += dt;
    ++steps;

    const double sup = std::sqrt(u.abs2().maxCoeff());
    if (!std::isfinite(sup))
      throw NumericalError("run_to_blowup: non-finite amplitude (dt too large "
                           "or grid too coarse)");
    if (std::abs(u[g.n - 2]) > 1e-8 * sup)
      throw NumericalError(
          "run_to_blowup: boundary contamination at rmax; enlarge rmax");

    const bool diag_now = (steps % opt.diag_stride == 0);
    DiagRow row;
    if (diag_now) {
      row = record(t);
      res.mass_drift =
          std::max(res.mass_drift, std::abs(row.mass - mass0) / mass0);
      res.energy_drift =
          std::max(res.energy_drift,
                   std::abs(row.energy - energy0) / (std::abs(energy0) + 1.0));
    }
    if (want_snaps && static_cast<int>(res.snapshots.size()) < opt.max_snapshots) {
      const double lam = lambda_of_sup(sup);
      s_accum += dt / (lam * lam);
      const bool by_stride =
          opt.snapshot_stride > 0 && steps % opt.snapshot_stride == 0;
      const bool by_ds = opt.snapshot_ds > 0 && s_accum >= opt.snapshot_ds;
      if (by_stride || by_ds) {
        res.snapshots.push_back({t, u});
        s_accum = 0;
      }
    }

    if (sup >= opt.amplification * sup0) {
      if (!diag_now) record(t);
      res.stop_reason = "amplification";
      break;
    }
    if (lambda_of_sup(sup) < opt.lambda_floor_cells * g.h) {
      if (!diag_now) record(t);
      res.stop_reason = "resolution floor";
      break;
    }

    const double want = dt_wanted(sup);
    if (std::abs(want - dt) > opt.refactor_rel * dt) dt = want;
  }

  res.steps = steps;
  res.t_end = t;

  // Blow-up time and power-law fits against T_est - t.
  res.T_est = estimate_blowup_time(res.diag, prm.alpha);
  std::vector<double> x, grad, rad, lam;
  for (const auto& row : res.diag) {
    const double dtb = res.T_est - row.t;
    if (dtb <= 0) continue;
    x.push_back(dtb);
    grad.push_back(row.grad_norm);
    rad.push_back(row.r_est);
    lam.push_back(row.lambda_est);
  }
  double xmin = *std::min_element(x.begin(), x.end());
  const double xhi = xmin * std::pow(10.0, 1.7);
  res.rate_fit = fit_power_law(x, grad, xmin, xhi);
  res.radius_fit = fit_power_law(x, rad, xmin, xhi);
  res.lambda_fit = fit_power_law(x, lam, xmin, xhi);
  return res;
}

std::array<double, 2> check_virial_bound(const std::vector<DiagRow>& diag,
                                         double T, double alpha) {
  const int n = static_cast<int>(diag.size());
  if (n < 8) throw std::invalid_argument("check_virial_bound: too few rows");
  const double expo = 2.0 * alpha / (1.0 + alpha);
  // Tail beyond the last sample, assuming the self-similar gradient law.
  const double dT_end = T - diag[n - 1].t;
  if (!(dT_end > 0))
    throw std::invalid_argument("check_virial_bound: T inside sampled range");
  const double g2_end = diag[n - 1].grad_norm * diag[n - 1].grad_norm;
  const double C = g2_end * std::pow(dT_end, 2.0 / (1.0 + alpha));
  double I = C * (1.0 + alpha) / (2.0 * alpha) * std::pow(dT_end, expo);
  // Trapezoid accumulation from the end toward earlier times.
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  auto integrand = [&](int i) {
    return (T - diag[i].t) * diag[i].grad_norm * diag[i].grad_norm;
  };
  for (int i = n - 1; i >= 0; --i) {
    if (i < n - 1)
      I += 0.5 * (integrand(i) + integrand(i + 1)) * (diag[i + 1].t - diag[i].t);
    const double dT = T - diag[i].t;
    if (dT <= 10.0 * dT_end) {  // final decade
      const double ratio = I / std::pow(dT, expo);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {lo, hi};
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagRow>& diag) {
  CsvTable tab;
  tab.columns = {"t",          "mass",        "energy", "grad_norm", "sup_amp",
                 "virial_chi", "virial_flux", "r_est",  "lambda_est"};
  for (const auto& d : diag)
    tab.rows.push_back({d.t, d.mass, d.energy, d.grad_norm, d.sup_amp,
                        d.virial_chi, d.virial_flux, d.r_est, d.lambda_est});
  tab.write(path);
}

}  // namespace ring

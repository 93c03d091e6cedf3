#include "ring/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ring/derivative.hpp"
#include "ring/interp.hpp"
#include "ring/io.hpp"
#include "ring/quadrature.hpp"

namespace ring {

using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using Eigen::Matrix4d;
using Eigen::Vector4d;
using cplx = std::complex<double>;

namespace {

// Shared residual machinery: renormalized remainder of a parameter candidate
// and its four orthogonality pairings on the expansion grid.
struct OrthoContext {
  const ProfileExpansion& ex;
  const RadialGrid& rg;
  const ArrayXcd& u;
  ArrayXd w;  // quadrature weights on the y-grid

  OrthoContext(const ProfileExpansion& e, const RadialGrid& rgrid,
               const ArrayXcd& uu)
      : ex(e), rg(rgrid), u(uu), w(simpson_weights(e.grid)) {}

  // eps(y) = lambda^{2/(p-1)} u(r0 + lambda y) e^{-i gamma} - Q_b(y)
  ArrayXcd eps_of(double lambda, double r0, double gamma, double btilde,
                  double& b_out) const {
    const double p = ex.prm.p;
    const double beta = ex.prm.beta_inf + btilde;
    const double b = 2.0 * beta * lambda / (ex.prm.alpha * r0);
    b_out = b;
    if (!(b > 0) || !(b < 0.5))
      throw NumericalError("decompose: frozen-law b left (0, 0.5)");
    const double amp = std::pow(lambda, 2.0 / (p - 1.0));
    const cplx unphase(std::cos(gamma), -std::sin(gamma));
    const ArrayXcd Qb = assemble_Qb(ex, b, btilde);
    ArrayXcd eps(ex.grid.n);
    for (int i = 0; i < ex.grid.n; ++i) {
      const double rr = r0 + lambda * ex.grid.y[i];
      const cplx uv = interp6_uniform(0.0, rg.h, rg.n, u, rr);
      eps[i] = amp * uv * unphase - Qb[i];
    }
    return eps;
  }

  Vector4d residuals(double lambda, double r0, double gamma,
                     double btilde) const {
    double b = 0;
    const ArrayXcd eps = eps_of(lambda, r0, gamma, btilde, b);
    return pairings(eps, b, btilde);
  }

  Vector4d pairings(const ArrayXcd& eps, double b, double btilde) const {
    const double beta = ex.prm.beta_inf + btilde;
    const ArrayXd zb = zeta_b(ex.grid, b);
    const GroundState& gs = *ex.gs;
    Vector4d F;
    double f1 = 0, f2 = 0, f3 = 0, f4 = 0;
    for (int i = 0; i < ex.grid.n; ++i) {
      const double yv = ex.grid.y[i];
      const cplx et = eps[i] * cplx(std::cos(beta * yv), std::sin(beta * yv));
      const double wz = w[i] * zb[i];
      f1 += wz * et.real() * gs.yQ[i];
      f2 += wz * et.real() * gs.Q[i];
      f3 += wz * et.imag() * gs.LamQ[i];
      f4 += wz * et.imag() * gs.Qp[i];
    }
    F << f1, f2, f3, f4;
    return F;
  }
};

}  // namespace

std::array<double, 4> orthogonality_residuals(const ProfileExpansion& ex,
                                              const RadialGrid& rg,
                                              const Eigen::ArrayXcd& u,
                                              double lambda, double r0,
                                              double gamma, double btilde) {
  OrthoContext ctx(ex, rg, u);
  Vector4d F = ctx.residuals(lambda, r0, gamma, btilde);
  return {F[0], F[1], F[2], F[3]};
}

DecompResult decompose(const ProfileExpansion& ex, const RadialGrid& rg,
                       const Eigen::ArrayXcd& u, double t, const ModState& guess,
                       const NewtonOptions& opt) {
  if (!(guess.lambda > 0) || !(guess.r > 0))
    throw std::invalid_argument("decompose: guess needs lambda, r > 0");

  OrthoContext ctx(ex, rg, u);
  Eigen::Vector4d x(guess.lambda, guess.r, guess.gamma, guess.btilde);
  Vector4d F = ctx.residuals(x[0], x[1], x[2], x[3]);
  double norm = F.norm();
  int iters = 0;

  while (norm > opt.tol && iters < opt.max_iters) {
    // forward-difference Jacobian; lambda and r0 steps scale with lambda
    Matrix4d J;
    const double hs[4] = {opt.fd_rel * x[0], opt.fd_rel * x[0], opt.fd_rel,
                          opt.fd_rel};
    for (int c = 0; c < 4; ++c) {
      Eigen::Vector4d xp = x;
      xp[c] += hs[c];
      J.col(c) = (ctx.residuals(xp[0], xp[1], xp[2], xp[3]) - F) / hs[c];
    }
    Eigen::FullPivLU<Matrix4d> lu(J);
    if (!lu.isInvertible())
      throw NumericalError("decompose: singular Jacobian (outside basin?)");
    const Eigen::Vector4d dx = lu.solve((-F).eval());

    double damp = 1.0;
    bool accepted = false;
    for (int tries = 0; tries < 7; ++tries) {
      Eigen::Vector4d xn = x + damp * dx;
      if (xn[0] > 0 && xn[1] > 0) {
        Vector4d Fn;
        try {
          Fn = ctx.residuals(xn[0], xn[1], xn[2], xn[3]);
        } catch (const NumericalError&) {
          damp *= 0.5;
          continue;
        }
        const double nn = Fn.norm();
        if (nn < norm || nn <= opt.tol) {
          x = xn;
          F = Fn;
          norm = nn;
          accepted = true;
          break;
        }
      }
      damp *= 0.5;
    }
    ++iters;
    if (!accepted)
      throw NumericalError("decompose: Newton stalled (guess outside the "
                           "documented basin delta?)");
  }
  if (norm > opt.tol)
    throw NumericalError("decompose: no convergence within iteration limit");

  DecompResult res;
  res.newton_iters = iters;
  res.newton_residual = norm;
  double b = 0;
  res.eps = ctx.eps_of(x[0], x[1], x[2], x[3], b);
  res.m.lambda = x[0];
  res.m.r = x[1];
  res.m.gamma = x[2];
  res.m.btilde = x[3];
  res.m.b = b;
  res.m.t = t;
  res.m.g = x[1] / std::pow(x[0], ex.prm.alpha);
  const double beta = ex.prm.beta_inf + x[3];
  res.eps_tilde.resize(ex.grid.n);
  for (int i = 0; i < ex.grid.n; ++i) {
    const double yv = ex.grid.y[i];
    res.eps_tilde[i] =
        res.eps[i] * cplx(std::cos(beta * yv), std::sin(beta * yv));
  }
  const WeightSpec ws{b, beta, ex.prm.alpha, ex.prm.N};
  res.eps_h1mu = h1mu_norm(ex.grid, res.eps_tilde, ws);
  res.eps_l2mu = std::sqrt(
      integrate(ex.grid, (res.eps_tilde.abs2() * mu_weight(ex.grid, ws)).eval()));
  res.eps_sup = res.eps.abs().maxCoeff();
  Vector4d Ff = ctx.pairings(res.eps, b, x[3]);
  res.ortho = {Ff[0], Ff[1], Ff[2], Ff[3]};
  return res;
}

std::vector<DecompResult> decompose_chain(const ProfileExpansion& ex,
                                          const RadialGrid& rg,
                                          const std::vector<Snapshot>& snaps,
                                          const ModState& guess0,
                                          const NewtonOptions& opt) {
  std::vector<DecompResult> out;
  out.reserve(snaps.size());
  ModState guess = guess0;
  for (size_t i = 0; i < snaps.size(); ++i) {
    if (!out.empty()) {
      const ModState& prev = out.back().m;
      const double dt = snaps[i].t - prev.t;
      const double ds = dt / (prev.lambda * prev.lambda);
      const double beta = ex.prm.beta_inf + prev.btilde;
      guess = prev;
      guess.gamma += (1.0 + beta * beta) * ds;
      guess.lambda *= std::max(0.2, 1.0 - prev.b * ds);
      guess.r += -2.0 * beta * prev.lambda * ds;
    }
    out.push_back(decompose(ex, rg, snaps[i].u, snaps[i].t, guess, opt));
  }
  return out;
}

double jacobian_determinant(const ProfileExpansion& ex, double b0, double bt0) {
  const Grid1D& g = ex.grid;
  const GroundState& gs = *ex.gs;
  const ArrayXd w = simpson_weights(g);
  const double p = ex.prm.p;
  const double beta0 = ex.prm.beta_inf + bt0;

  // rho(z, mu, btv, gam): orthogonality pairings of the deformation
  //   F = mu^{2/(p-1)} Qb0(mu y + z) e^{-i gam + i (beta0 + btv) y}
  //       - Qb1(y) e^{i beta1 y}
  // with the frozen-law coupling b1 = (1 + btv/beta0) b0 mu / (1 + a b0 z/(2 beta0)).
  auto rho = [&](double z, double mu, double btv, double gam) {
    const double b1 =
        (1.0 + btv / beta0) * b0 * mu / (1.0 + ex.prm.alpha * b0 * z / (2.0 * beta0));
    const double bt1 = bt0 + btv;
    const double beta1 = ex.prm.beta_inf + bt1;
    const double scl = std::pow(mu, 2.0 / (p - 1.0));
    Vector4d acc = Vector4d::Zero();
    for (int i = 0; i < g.n; ++i) {
      const double yv = g.y[i];
      const double thA = gam - (beta0 + btv) * yv;  // e^{-i thA}
      const cplx termA = scl * eval_Qb_at(ex, b0, bt0, mu * yv + z) *
                         cplx(std::cos(thA), -std::sin(thA));
      const cplx termB = eval_Qb_at(ex, b1, bt1, yv) *
                         cplx(std::cos(beta1 * yv), std::sin(beta1 * yv));
      const cplx F = termA - termB;
      const double wz = w[i] * zeta_cutoff(std::sqrt(b1) * yv);
      acc[0] += wz * F.real() * gs.yQ[i];
      acc[1] += wz * F.real() * gs.Q[i];
      acc[2] += wz * F.imag() * gs.Qp[i];
      acc[3] += wz * F.imag() * gs.LamQ[i];
    }
    return acc;
  };

  Matrix4d J;
  const double h[4] = {1e-5, 1e-5, 1e-5, 1e-5};
  for (int c = 0; c < 4; ++c) {
    double zp = 0, mup = 1, btp = 0, gp = 0, zm = 0, mum = 1, btm = 0, gm = 0;
    (c == 0 ? zp : c == 1 ? mup : c == 2 ? btp : gp) += h[c];
    (c == 0 ? zm : c == 1 ? mum : c == 2 ? btm : gm) -= h[c];
    J.col(c) = (rho(zp, mup, btp, gp) - rho(zm, mum, btm, gm)) / (2.0 * h[c]);
  }
  return J.determinant();
}

ModSeries mod_residuals(const ProfileExpansion& ex,
                        const std::vector<DecompResult>& seq) {
  const int n = static_cast<int>(seq.size());
  if (n < 3)
    throw std::invalid_argument("mod_residuals: need at least 3 decompositions");
  ModSeries out;

  // rescaled clock by trapezoid
  std::vector<double> s(n, 0.0);
  for (int i = 1; i < n; ++i) {
    const double dt = seq[i].m.t - seq[i - 1].m.t;
    if (!(dt > 0))
      throw std::invalid_argument("mod_residuals: times must increase");
    s[i] = s[i - 1] + 0.5 * dt * (1.0 / (seq[i].m.lambda * seq[i].m.lambda) +
                                  1.0 / (seq[i - 1].m.lambda * seq[i - 1].m.lambda));
  }
  for (int i = 1; i + 1 < n; ++i) {
    const double ds0 = s[i] - s[i - 1], ds1 = s[i + 1] - s[i];
    out.max_spacing_variation =
        std::max(out.max_spacing_variation, std::abs(ds1 / ds0 - 1.0));
  }

  auto dds = [&](auto&& get, int i) {
    // second-order derivative on a nonuniform 3-point stencil
    const double hm = s[i] - s[i - 1], hp = s[i + 1] - s[i];
    return (hm / (hp * (hp + hm))) * get(i + 1) +
           ((hp - hm) / (hp * hm)) * get(i) -
           (hp / (hm * (hp + hm))) * get(i - 1);
  };

  for (int i = 1; i + 1 < n; ++i) {
    const ModState& m = seq[i].m;
    const double beta = ex.prm.beta_inf + m.btilde;
    const double lam_s = dds([&](int q) { return seq[q].m.lambda; }, i);
    const double r_s = dds([&](int q) { return seq[q].m.r; }, i);
    const double gam_s = dds([&](int q) { return seq[q].m.gamma; }, i);
    const double bt_s = dds([&](int q) { return seq[q].m.btilde; }, i);
    const double p1 = ex.P1.eval(m.b, m.btilde), p2 = ex.P2.eval(m.b, m.btilde);

    out.t.push_back(m.t);
    out.s.push_back(s[i]);
    out.r_channel.push_back(std::abs(r_s / m.lambda + 2.0 * beta));
    out.gamma_channel.push_back(std::abs(gam_s - 1.0 - beta * beta));
    out.lambda_channel.push_back(std::abs(lam_s / m.lambda + m.b - p1));
    out.btilde_channel.push_back(std::abs(bt_s - p2));
    out.total.push_back(out.r_channel.back() + out.gamma_channel.back() +
                        out.lambda_channel.back() + out.btilde_channel.back());
    out.bound_ref.push_back(m.b * seq[i].eps_h1mu +
                            std::pow(m.b, ex.prm.k));
  }
  return out;
}

double morawetz_phi(double z) {
  const double q = 2.0 * z;
  if (std::abs(q) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - q * q));
}

double functional_I(const ProfileExpansion& ex, double b, double bt,
                    const Eigen::ArrayXcd& eps) {
  const double p = ex.prm.p;
  const double beta = ex.prm.beta_inf + bt;
  if (!(1.0 < std::sqrt(1.0 + ex.prm.beta_inf * ex.prm.beta_inf) /
                  ex.prm.beta_inf))
    throw NumericalError("functional_I: Morawetz cutoff amplitude bound "
                         "violated for these parameters");
  const Grid1D& g = ex.grid;
  const ArrayXd w = simpson_weights(g);
  const ArrayXd mu = mu_weight(g, WeightSpec{b, beta, ex.prm.alpha, ex.prm.N});
  const ArrayXcd Qb = assemble_Qb(ex, b, bt);
  const ArrayXcd de = derivative(g, eps);
  const double sigma = ex.prm.alpha * b / (2.0 * beta);

  double kin = 0, mass = 0, mor = 0, pot = 0;
  for (int i = 0; i < g.n; ++i) {
    const double wm = w[i] * mu[i];
    kin += wm * std::norm(de[i]);
    mass += wm * std::norm(eps[i]);
    const double phi = morawetz_phi(sigma * g.y[i]);
    if (phi != 0.0)
      mor += wm * phi * std::imag(de[i] * std::conj(eps[i]));
    // F(Qb+eps) - F(Qb) - Re(f(Qb) conj(eps)),  F(u) = |u|^{p+1}/(p+1)
    const double a2q = std::norm(Qb[i]);
    const double a2s = std::norm(Qb[i] + eps[i]);
    const double Fq = std::pow(a2q, 0.5 * (p + 1.0)) / (p + 1.0);
    const double Fs = std::pow(a2s, 0.5 * (p + 1.0)) / (p + 1.0);
    const cplx fq = std::pow(a2q, 0.5 * (p - 1.0)) * Qb[i];
    pot += wm * (Fs - Fq - std::real(fq * std::conj(eps[i])));
  }
  return 0.5 * (kin + 2.0 * beta * mor + (1.0 + beta * beta) * mass - 2.0 * pot);
}

double coercivity_ratio(const ProfileExpansion& ex, double b, double bt,
                        const Eigen::ArrayXcd& eps) {
  const double beta = ex.prm.beta_inf + bt;
  const double nrm =
      h1mu_norm(ex.grid, eps, WeightSpec{b, beta, ex.prm.alpha, ex.prm.N});
  if (!(nrm > 0))
    throw std::invalid_argument("coercivity_ratio: zero field");
  return functional_I(ex, b, bt, eps) / (nrm * nrm);
}

Eigen::ArrayXcd random_orthogonalized_field(const ProfileExpansion& ex,
                                            double b, double bt,
                                            std::uint64_t seed) {
  const Grid1D& g = ex.grid;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uc(-20.0, 20.0), uwd(1.0, 4.0);
  std::normal_distribution<double> amp(0.0, 1.0);
  ArrayXcd et = ArrayXcd::Zero(g.n);
  for (int m = 0; m < 12; ++m) {
    const double c = uc(gen), wd = uwd(gen);
    const cplx a(amp(gen), amp(gen));
    for (int i = 0; i < g.n; ++i) {
      const double u = (g.y[i] - c) / wd;
      et[i] += a * std::exp(-0.5 * u * u);
    }
  }

  // Project out the four pairing directions of eps~ at this b.
  const ArrayXd w = simpson_weights(g);
  const ArrayXd zb = zeta_b(g, b);
  const GroundState& gs = *ex.gs;
  auto pair_with = [&](const ArrayXd& f, const ArrayXd& dir) {
    return (w * zb * f * dir).sum();
  };
  auto gram_project = [&](ArrayXd part, const ArrayXd& d1, const ArrayXd& d2) {
    Eigen::Matrix2d G;
    G << pair_with(d1, d1), pair_with(d2, d1), pair_with(d1, d2),
        pair_with(d2, d2);
    Eigen::Vector2d rv(pair_with(part, d1), pair_with(part, d2));
    Eigen::Vector2d c = G.fullPivLu().solve(rv);
    part -= c[0] * d1 + c[1] * d2;
    return part;
  };
  ArrayXd re = gram_project(et.real(), gs.yQ, gs.Q);
  ArrayXd im = gram_project(et.imag(), gs.LamQ, gs.Qp);

  // return eps = eps~ e^{-i beta y}
  const double beta = ex.prm.beta_inf + bt;
  ArrayXcd eps(g.n);
  for (int i = 0; i < g.n; ++i) {
    const cplx etv(re[i], im[i]);
    const double yv = g.y[i];
    eps[i] = etv * cplx(std::cos(beta * yv), -std::sin(beta * yv));
  }
  return eps;
}

void write_decomposition_csv(const std::string& path,
                             const std::vector<DecompResult>& seq,
                             const ModSeries& mods) {
  CsvTable tab;
  tab.columns = {"t",       "lambda", "r",      "gamma",  "btilde",
                 "b",       "eps_h1mu", "ortho1", "ortho2", "ortho3",
                 "ortho4",  "mod_total"};
  for (size_t i = 0; i < seq.size(); ++i) {
    const auto& d = seq[i];
    double mt = 0.0;  // endpoints carry no centered derivative
    for (size_t q = 0; q < mods.t.size(); ++q)
      if (mods.t[q] == d.m.t) mt = mods.total[q];
    tab.rows.push_back({d.m.t, d.m.lambda, d.m.r, d.m.gamma, d.m.btilde, d.m.b,
                        d.eps_h1mu, d.ortho[0], d.ortho[1], d.ortho[2],
                        d.ortho[3], mt});
  }
  tab.write(path);
}

}  // namespace ring

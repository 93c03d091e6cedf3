// Profile expansion: solvability constants, operator reconstruction, decay
// envelopes, residual order, cutoff, point evaluation, the truncated series
// algebra, and the nonlinearity series against exact polynomial products.

#include <cmath>
#include <complex>
#include <filesystem>

#include "doctest.h"
#include "ring/profile.hpp"
#include "ring/quadrature.hpp"
#include "ring/series.hpp"
#include "shared.hpp"

using namespace ring;
namespace fs = std::filesystem;
using cplx = std::complex<double>;

TEST_CASE("solvability constants: vanishing set and the pinned values") {
  const ProfileExpansion& ex = expansion33();
  REQUIRE(ex.prm.k == 6);
  REQUIRE(ex.deg == 5);

  // low orders whose constants must vanish
  for (auto [j, l] : {std::pair{1, 0}, {0, 1}, {2, 0}, {0, 2}}) {
    CAPTURE(j);
    CAPTURE(l);
    CHECK(std::abs(ex.c1(j, l)) <= 1e-6);
    CHECK(std::abs(ex.c2(j, l)) <= 1e-6);
  }
  CHECK(std::abs(ex.c1(1, 1)) <= 1e-6);
  // every pure-btilde order is constant-free
  for (const auto& od : ex.orders)
    if (od.j == 0) {
      CHECK(std::abs(od.c1) <= 1e-6);
      CHECK(std::abs(od.c2) <= 1e-6);
    }

  // the one closed-form constant of the hierarchy
  CHECK(ex.c2(1, 1) == doctest::Approx(-2.0).epsilon(1e-7));

  // frozen values (independent high-precision evaluation of the hierarchy);
  // exact closed forms where they exist: sqrt(3) = 3 beta_inf at this point
  CHECK(ex.c1(3, 0) == doctest::Approx(-0.3931167754970).epsilon(1e-9));
  CHECK(ex.c1(3, 1) == doctest::Approx(1.896004518960).epsilon(1e-9));
  CHECK(ex.c1(5, 0) == doctest::Approx(-2.495953734104).epsilon(1e-9));
  CHECK(ex.c1(3, 2) == doctest::Approx(-4.925964237330).epsilon(1e-9));
  CHECK(ex.c2(3, 0) == doctest::Approx(-0.7338484914591).epsilon(1e-9));
  CHECK(ex.c2(1, 2) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(ex.c2(3, 1) == doctest::Approx(5.730314315330).epsilon(1e-9));
  CHECK(ex.c2(1, 3) == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(ex.c2(5, 0) == doctest::Approx(1.983856138439).epsilon(1e-9));
  CHECK(ex.c2(3, 2) == doctest::Approx(-20.44225450811).epsilon(1e-9));
  CHECK(ex.c2(1, 4) == doctest::Approx(3.0 * std::sqrt(3.0)).epsilon(1e-9));

  // order bookkeeping: all 1 <= j+l <= deg present, find() agrees
  int count = 0;
  for (int j = 0; j <= ex.deg; ++j)
    for (int l = 0; j + l <= ex.deg; ++l) {
      if (j + l == 0) continue;
      const OrderData* od = ex.find(j, l);
      REQUIRE(od != nullptr);
      CHECK(od->j == j);
      CHECK(od->l == l);
      ++count;
    }
  CHECK(static_cast<int>(ex.orders.size()) == count);
  CHECK(ex.find(0, 0) == nullptr);
}

TEST_CASE("committed orders reconstruct their right-hand sides") {
  CHECK(verify_expansion(expansion33()) <= 1e-8);
}

TEST_CASE("every stored order obeys a finite decay envelope") {
  const ProfileExpansion& ex = expansion33();
  for (const auto& od : ex.orders) {
    CAPTURE(od.j);
    CAPTURE(od.l);
    const double env = decay_envelope(ex, od.j, od.l, 20.0, 55.0);
    CHECK(std::isfinite(env));
    CHECK(env > 0.0);
  }
}

TEST_CASE("residual is of the truncation order in the focus parameter") {
  const ProfileExpansion& ex = expansion33();
  std::vector<double> bs, rs;
  for (int i = 0; i < 8; ++i) {
    const double b = std::pow(10.0, -3.0 + 1.5 * i / 7.0);
    bs.push_back(b);
    rs.push_back(residual_Psi(ex, b, 0.0).h1mu);
  }
  double b_lo = bs.front();
  for (size_t i = 0; i < bs.size(); ++i)
    if (rs[i] < 1e-14) b_lo = std::max(b_lo, bs[i] * 1.05);
  const PowerLawFit pf = fit_power_law(bs, rs, b_lo, bs.back());
  CHECK(pf.exponent >= ex.prm.k - 0.3);
  CHECK(pf.exponent <= ex.prm.k + 1.5);  // not spuriously steep either
}

TEST_CASE("residual report norms are consistent") {
  const ProfileExpansion& ex = expansion33();
  const PsiReport rep = residual_Psi(ex, 0.02, 0.0);
  CHECK(rep.Psi.size() == ex.grid.n);
  CHECK(rep.h1mu > 0.0);
  CHECK(rep.l2mu > 0.0);
  CHECK(rep.sup > 0.0);
  CHECK(rep.l2mu <= rep.h1mu);  // the H1 norm dominates its L2 part
}

TEST_CASE("cutoff: plateau, support, monotone ramp") {
  CHECK(zeta_cutoff(-1.0) == 1.0);
  CHECK(zeta_cutoff(0.0) == 1.0);
  CHECK(zeta_cutoff(25.0) == 1.0);
  CHECK(zeta_cutoff(-2.0) == 0.0);
  CHECK(zeta_cutoff(-7.5) == 0.0);
  const double mid = zeta_cutoff(-1.5);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  for (double a = -2.0; a < -1.0; a += 0.1)
    CHECK(zeta_cutoff(a) <= zeta_cutoff(a + 0.1) + 1e-15);

  const Grid1D g = make_grid(-30.0, 30.0, 601);
  const double b = 0.04;
  const Eigen::ArrayXd z = zeta_b(g, b);
  for (int i = 0; i < g.n; i += 17)
    CHECK(z[i] == doctest::Approx(zeta_cutoff(std::sqrt(b) * g.y[i]))
                      .epsilon(1e-15));
}

TEST_CASE("point evaluation agrees with grid assembly and guards its domain") {
  const ProfileExpansion& ex = expansion33();
  const double b = 0.02, bt = 0.003;

  const Eigen::ArrayXcd P = eval_P(ex, b, bt);
  const Eigen::ArrayXcd Qb = assemble_Qb(ex, b, bt);
  REQUIRE(P.size() == ex.grid.n);
  for (int i = 200; i < ex.grid.n; i += 401) {
    const double y = ex.grid.y[i];
    CHECK(std::abs(eval_P_at(ex, b, bt, y) - P[i]) <= 1e-11);
    CHECK(std::abs(eval_Qb_at(ex, b, bt, y) - Qb[i]) <= 1e-11);
  }
  // at (b, bt) = (0, 0) the expansion collapses to the ground state
  const Eigen::ArrayXcd P0 = eval_P(ex, 0.0, 0.0);
  CHECK((P0 - ex.gs->Q.cast<cplx>()).abs().maxCoeff() <= 1e-13);

  CHECK_THROWS_AS(eval_Qb_at(ex, 0.6, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_Qb_at(ex, -0.1, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("scalar series algebra: product, shift, scale, Horner evaluation") {
  SeriesS a(2);
  a.at(0, 0) = 1.0;
  a.at(1, 0) = 2.0;
  a.at(0, 1) = 3.0;
  const SeriesS sq = series_mul(a, a);
  CHECK(sq.at(0, 0) == doctest::Approx(1.0));
  CHECK(sq.at(1, 0) == doctest::Approx(4.0));
  CHECK(sq.at(0, 1) == doctest::Approx(6.0));
  CHECK(sq.at(2, 0) == doctest::Approx(4.0));
  CHECK(sq.at(1, 1) == doctest::Approx(12.0));
  CHECK(sq.at(0, 2) == doctest::Approx(9.0));

  const SeriesS sh = series_shift(a, 1, 0);
  CHECK(sh.at(1, 0) == doctest::Approx(1.0));
  CHECK(sh.at(2, 0) == doctest::Approx(2.0));
  CHECK(sh.at(1, 1) == doctest::Approx(3.0));
  CHECK(sh.at(0, 0) == 0.0);

  const SeriesS sc = series_scale(a, -2.0);
  CHECK(sc.at(1, 0) == doctest::Approx(-4.0));

  // Horner evaluation vs the explicit polynomial
  const double b = 0.3, bt = 0.2;
  CHECK(a.eval(b, bt) == doctest::Approx(1.0 + 2.0 * b + 3.0 * bt)
                             .epsilon(1e-15));
  CHECK(sq.eval(b, bt) ==
        doctest::Approx(std::pow(1.0 + 2.0 * b + 3.0 * bt, 2)).epsilon(1e-15));

  CHECK(series_size(2) == 6);
  CHECK(series_idx(2, 0, 0) == 0);
  CHECK(series_idx(2, 1, 1) == 4);
}

TEST_CASE("field series: reciprocal, conjugation, pointwise maps") {
  const int n = 40;
  const Grid1D g = make_grid(-2.0, 2.0, n);
  SeriesF a(3, n);
  a.at(0, 0) = Eigen::ArrayXcd::Constant(n, cplx(1.0, 0.3));
  a.at(1, 0) = (g.y.sin()).cast<cplx>() * cplx(0.5, -0.2);
  a.at(0, 1) = (g.y.cos()).cast<cplx>();
  a.at(1, 1) = Eigen::ArrayXcd::Constant(n, cplx(-0.7, 0.1));

  const SeriesF inv = series_invert_unit(a);
  const SeriesF one = series_mul(a, inv);
  CHECK((one.at(0, 0) - 1.0).abs().maxCoeff() <= 1e-14);
  for (int j = 0; j <= 3; ++j)
    for (int l = 0; j + l <= 3; ++l) {
      if (j == 0 && l == 0) continue;
      CHECK(one.at(j, l).abs().maxCoeff() <= 1e-14);
    }

  SeriesF zero_const = a;
  zero_const.at(0, 0)[3] = 0.0;
  CHECK_THROWS_AS(series_invert_unit(zero_const), std::invalid_argument);

  const SeriesF cj = series_conj(a);
  CHECK((cj.at(1, 0) - a.at(1, 0).conjugate()).abs().maxCoeff() == 0.0);

  const SeriesS s = [] {
    SeriesS t(3);
    t.at(0, 0) = 2.0;
    t.at(1, 0) = -1.0;
    return t;
  }();
  const SeriesF am = series_mul(a, s);
  CHECK((am.at(0, 0) - 2.0 * a.at(0, 0)).abs().maxCoeff() <= 1e-15);
  CHECK((am.at(1, 0) - (2.0 * a.at(1, 0) - a.at(0, 0))).abs().maxCoeff() <=
        1e-15);
}

TEST_CASE("nonlinearity series at p = 3 equals the exact polynomial product") {
  const ProfileExpansion& ex = expansion33();
  const GroundState& gs = *ex.gs;
  const int n = gs.grid.n;

  SeriesF P(3, n);
  P.at(0, 0) = gs.Q.cast<cplx>();
  P.at(1, 0) = ((-gs.grid.y.square()).exp()).cast<cplx>() +
               cplx(0, 1) * ((gs.grid.y * (-gs.grid.y.square()).exp()).cast<cplx>());
  P.at(0, 1) = ((-0.5 * gs.grid.y.square()).exp()).cast<cplx>() * cplx(0.2, 0.7);
  P.at(1, 1) = (gs.Q * gs.Q).cast<cplx>() * cplx(0.1, -0.4);

  // p = 3: f(P) = P^2 conj(P) exactly
  const SeriesF expect = series_mul(series_mul(P, P), series_conj(P));
  const SeriesF got = nonlinearity_series(gs, P);
  REQUIRE(got.deg == expect.deg);
  for (int j = 0; j <= 3; ++j)
    for (int l = 0; j + l <= 3; ++l) {
      CAPTURE(j);
      CAPTURE(l);
      CHECK((got.at(j, l) - expect.at(j, l)).abs().maxCoeff() <= 1e-12);
    }

  // first-order structure: the derivative of |u|^2 u at a real base point Q
  // acts as h -> Q^2 (2h + conj(h))
  const Eigen::ArrayXcd h = P.at(1, 0);
  const Eigen::ArrayXcd lin = (gs.Q * gs.Q).cast<cplx>() *
                              (2.0 * h + h.conjugate());
  CHECK((got.at(1, 0) - lin).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("expansion save/load round trip is exact") {
  const ProfileExpansion& ex = expansion33();
  const fs::path dir = fs::temp_directory_path() / "ring_test_profile";
  fs::create_directories(dir);
  save_expansion(ex, dir / "expansion");
  const ProfileExpansion ld = load_expansion(dir / "expansion");

  CHECK(ld.prm.N == ex.prm.N);
  CHECK(ld.prm.p == ex.prm.p);
  CHECK(ld.prm.k == ex.prm.k);
  CHECK(ld.deg == ex.deg);
  CHECK(ld.grid.n == ex.grid.n);
  REQUIRE(ld.orders.size() == ex.orders.size());
  for (const OrderData& a : ex.orders) {
    const OrderData* b = ld.find(a.j, a.l);
    REQUIRE(b != nullptr);
    CHECK(a.c1 == b->c1);
    CHECK(a.c2 == b->c2);
    CHECK((a.T - b->T).abs().maxCoeff() == 0.0);
    CHECK((a.S - b->S).abs().maxCoeff() == 0.0);
  }
  for (size_t i = 0; i < ex.P1.c.size(); ++i) {
    CHECK(ld.P1.c[i] == ex.P1.c[i]);
    CHECK(ld.P2.c[i] == ex.P2.c[i]);
  }
  fs::remove_all(dir);
}

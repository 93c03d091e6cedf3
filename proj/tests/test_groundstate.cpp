// Problem parameters and the 1-d ground state: admissibility window, derived
// constants, closed forms, and the grid-level integral identities.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ring/groundstate.hpp"
#include "ring/quadrature.hpp"

using namespace ring;
namespace fs = std::filesystem;

TEST_CASE("parameter validation fills derived constants across the matrix") {
  const ProblemParams a = make_params(3, 3.0);
  CHECK(a.alpha == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.beta_inf == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(a.s_c == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.k == 6);

  const ProblemParams b = make_params(2, 4.0);
  CHECK(b.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b.k == 5);

  const ProblemParams c = make_params(4, 2.5);
  CHECK(c.alpha == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
  CHECK(c.k == 7);

  const ProblemParams d = make_params(5, 2.0);
  CHECK(d.alpha == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(d.k == 10);
}

TEST_CASE("inadmissible parameters are rejected with a descriptive message") {
  CHECK_THROWS_AS(make_params(1, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(make_params(3, 5.0), std::invalid_argument);   // p = upper
  CHECK_THROWS_AS(make_params(3, 5.5), std::invalid_argument);
  CHECK_THROWS_AS(make_params(3, 7.0 / 3.0), std::invalid_argument);  // lower
  CHECK_THROWS_AS(make_params(3, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(make_params(2, 3.0), std::invalid_argument);   // 1+4/N = 3
  CHECK_NOTHROW(make_params(2, 4.9));

  try {
    make_params(3, 2.0);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("admissible range") != std::string::npos);
    CHECK(msg.find("2.333333") != std::string::npos);
    CHECK(msg.find("5.000000") != std::string::npos);
    CHECK(msg.find("N = 3") != std::string::npos);
  }

  // explicit truncation order: k >= 5 and k > 2/(1-alpha) + 1
  CHECK_THROWS_AS(make_params(3, 3.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_params(3, 3.0, 5), std::invalid_argument);  // = bound
  CHECK_NOTHROW(make_params(3, 3.0, 6));
  CHECK_NOTHROW(make_params(3, 3.0, 8));
}

TEST_CASE("closed forms: values, derivative relation, scaling generator") {
  // Q = sqrt(2) sech at p = 3
  CHECK(Q_closed<double>(3.0, 0.0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(Q_closed<double>(3.0, 1.0) ==
        doctest::Approx(0.916487142969312).epsilon(1e-12));
  CHECK(Qprime_closed<double>(3.0, 1.0) ==
        doctest::Approx(-0.697991252094024).epsilon(1e-12));
  CHECK(Qprime_closed<double>(3.0, 0.0) == 0.0);

  // Q' = -Q tanh((p-1)y/2) and Q^{p-1} consistency, several p and y
  for (double p : {2.2, 3.0, 3.7, 4.5}) {
    for (double y : {-3.0, -0.7, 0.4, 2.5}) {
      const double q = Q_closed<double>(p, y);
      CHECK(Qprime_closed<double>(p, y) ==
            doctest::Approx(-q * std::tanh(0.5 * (p - 1.0) * y))
                .epsilon(1e-14));
      CHECK(Qpm1_closed<double>(p, y) ==
            doctest::Approx(std::pow(q, p - 1.0)).epsilon(1e-13));
    }
  }

  // grid evaluation fills all derived arrays consistently
  const ProblemParams prm = make_params(3, 3.0);
  const Grid1D g = make_grid(-20.0, 20.0, 801);
  const GroundState gs = eval_groundstate(prm, g);
  REQUIRE(gs.Q.size() == g.n);
  for (int i = 100; i < g.n; i += 97) {
    CHECK(gs.Q[i] == doctest::Approx(Q_closed<double>(3.0, g.y[i])));
    CHECK(gs.Qpow[i] == doctest::Approx(std::pow(gs.Q[i], 3.0)).epsilon(1e-14));
    CHECK(gs.LamQ[i] ==
          doctest::Approx(gs.Q[i] + g.y[i] * gs.Qp[i]).epsilon(1e-14));
    CHECK(gs.yQ[i] == doctest::Approx(g.y[i] * gs.Q[i]).epsilon(1e-15));
  }
}

TEST_CASE("integral identities hold across the admissible matrix") {
  const int Ns[4] = {3, 2, 4, 5};
  const double ps[4] = {3.0, 4.0, 2.5, 2.0};
  for (int i = 0; i < 4; ++i) {
    CAPTURE(Ns[i]);
    CAPTURE(ps[i]);
    const ProblemParams prm = make_params(Ns[i], ps[i]);
    const GroundState gs = eval_groundstate(prm, default_profile_grid());
    const IdentityReport rep = check_identities(gs);
    CHECK(rep.pohozaev_defect <= 1e-7);
    CHECK(rep.lamQ_defect <= 1e-7);
    if (ps[i] == 3.0) {
      CHECK(rep.intQ2 == doctest::Approx(4.0).epsilon(1e-11));
      CHECK(rep.intQp2 == doctest::Approx(4.0 / 3.0).epsilon(1e-11));
      CHECK(rep.QLamQ == doctest::Approx(2.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("identity report serializes to a readable file") {
  const ProblemParams prm = make_params(3, 3.0);
  const GroundState gs = eval_groundstate(prm, default_profile_grid());
  const IdentityReport rep = check_identities(gs);

  const fs::path dir = fs::temp_directory_path() / "ring_test_gs";
  fs::create_directories(dir);
  write_identity_report(dir / "identities.json", rep);

  std::ifstream in(dir / "identities.json");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string body = ss.str();
  CHECK(body.find("pohozaev") != std::string::npos);
  fs::remove_all(dir);
}

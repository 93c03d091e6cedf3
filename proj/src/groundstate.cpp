#include "ring/groundstate.hpp"

#include <fstream>

#include "json.hpp"
#include "ring/quadrature.hpp"

namespace ring {

ProblemParams make_params(int N, double p, int k) {
  if (N < 2) throw std::invalid_argument("make_params: need N >= 2");
  const double lower = 1.0 + 4.0 / N;
  const double upper = (N > 2) ? std::min((N + 2.0) / (N - 2.0), 5.0) : 5.0;
  if (!(p > lower) || !(p < upper))
    throw std::invalid_argument(
        "make_params: p outside the admissible range (" + std::to_string(lower) +
        ", " + std::to_string(upper) + ") for N = " + std::to_string(N));

  ProblemParams prm;
  prm.N = N;
  prm.p = p;
  prm.alpha = (5.0 - p) / ((p - 1.0) * (N - 1.0));
  prm.beta_inf = std::sqrt((5.0 - p) / (p + 3.0));
  prm.s_c = N / 2.0 - 2.0 / (p - 1.0);
  // admissibility puts all three in (0,1)
  if (!(prm.alpha > 0 && prm.alpha < 1 && prm.s_c > 0 && prm.s_c < 1))
    throw std::invalid_argument("make_params: derived constants out of range");

  const double kmin = 2.0 / (1.0 - prm.alpha) + 1.0;
  if (k < 0) {
    k = std::max(5, static_cast<int>(std::ceil(2.0 / (1.0 - prm.alpha))) + 2);
  }
  if (k < 5 || !(k > kmin))
    throw std::invalid_argument("make_params: k too small (need k >= 5 and k > " +
                                std::to_string(kmin) + ")");
  prm.k = k;
  return prm;
}

GroundState eval_groundstate(const ProblemParams& prm, const Grid1D& grid) {
  GroundState gs;
  gs.prm = prm;
  gs.grid = grid;
  const int n = grid.n;
  gs.Q.resize(n);
  gs.Qp.resize(n);
  gs.Qpm1.resize(n);
  for (int i = 0; i < n; ++i) {
    gs.Q[i] = Q_closed<double>(prm.p, grid.y[i]);
    gs.Qp[i] = Qprime_closed<double>(prm.p, grid.y[i]);
    gs.Qpm1[i] = Qpm1_closed<double>(prm.p, grid.y[i]);
  }
  gs.Qpow = gs.Q * gs.Qpm1;
  gs.LamQ = (2.0 / (prm.p - 1.0)) * gs.Q + grid.y * gs.Qp;
  gs.yQ = grid.y * gs.Q;
  return gs;
}

IdentityReport check_identities(const GroundState& gs) {
  const auto& g = gs.grid;
  const double p = gs.prm.p;
  IdentityReport rep;
  rep.intQ2 = inner(g, gs.Q, gs.Q);
  rep.intQp2 = inner(g, gs.Qp, gs.Qp);
  rep.QLamQ = inner(g, gs.Q, gs.LamQ);
  rep.pohozaev_defect =
      std::abs(rep.intQ2 - (p + 3.0) / (p - 1.0) * rep.intQp2) / rep.intQ2;
  rep.lamQ_defect =
      std::abs(rep.QLamQ - (5.0 - p) / (2.0 * (p - 1.0)) * rep.intQ2) /
      rep.intQ2;
  return rep;
}

void write_identity_report(const std::filesystem::path& path,
                           const IdentityReport& rep) {
  nlohmann::json j;
  j["intQ2"] = rep.intQ2;
  j["intQp2"] = rep.intQp2;
  j["QLamQ"] = rep.QLamQ;
  j["pohozaev_defect"] = rep.pohozaev_defect;
  j["lamQ_defect"] = rep.lamQ_defect;
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

}  // namespace ring

#include "ring/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ring/io.hpp"

namespace ring {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  return x;
}

long parse_long(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void config_set(RunConfig& c, const std::string& key, const std::string& v) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
#define RC_D(name, field) \
  {name, [](RunConfig& r, const std::string& s) { r.field = parse_double(name, s); }}
#define RC_I(name, field) \
  {name, [](RunConfig& r, const std::string& s) { r.field = static_cast<int>(parse_long(name, s)); }}
#define RC_L(name, field) \
  {name, [](RunConfig& r, const std::string& s) { r.field = parse_long(name, s); }}
#define RC_B(name, field) \
  {name, [](RunConfig& r, const std::string& s) { r.field = parse_bool(name, s); }}
  static const std::map<std::string, Setter> table = {
      RC_I("N", N),
      RC_D("p", p),
      RC_I("k", k),
      RC_D("g0", g0),
      RC_D("gamma0", gamma0),
      RC_D("tbar", tbar),
      RC_D("grid.ymin", grid_ymin),
      RC_D("grid.ymax", grid_ymax),
      RC_I("grid.n", grid_n),
      RC_D("ode.s0", ode_s0),
      RC_D("ode.s1", ode_s1),
      RC_D("ode.forcing", ode_forcing),
      RC_B("ode.random_signs", ode_random_signs),
      RC_D("ode.sbar", ode_sbar),
      RC_D("ode.send", ode_send),
      RC_D("sim.bbar", sim_bbar),
      RC_I("sim.n", sim_n),
      RC_D("sim.rmax_factor", sim_rmax_factor),
      RC_D("sim.dt_cap", sim_dt_cap),
      RC_D("sim.dt_phase", sim_dt_phase),
      RC_D("sim.virial_R_factor", sim_virial_R_factor),
      RC_I("sim.diag_stride", sim_diag_stride),
      RC_D("sim.snapshot_ds", sim_snapshot_ds),
      RC_I("sim.max_snapshots", sim_max_snapshots),
      RC_D("sim.pert", sim_pert),
      RC_D("stop.amplification", stop_amplification),
      RC_I("stop.lambda_floor_cells", stop_lambda_floor_cells),
      RC_L("stop.max_steps", stop_max_steps),
      RC_D("decomp.tol", decomp_tol),
      RC_I("decomp.max_iters", decomp_max_iters),
      RC_D("fit.decades", fit_decades),
      {"out.dir", [](RunConfig& r, const std::string& s) { r.out_dir = s; }},
      {"seed", [](RunConfig& r, const std::string& s) {
         r.seed = static_cast<std::uint64_t>(parse_long("seed", s));
       }},
  };
#undef RC_D
#undef RC_I
#undef RC_L
#undef RC_B
  const auto it = table.find(key);
  if (it == table.end())
    throw std::invalid_argument("config: unknown key: " + key);
  it->second(c, v);
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: " + path + ":" +
                                  std::to_string(lineno) +
                                  ": expected key=value");
    config_set(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  auto d = [&](const char* k, double v) { os << k << " = " << fmt17(v) << "\n"; };
  auto i = [&](const char* k, long v) { os << k << " = " << v << "\n"; };
  i("N", c.N);
  d("p", c.p);
  i("k", c.k);
  d("g0", c.g0);
  d("gamma0", c.gamma0);
  d("tbar", c.tbar);
  d("grid.ymin", c.grid_ymin);
  d("grid.ymax", c.grid_ymax);
  i("grid.n", c.grid_n);
  d("ode.s0", c.ode_s0);
  d("ode.s1", c.ode_s1);
  d("ode.forcing", c.ode_forcing);
  i("ode.random_signs", c.ode_random_signs ? 1 : 0);
  d("ode.sbar", c.ode_sbar);
  d("ode.send", c.ode_send);
  d("sim.bbar", c.sim_bbar);
  i("sim.n", c.sim_n);
  d("sim.rmax_factor", c.sim_rmax_factor);
  d("sim.dt_cap", c.sim_dt_cap);
  d("sim.dt_phase", c.sim_dt_phase);
  d("sim.virial_R_factor", c.sim_virial_R_factor);
  i("sim.diag_stride", c.sim_diag_stride);
  d("sim.snapshot_ds", c.sim_snapshot_ds);
  i("sim.max_snapshots", c.sim_max_snapshots);
  d("sim.pert", c.sim_pert);
  d("stop.amplification", c.stop_amplification);
  i("stop.lambda_floor_cells", c.stop_lambda_floor_cells);
  i("stop.max_steps", c.stop_max_steps);
  d("decomp.tol", c.decomp_tol);
  i("decomp.max_iters", c.decomp_max_iters);
  d("fit.decades", c.fit_decades);
  os << "out.dir = " << c.out_dir << "\n";
  i("seed", static_cast<long>(c.seed));
  return os.str();
}

void write_frozen_config(const RunConfig& cfg, const std::string& dir) {
  std::ofstream out(dir + "/config.lock");
  if (!out)
    throw std::invalid_argument("config: cannot write frozen copy in " + dir);
  out << dump_config(cfg);
}

}  // namespace ring

#pragma once
// Run configuration: a flat key=value text format ('#' comments, blank lines
// ignored, unknown keys rejected) shared by every subcommand, plus a frozen
// canonical copy written into each run's output directory so results are
// reproducible from the artifacts alone.

#include <cstdint>
#include <string>

namespace ring {

struct RunConfig {
  // problem
  int N = 3;
  double p = 3.0;
  int k = 0;  // 0 => per-(N,p) default order

  // expansion grid (grid.*)
  double grid_ymin = -60.0;
  double grid_ymax = 60.0;
  int grid_n = 6001;

  // modulation ODE (ode.*, plus the documented top-level g0/gamma0)
  double ode_s0 = 100.0;
  double ode_s1 = 1e6;
  double g0 = 0.8;
  double gamma0 = 0.0;
  double ode_forcing = 0.0;      // perturbed-twin forcing scale (0 = off)
  bool ode_random_signs = false; // random forcing signs instead of worst case
  double ode_sbar = 1.0e4;       // perturbed run: start of backward window
  double ode_send = 100.0;       // perturbed run: end of backward window

  // simulation handoff and grid (sim.*)
  double sim_bbar = 0.02;  // hand off where the focus parameter reaches this
  double tbar = 0.0;       // >0: hand off at this lab time instead
  int sim_n = 65536;
  double sim_rmax_factor = 4.0;  // rmax = factor * ring radius at handoff
  double sim_dt_cap = 1e-3;
  // Nonlinear phase advanced per step (radians).  0.025 keeps the splitting
  // bias of the scheme below the modulation-residual scale.
  double sim_dt_phase = 0.025;
  double sim_virial_R_factor = 3.5;  // R = rmax / factor
  int sim_diag_stride = 5;
  double sim_snapshot_ds = 1.5;  // rescaled-time spacing of snapshots
  int sim_max_snapshots = 64;
  // Amplitude (in renormalized-profile units) of the deterministic in-basin
  // deformation added to the prepared data.  A nonzero value keeps the
  // measured remainder norm dominated by resolvable content instead of
  // scheme-level dressing; 0 disables it.
  double sim_pert = 0.005;

  // stopping rules (stop.*)
  double stop_amplification = 30.0;
  int stop_lambda_floor_cells = 8;
  long stop_max_steps = 2000000;

  // decomposition (decomp.*)
  double decomp_tol = 1e-11;
  int decomp_max_iters = 50;

  // fits (fit.*)
  double fit_decades = 2.0;  // trailing decades of |t| for ODE exponent fits

  // output
  std::string out_dir;  // resolved: --out flag > RINGLAB_OUT env > "./out"
  std::uint64_t seed = 20260815;
};

// Apply one key=value pair (file line or command-line override).  Throws
// std::invalid_argument for unknown keys or unparsable values.
void config_set(RunConfig& cfg, const std::string& key,
                const std::string& value);

// Parse a config file into cfg (on top of current values).
void load_config_file(RunConfig& cfg, const std::string& path);

// Canonical serialization: every key in fixed order, %.17g numbers.
std::string dump_config(const RunConfig& cfg);

// Write dump_config(cfg) to <dir>/config.lock.
void write_frozen_config(const RunConfig& cfg, const std::string& dir);

}  // namespace ring

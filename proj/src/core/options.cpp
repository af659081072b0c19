#include "options.hpp"

namespace lagshrink {

Toolkit toolkit_from(const RunConfig& cfg) {
  Toolkit t;
  t.grid = GridSpec::square(cfg.get_int("grid"));
  t.backend = parse_backend(cfg.get_string("backend"));
  t.seed = cfg.get_u64("seed");
  t.tol_shrink_factor = cfg.get_double("tol_shrink_factor");

  t.entropy.lattice = cfg.get_int("entropy_lattice");
  t.entropy.t_points = cfg.get_int("entropy_t_points");
  t.entropy.refine_starts = cfg.get_int("entropy_refine_starts");
  t.entropy.simplex_tol = cfg.get_double("entropy_simplex_tol");
  t.entropy.backend = t.backend;

  t.lag.backend = t.backend;
  t.lag.tol_lag_factor = cfg.get_double("tol_lag_factor");

  t.critical.tol_crit = cfg.get_double("tol_crit");
  t.critical.max_iter = cfg.get_int("newton_max_iter");
  t.critical.backend = t.backend;

  t.spectrum_n = cfg.get_int("spectrum_n");
  t.lojasiewicz.directions = cfg.get_int("lojasiewicz_directions");
  t.lojasiewicz.eps_count = cfg.get_int("lojasiewicz_eps_count");
  t.lojasiewicz.eps_min = cfg.get_double("lojasiewicz_eps_min");
  t.lojasiewicz.eps_max = cfg.get_double("lojasiewicz_eps_max");
  t.lojasiewicz.seed = t.seed;
  t.lojasiewicz.backend = t.backend;

  FlowOptions& f = t.flow;
  f.backend = t.backend;
  f.sigma_cfl = cfg.get_double("flow_sigma_cfl");
  f.t_max = cfg.get_double("flow_t_max");
  f.maxA2_stop = cfg.get_double("flow_maxA2_stop");
  f.dt_min = cfg.get_double("flow_dt_min");
  f.snapshot_every = cfg.get_int("flow_snapshot_every");
  f.equidistribute = cfg.get_bool("flow_equidistribute");
  f.type1_max = cfg.get_double("flow_type1_max");
  f.snapshot_log_spacing = cfg.get_double("rescale_ds");
  f.rescale_tol = cfg.get_double("rescale_tol");
  f.shrinker_tol_factor = t.tol_shrink_factor;
  f.entropy = t.entropy;

  t.piecewise.flow = f;
  t.piecewise.k_max = cfg.get_int("piecewise_k_max");
  PerturbationOptions& p = t.piecewise.perturb;
  p.c_min = cfg.get_double("piecewise_c_min");
  p.k_exact = cfg.get_int("piecewise_k_exact");
  p.seed = t.seed;
  p.shrinker_tol_factor = t.tol_shrink_factor;
  p.lag = t.lag;
  p.entropy = t.entropy;
  t.piecewise_lambda = cfg.get_double("piecewise_lambda");
  t.piecewise_delta = cfg.get_double("piecewise_delta");
  p.delta = t.piecewise_delta;
  p.area_max = t.piecewise_lambda;

  t.census.critical = t.critical;
  t.census.entropy = t.entropy;
  t.census.shrinker_tol_factor = t.tol_shrink_factor;
  t.census_perturbed = cfg.get_int("census_perturbed");
  t.census_amplitude = cfg.get_double("census_amplitude");
  return t;
}

}  // namespace lagshrink

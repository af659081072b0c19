#include "lagshrink/lagshrink.h"

#include "options.hpp"
#include "seeds.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

using namespace lagshrink;

struct lsk_config {
  RunConfig cfg;
};

struct lsk_map {
  TorusMap map;
  ConformalStructure tau;
  double time = 0.0;
};

struct lsk_flow {
  FlowRun run;
};

struct lsk_piecewise {
  PiecewiseLog log;
};

struct lsk_census {
  CensusReport report;
};

namespace {

thread_local std::string g_last_error;

lsk_status set_error(lsk_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
lsk_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return LSK_OK;
  } catch (const Error& e) {
    return set_error(static_cast<lsk_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LSK_E_MEMORY_GUARD, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LSK_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(LSK_E_INTERNAL, "unknown exception");
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

void copy_out(const std::string& s, char* buf, size_t cap) {
  if (!buf || cap == 0) return;
  const size_t n = std::min(s.size(), cap - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

Toolkit toolkit(const lsk_config* cfg) { return toolkit_from(cfg ? cfg->cfg : RunConfig()); }

lsk_map* wrap(TorusMap m, ConformalStructure tau, double time) { return new lsk_map{std::move(m), tau, time}; }

void fill_sample(const FlowSample& s, lsk_flow_sample* out) {
  *out = {s.t, s.dt, s.area, s.maxA2, s.entropy, s.lag_residual};
}

}  // namespace

extern "C" {

const char* lsk_version(void) { return "0.1.0"; }

const char* lsk_status_name(lsk_status s) {
  if (s == LSK_OK) return "Ok";
  if (s == LSK_E_INTERNAL) return "Internal";
  if (s >= LSK_E_INVALID_ARGUMENT && s <= LSK_E_NOT_SHRINKER) return error_code_name(static_cast<ErrorCode>(s));
  return "Unknown";
}

const char* lsk_last_error(void) { return g_last_error.c_str(); }

lsk_status lsk_config_new(lsk_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new lsk_config{};
  });
}

lsk_status lsk_config_load(const char* path, lsk_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new lsk_config{RunConfig::load(path)};
  });
}

lsk_status lsk_config_set(lsk_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

lsk_status lsk_config_get(const lsk_config* cfg, const char* key, char* buf, size_t cap) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    copy_out(cfg->cfg.get_string(key), buf, cap);
  });
}

lsk_status lsk_config_echo(const lsk_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    const std::string s = cfg->cfg.echo();
    if (needed) *needed = s.size() + 1;
    copy_out(s, buf, cap);
  });
}

void lsk_config_free(lsk_config* cfg) { delete cfg; }

lsk_status lsk_map_clifford(int nx, int ny, lsk_map** out) {
  return guarded([&] {
    need(out, "out");
    *out = wrap(clifford_seed(GridSpec(nx, ny)), {0.0, 1.0}, 0.0);
  });
}

lsk_status lsk_map_product(int p1, int q1, int p2, int q2, int nx, int ny, lsk_map** out) {
  return guarded([&] {
    need(out, "out");
    const ShrinkerCurve c1 = abresch_langer_curve(p1, q1), c2 = abresch_langer_curve(p2, q2);
    auto [u, tau] = product_torus_seed(c1, c2, GridSpec(nx, ny));
    *out = wrap(std::move(u), tau, 0.0);
  });
}

lsk_status lsk_map_circles(double r1, double r2, int nx, int ny, lsk_map** out) {
  return guarded([&] {
    need(out, "out");
    if (!(r1 > 0.0) || !(r2 > 0.0)) fail(ErrorCode::InvalidArgument, "radii must be positive");
    auto [u, tau] = product_torus_seed(circle_curve(r1), circle_curve(r2), GridSpec(nx, ny));
    *out = wrap(std::move(u), tau, 0.0);
  });
}

lsk_status lsk_map_perturbed_clifford(int n, int index, double amplitude, uint64_t seed, const lsk_config* cfg,
                                      lsk_map** out) {
  return guarded([&] {
    need(out, "out");
    if (index < 0) fail(ErrorCode::InvalidArgument, "seed index must be nonnegative");
    const auto seeds = perturbed_clifford_seeds(GridSpec::square(n), index, amplitude, seed, toolkit(cfg).backend);
    const CensusSeed& s = seeds.back();
    *out = wrap(s.map, s.tau, 0.0);
  });
}

lsk_status lsk_map_figure_eight(int nx, int ny, lsk_map** out) {
  return guarded([&] {
    need(out, "out");
    *out = wrap(figure_eight_seed(GridSpec(nx, ny)), {0.0, 1.0}, 0.0);
  });
}

lsk_status lsk_map_from_values(int nx, int ny, const double* xyz, double tau1, double tau2, double time,
                               lsk_map** out) {
  return guarded([&] {
    need(xyz, "values");
    need(out, "out");
    const GridSpec grid(nx, ny);
    Field4 v = Eigen::Map<const Field4>(xyz, 4, grid.size());
    TorusMap u(grid, std::move(v));
    u.validate_finite();
    *out = wrap(std::move(u), ConformalStructure(tau1, tau2), time);
  });
}

lsk_status lsk_map_read(const char* path, lsk_map** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    Snapshot s = read_snapshot(path);
    *out = wrap(std::move(s.map), s.tau, s.time);
  });
}

lsk_status lsk_map_write(const lsk_map* map, const char* path) {
  return guarded([&] {
    need(map, "map");
    need(path, "path");
    write_snapshot(path, map->map, map->tau, map->time);
  });
}

lsk_status lsk_map_info(const lsk_map* map, int* nx, int* ny, double* tau1, double* tau2, double* time) {
  return guarded([&] {
    need(map, "map");
    if (nx) *nx = map->map.grid().nx;
    if (ny) *ny = map->map.grid().ny;
    if (tau1) *tau1 = map->tau.tau1;
    if (tau2) *tau2 = map->tau.tau2;
    if (time) *time = map->time;
  });
}

lsk_status lsk_map_values(const lsk_map* map, double* xyz) {
  return guarded([&] {
    need(map, "map");
    need(xyz, "values");
    const Field4 p = map->map.positions();
    std::copy(p.data(), p.data() + p.size(), xyz);
  });
}

lsk_status lsk_map_set_tau(lsk_map* map, double tau1, double tau2) {
  return guarded([&] {
    need(map, "map");
    map->tau = ConformalStructure(tau1, tau2);
  });
}

void lsk_map_free(lsk_map* map) { delete map; }

lsk_status lsk_entropy(const lsk_map* map, const lsk_config* cfg, lsk_entropy_report* out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    const EntropyReport r = entropy(map->map, toolkit(cfg).entropy);
    out->lambda = r.lambda;
    for (int a = 0; a < 4; ++a) out->x0[a] = r.argmax.x0[a];
    out->t0 = r.argmax.t0;
    out->converged = r.converged ? 1 : 0;
    for (int a = 0; a < 4; ++a) {
      out->box_lo[a] = r.box_lo[a];
      out->box_hi[a] = r.box_hi[a];
    }
    out->t_lo = r.t_lo;
    out->t_hi = r.t_hi;
    out->t_floor = r.t_floor;
    out->resolved = r.resolved ? 1 : 0;
  });
}

lsk_status lsk_area(const lsk_map* map, const lsk_config* cfg, double* out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    *out = area(map->map, toolkit(cfg).backend);
  });
}

lsk_status lsk_energy(const lsk_map* map, const lsk_config* cfg, double* out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    *out = energy(map->map, map->tau, toolkit(cfg).backend);
  });
}

lsk_status lsk_willmore(const lsk_map* map, const lsk_config* cfg, double* out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    *out = willmore(map->map, toolkit(cfg).backend);
  });
}

lsk_status lsk_shrinker_residual(const lsk_map* map, const lsk_config* cfg, double* residual, double* tolerance) {
  return guarded([&] {
    need(map, "map");
    const Toolkit t = toolkit(cfg);
    const ImmersionData d = fundamental_forms(map->map, t.backend);
    if (residual) *residual = shrinker_residual(d, map->map.positions());
    if (tolerance) *tolerance = shrinker_tolerance(d, t.tol_shrink_factor);
  });
}

lsk_status lsk_symplectic_residual(const lsk_map* map, const lsk_config* cfg, double* residual, double* tolerance) {
  return guarded([&] {
    need(map, "map");
    const Toolkit t = toolkit(cfg);
    if (residual) *residual = symplectic_residual(map->map, t.backend);
    if (tolerance) *tolerance = tol_lag(map->map.grid(), t.lag);
  });
}

lsk_status lsk_maslov(const lsk_map* map, const lsk_config* cfg, int* m1, int* m2) {
  return guarded([&] {
    need(map, "map");
    const MaslovResult r = maslov_numbers(map->map, toolkit(cfg).lag);
    if (m1) *m1 = r.m1;
    if (m2) *m2 = r.m2;
  });
}

lsk_status lsk_embedded(const lsk_map* map, const lsk_config* cfg, int* embedded, double* closest) {
  return guarded([&] {
    need(map, "map");
    const EmbeddednessReport r = embeddedness_check(map->map, 1e-3, toolkit(cfg).backend);
    if (embedded) *embedded = r.embedded ? 1 : 0;
    if (closest) *closest = r.closest;
  });
}

lsk_status lsk_critical_point(const lsk_map* map, const lsk_config* cfg, lsk_map** out, double* grad_norm,
                              int* iterations) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    CriticalPoint cp = find_critical_point(map->map, map->tau, toolkit(cfg).critical);
    if (grad_norm) *grad_norm = cp.grad_norm;
    if (iterations) *iterations = cp.iterations;
    *out = wrap(std::move(cp.u), cp.tau, map->time);
  });
}

lsk_status lsk_spectrum(const lsk_map* map, const lsk_config* cfg, double* eigenvalues, size_t cap, size_t* count) {
  return guarded([&] {
    need(map, "map");
    const Toolkit t = toolkit(cfg);
    const Spectrum s = spectrum(assemble_L(map->map, map->tau, t.spectrum_n, t.critical));
    const size_t n = static_cast<size_t>(s.eigenvalues.size());
    if (count) *count = n;
    if (eigenvalues)
      for (size_t i = 0; i < std::min(n, cap); ++i) eigenvalues[i] = s.eigenvalues[static_cast<Eigen::Index>(i)];
  });
}

lsk_status lsk_lojasiewicz(const lsk_map* map, const lsk_config* cfg, lsk_lojasiewicz_fit* out, double* samples,
                           size_t cap, size_t* count) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    const Toolkit t = toolkit(cfg);
    const CriticalPoint cp = find_critical_point(map->map, map->tau, t.critical);
    const LojasiewiczFit f = lojasiewicz_fit(cp, t.lojasiewicz);
    *out = {f.theta, f.C2, f.n_samples, f.max_violation, f.slope_mean, f.slope_min, f.slope_max};
    if (count) *count = f.samples.size();
    if (samples)
      for (size_t i = 0; i < std::min(f.samples.size(), cap); ++i) {
        const LojasiewiczSample& s = f.samples[i];
        samples[4 * i] = s.direction;
        samples[4 * i + 1] = s.eps;
        samples[4 * i + 2] = s.energy_gap;
        samples[4 * i + 3] = s.grad_norm;
      }
  });
}

lsk_status lsk_flow_run(const lsk_map* initial, const lsk_config* cfg, lsk_flow** out) {
  return guarded([&] {
    need(initial, "map");
    need(out, "out");
    *out = new lsk_flow{run_to_singularity(initial->map, initial->time, toolkit(cfg).flow)};
  });
}

lsk_status lsk_flow_report(const lsk_flow* flow, lsk_singularity_report* out) {
  return guarded([&] {
    need(flow, "flow");
    need(out, "out");
    const SingularityReport& r = flow->run.report;
    out->T0_est = r.T0_est;
    out->T0_stderr = r.T0_stderr;
    out->type1_constant = r.type1_constant;
    out->fit_residual = r.fit_residual;
    out->is_type1 = r.is_type1 ? 1 : 0;
    for (int a = 0; a < 4; ++a) out->q_est[a] = r.q_est[a];
    out->rescale_converged = r.rescale.converged ? 1 : 0;
    out->rescaled_maps = static_cast<int>(r.rescale.maps.size());
    out->model_time = r.rescale.model_time;
    out->model_residual = r.rescale.model_residual;
    out->model_tolerance = r.rescale.model_tolerance;
    out->max_diameter = r.rescale.max_diameter;
    out->entropy_resolved_until = flow->run.trajectory.entropy_resolved_until;
  });
}

lsk_status lsk_flow_notes(const lsk_flow* flow, char* stop_reason, size_t cap1, char* note, size_t cap2) {
  return guarded([&] {
    need(flow, "flow");
    copy_out(flow->run.trajectory.stop_reason, stop_reason, cap1);
    copy_out(flow->run.report.rescale.note, note, cap2);
  });
}

size_t lsk_flow_sample_count(const lsk_flow* flow) { return flow ? flow->run.trajectory.samples.size() : 0; }

lsk_status lsk_flow_sample_at(const lsk_flow* flow, size_t i, lsk_flow_sample* out) {
  return guarded([&] {
    need(flow, "flow");
    need(out, "out");
    const auto& s = flow->run.trajectory.samples;
    if (i >= s.size()) fail(ErrorCode::InvalidArgument, "sample index out of range");
    fill_sample(s[i], out);
  });
}

size_t lsk_flow_snapshot_count(const lsk_flow* flow) { return flow ? flow->run.trajectory.snapshots.size() : 0; }

lsk_status lsk_flow_snapshot(const lsk_flow* flow, size_t i, lsk_map** out) {
  return guarded([&] {
    need(flow, "flow");
    need(out, "out");
    const auto& s = flow->run.trajectory.snapshots;
    if (i >= s.size()) fail(ErrorCode::InvalidArgument, "snapshot index out of range");
    *out = wrap(s[i].map, {0.0, 1.0}, s[i].time);
  });
}

lsk_status lsk_flow_model(const lsk_flow* flow, lsk_map** out) {
  return guarded([&] {
    need(flow, "flow");
    need(out, "out");
    const RescaleResult& r = flow->run.report.rescale;
    if (!r.converged) fail(ErrorCode::NotCauchy, r.note.empty() ? "no rescaled limit" : r.note);
    *out = wrap(r.model, {0.0, 1.0}, r.model_time);
  });
}

void lsk_flow_free(lsk_flow* flow) { delete flow; }

lsk_status lsk_piecewise_run(const lsk_map* initial, double Lambda, double delta, const lsk_config* cfg,
                             lsk_piecewise** out) {
  return guarded([&] {
    need(initial, "map");
    need(out, "out");
    *out = new lsk_piecewise{run_piecewise(initial->map, Lambda, delta, toolkit(cfg).piecewise)};
  });
}

lsk_status lsk_piecewise_outcome_of(const lsk_piecewise* log, lsk_piecewise_outcome* outcome, int* event_cap,
                                    double* lambda_initial, char* note, size_t cap) {
  return guarded([&] {
    need(log, "log");
    if (outcome) {
      switch (log->log.outcome) {
        case PiecewiseOutcome::TerminalNonCompact: *outcome = LSK_PIECEWISE_TERMINAL; break;
        case PiecewiseOutcome::TerminatedAtCap: *outcome = LSK_PIECEWISE_CAP; break;
        case PiecewiseOutcome::Error: *outcome = LSK_PIECEWISE_ERROR; break;
      }
    }
    if (event_cap) *event_cap = log->log.event_cap;
    if (lambda_initial) *lambda_initial = log->log.lambda_initial;
    copy_out(log->log.terminal_note, note, cap);
  });
}

size_t lsk_piecewise_leg_count(const lsk_piecewise* log) { return log ? log->log.legs.size() : 0; }

lsk_status lsk_piecewise_leg_at(const lsk_piecewise* log, size_t i, lsk_piecewise_leg* out, char* note, size_t cap) {
  return guarded([&] {
    need(log, "log");
    need(out, "out");
    if (i >= log->log.legs.size()) fail(ErrorCode::InvalidArgument, "leg index out of range");
    const PiecewiseLeg& l = log->log.legs[i];
    out->t_start = l.t_start;
    out->t_end = l.t_end;
    out->steps = l.steps;
    out->lambda_start = l.lambda_start;
    out->max_entropy_increase = l.max_entropy_increase;
    out->area_start = l.area_start;
    out->area_end = l.area_end;
    for (int k = 0; k < 2; ++k) {
      out->maslov_start[k] = l.maslov_start[k];
      out->maslov_end[k] = l.maslov_end[k];
    }
    out->T0_est = l.T0_est;
    out->type1_constant = l.type1_constant;
    out->is_type1 = l.is_type1 ? 1 : 0;
    out->compact_model = l.compact_model ? 1 : 0;
    out->model_area = l.model_area;
    out->model_diameter = l.model_diameter;
    copy_out(l.stop_reason.empty() ? l.note : l.stop_reason + ": " + l.note, note, cap);
  });
}

lsk_status lsk_piecewise_leg_sample(const lsk_piecewise* log, size_t leg, size_t i, lsk_flow_sample* out,
                                    size_t* count) {
  return guarded([&] {
    need(log, "log");
    if (leg >= log->log.legs.size()) fail(ErrorCode::InvalidArgument, "leg index out of range");
    const auto& s = log->log.legs[leg].samples;
    if (count) *count = s.size();
    if (out) {
      if (i >= s.size()) fail(ErrorCode::InvalidArgument, "sample index out of range");
      fill_sample(s[i], out);
    }
  });
}

lsk_status lsk_piecewise_leg_start(const lsk_piecewise* log, size_t i, lsk_map** out) {
  return guarded([&] {
    need(log, "log");
    need(out, "out");
    if (i >= log->log.leg_starts.size()) fail(ErrorCode::InvalidArgument, "leg index out of range");
    const double t = i < log->log.legs.size() ? log->log.legs[i].t_start : 0.0;
    *out = wrap(log->log.leg_starts[i], {0.0, 1.0}, t);
  });
}

size_t lsk_piecewise_event_count(const lsk_piecewise* log) { return log ? log->log.events.size() : 0; }

lsk_status lsk_piecewise_event_at(const lsk_piecewise* log, size_t i, lsk_piecewise_event* out) {
  return guarded([&] {
    need(log, "log");
    need(out, "out");
    if (i >= log->log.events.size()) fail(ErrorCode::InvalidArgument, "event index out of range");
    const PiecewiseEvent& e = log->log.events[i];
    *out = lsk_piecewise_event{};
    out->t = e.t;
    copy_out(e.direction, out->direction, sizeof out->direction);
    out->s = e.s;
    out->lambda_before = e.lambda_before;
    out->lambda_after = e.lambda_after;
    out->area_before = e.area_before;
    out->area_after = e.area_after;
    out->c0_distance = e.c0_distance;
    out->delta_bound = e.delta_bound;
    for (int k = 0; k < 2; ++k) {
      out->maslov_before[k] = e.maslov_before[k];
      out->maslov_after[k] = e.maslov_after[k];
    }
    out->kappa = e.kappa;
    out->cert_lagrangian = e.cert_lagrangian;
    out->cert_area = e.cert_area;
    out->cert_entropy = e.cert_entropy;
    out->cert_c0 = e.cert_c0;
    out->cert_maslov = e.cert_maslov;
  });
}

void lsk_piecewise_free(lsk_piecewise* log) { delete log; }

lsk_status lsk_census_run(const lsk_map* const* seeds, const char* const* labels, size_t n, double Lambda,
                          const lsk_config* cfg, lsk_census** out) {
  return guarded([&] {
    need(out, "out");
    if (n > 0) need(seeds, "seeds");
    std::vector<CensusSeed> list;
    for (size_t i = 0; i < n; ++i) {
      need(seeds[i], "seed");
      const std::string label = labels && labels[i] ? labels[i] : "seed" + std::to_string(i);
      list.push_back({label, seeds[i]->map, seeds[i]->tau});
    }
    *out = new lsk_census{entropy_census(list, Lambda, toolkit(cfg).census)};
  });
}

size_t lsk_census_entry_count(const lsk_census* c) { return c ? c->report.entries.size() : 0; }

lsk_status lsk_census_entry_at(const lsk_census* c, size_t i, lsk_census_entry* out, char* notice, size_t cap) {
  return guarded([&] {
    need(c, "census");
    need(out, "out");
    if (i >= c->report.entries.size()) fail(ErrorCode::InvalidArgument, "entry index out of range");
    const CensusEntry& e = c->report.entries[i];
    *out = {e.accepted, e.area, e.entropy, e.grad_norm, e.shrinker_residual, e.iterations, e.embedding_checked,
            e.embedded};
    copy_out(e.label + (e.notice.empty() ? "" : ": " + e.notice), notice, cap);
  });
}

size_t lsk_census_cluster_count(const lsk_census* c) { return c ? c->report.clusters.size() : 0; }

lsk_status lsk_census_cluster_at(const lsk_census* c, size_t i, lsk_census_cluster* out) {
  return guarded([&] {
    need(c, "census");
    need(out, "out");
    if (i >= c->report.clusters.size()) fail(ErrorCode::InvalidArgument, "cluster index out of range");
    const CensusCluster& k = c->report.clusters[i];
    *out = {k.entropy, k.spread, k.area, static_cast<int>(k.members.size())};
  });
}

lsk_status lsk_census_cluster_members(const lsk_census* c, size_t i, int* entries, size_t cap) {
  return guarded([&] {
    need(c, "census");
    need(entries, "entries");
    if (i >= c->report.clusters.size()) fail(ErrorCode::InvalidArgument, "cluster index out of range");
    const auto& m = c->report.clusters[i].members;
    std::copy_n(m.begin(), std::min(m.size(), cap), entries);
  });
}

void lsk_census_free(lsk_census* c) { delete c; }

lsk_status lsk_sha256_file(const char* path, char* hex, size_t cap) {
  return guarded([&] {
    need(path, "path");
    need(hex, "buffer");
    if (cap < 65) fail(ErrorCode::InvalidArgument, "digest buffer needs 65 bytes");
    copy_out(sha256_file(path), hex, cap);
  });
}

}  // extern "C"

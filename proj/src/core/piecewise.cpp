#include "piecewise.hpp"

#include "io.hpp"
#include "seeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lagshrink {

const char* outcome_name(PiecewiseOutcome o) {
  switch (o) {
    case PiecewiseOutcome::TerminalNonCompact: return "terminal-non-compact";
    case PiecewiseOutcome::TerminatedAtCap: return "terminated-at-cap";
    case PiecewiseOutcome::Error: return "error";
  }
  return "?";
}

std::vector<std::pair<std::string, OneForm>> perturbation_dictionary(const GridSpec& grid, int k_exact,
                                                                     std::uint64_t seed, Backend backend) {
  std::vector<std::pair<std::string, OneForm>> dict;
  dict.emplace_back("dx", OneForm::harmonic(grid, 1.0, 0.0));
  dict.emplace_back("dy", OneForm::harmonic(grid, 0.0, 1.0));
  const Differentiator diff(grid, backend);
  const int band = std::max(1, std::min(grid.nx, grid.ny) / 8);
  for (int k = 0; k < k_exact; ++k) {
    CounterRng rng(seed, 100 + static_cast<std::uint64_t>(k));
    dict.emplace_back("df" + std::to_string(k), OneForm::exact(random_bandlimited(grid, band, rng), diff));
  }
  return dict;
}

namespace {

double c0_distance(const TorusMap& a, const TorusMap& b) {
  return (a.values() - b.values()).colwise().norm().maxCoeff();
}

double lag_tolerance(const GridSpec& g, const LagrangianOptions& lag) {
  return std::max(tol_lag(g, lag), 10.0 * g.hx() * g.hy());
}

std::array<int, 2> pair_of(const MaslovResult& m) { return {m.m1, m.m2}; }

}  // namespace

PerturbationResult perturbation_search(const TorusMap& model, const PerturbationOptions& opts) {
  const Backend backend = opts.lag.backend;
  EntropyOptions eo = opts.entropy;
  eo.backend = backend;

  const ImmersionData d = fundamental_forms(model, backend);
  const double res = shrinker_residual(d, model.positions());
  const double tol = shrinker_tolerance(d, opts.shrinker_tol_factor);
  if (res > tol) {
    std::ostringstream os;
    os << "model is not an accepted shrinker: residual " << res << " > " << tol;
    fail(ErrorCode::PreconditionViolated, os.str());
  }
  const double lag_tol = lag_tolerance(model.grid(), opts.lag);
  if (symplectic_residual(d) > lag_tol) fail(ErrorCode::NotLagrangian, "model is not Lagrangian");

  PerturbationResult out;
  out.area_model = area(d);
  if (out.area_model > opts.area_max) {
    std::ostringstream os;
    os << "model area " << out.area_model << " exceeds " << opts.area_max;
    fail(ErrorCode::PreconditionViolated, os.str());
  }
  if (!(opts.delta > 0.0)) fail(ErrorCode::InvalidArgument, "delta must be positive");
  out.lambda_model = entropy(model, eo).lambda;
  out.maslov_model = maslov_numbers(model, opts.lag);
  out.delta1 = opts.delta * std::sqrt(out.area_model) / 6.0;
  const double d1 = out.delta1;
  const double amplitudes[] = {d1 / 4, -d1 / 4, d1 / 2, -d1 / 2, d1, -d1};

  const PerturbationCandidate* best = nullptr;
  for (const auto& [name, alpha] : perturbation_dictionary(model.grid(), opts.k_exact, opts.seed, backend)) {
    const double xmax = one_form_to_variation(model, alpha, opts.lag).colwise().norm().maxCoeff();
    if (!(xmax > 0.0)) continue;
    const OneForm a = alpha.scaled(1.0 / xmax);
    for (double s : amplitudes) {
      PerturbationCandidate c;
      c.direction = name;
      c.s = s;
      try {
        const TorusMap v = lagrangian_perturb(model, a, s, opts.lag);
        c.c0 = c0_distance(v, model);
        if (c.c0 > 3.0 * d1) {
          c.reason = "C0 distance above 3 delta1";
        } else {
          c.lambda = entropy(v, eo).lambda;
          c.drop = out.lambda_model - c.lambda;
          const MaslovResult mv = maslov_numbers(v, opts.lag);
          if (pair_of(mv) != pair_of(out.maslov_model)) {
            c.reason = "Maslov pair changed";
          } else if (c.drop < opts.c_min) {
            c.reason = "entropy drop below c_min";
          } else {
            c.certified = true;
            out.tried.push_back(c);
            out.map = v;
            out.alpha = a;
            out.direction = name;
            out.s = s;
            out.lambda_perturbed = c.lambda;
            out.area_perturbed = area(v, backend);
            out.c0_distance = c.c0;
            out.lag_residual = symplectic_residual(v, backend);
            out.maslov_perturbed = mv;
            return out;
          }
        }
      } catch (const Error& e) {
        c.reason = std::string(error_code_name(e.code())) + ": " + e.what();
      }
      out.tried.push_back(c);
    }
  }
  for (const PerturbationCandidate& c : out.tried)
    if (c.reason != "" && c.lambda > 0.0 && (!best || c.drop > best->drop)) best = &c;
  std::ostringstream os;
  os << "no certified entropy-decreasing perturbation among " << out.tried.size() << " candidates";
  if (best)
    os << "; best " << best->direction << " s = " << best->s << " with drop " << best->drop << " (c_min "
       << opts.c_min << ", " << best->reason << ")";
  fail(ErrorCode::NoDecreaseFound, os.str());
}

RescaledBack rescale_back(const TorusMap& perturbed, double target_area, double T0, double t1, const Vec4& q,
                          Backend backend) {
  if (!(target_area > 0.0) || !std::isfinite(target_area))
    fail(ErrorCode::InvalidArgument, "target area must be positive");
  if (!(T0 > t1)) fail(ErrorCode::InvalidArgument, "rescale_back needs T0 > t1");
  RescaledBack out;
  out.kappa = std::sqrt(target_area / area(perturbed, backend));
  out.map = perturbed.scaled(std::sqrt(T0 - t1) * out.kappa).translated(q);
  out.map.validate_finite();
  return out;
}

namespace {

const StoredMap* snapshot_at(const Trajectory& tr, double time) {
  for (const StoredMap& m : tr.snapshots)
    if (m.time == time) return &m;
  return nullptr;
}

// Maslov pair of the latest stored map on which it is still resolved.
std::array<int, 2> last_resolved_maslov(const Trajectory& tr, const LagrangianOptions& lag) {
  for (auto it = tr.snapshots.rbegin(); it != tr.snapshots.rend(); ++it) {
    try {
      return pair_of(maslov_numbers(it->map, lag));
    } catch (const Error&) {
    }
  }
  return {0, 0};
}

}  // namespace

PiecewiseLog run_piecewise(const TorusMap& F0, double Lambda, double delta, const PiecewiseOptions& opts) {
  if (!(Lambda > 0.0) || !(delta > 0.0)) fail(ErrorCode::InvalidArgument, "Lambda and delta must be positive");
  PiecewiseLog log;
  const Backend backend = opts.flow.backend;
  EntropyOptions eo = opts.flow.entropy;
  eo.backend = backend;
  LagrangianOptions lag = opts.perturb.lag;
  lag.backend = backend;
  PerturbationOptions popts = opts.perturb;
  popts.delta = delta;
  popts.area_max = Lambda;
  popts.lag = lag;
  popts.entropy = eo;

  log.lambda_initial = entropy(F0, eo).lambda;
  const double by_drop = std::floor((log.lambda_initial - 1.0) / popts.c_min);
  log.event_cap = static_cast<int>(std::max(0.0, std::min<double>(opts.k_max, by_drop)));

  TorusMap current = F0;
  double t = 0.0;
  for (;;) {
    log.leg_starts.push_back(current);
    PiecewiseLeg leg;
    leg.t_start = t;
    FlowRun run;
    try {
      leg.maslov_start = pair_of(maslov_numbers(current, lag));
      run = run_to_singularity(current, t, opts.flow);
    } catch (const Error& e) {
      leg.note = std::string(error_code_name(e.code())) + ": " + e.what();
      log.legs.push_back(leg);
      log.outcome = PiecewiseOutcome::Error;
      log.terminal_note = "leg " + std::to_string(log.legs.size() - 1) + " failed: " + leg.note;
      return log;
    }
    const Trajectory& tr = run.trajectory;
    const SingularityReport& rep = run.report;
    leg.samples = tr.samples;
    leg.steps = static_cast<int>(tr.samples.size()) - 1;
    leg.stop_reason = tr.stop_reason;
    leg.lambda_start = tr.samples.front().entropy;
    for (std::size_t i = 1; i < tr.samples.size(); ++i)
      if (std::isfinite(tr.samples[i].entropy))
        leg.max_entropy_increase = std::max(leg.max_entropy_increase, tr.samples[i].entropy - tr.samples[i - 1].entropy);
    leg.area_start = tr.samples.front().area;
    leg.T0_est = rep.T0_est;
    leg.type1_constant = rep.type1_constant;
    leg.is_type1 = rep.is_type1;
    leg.model_diameter = rep.rescale.max_diameter;
    if (rep.rescale.converged) leg.model_area = area(rep.rescale.model, backend);
    leg.compact_model = rep.is_type1 && rep.rescale.converged && leg.model_area <= Lambda &&
                        leg.model_diameter <= 10.0 * std::sqrt(Lambda);

    if (!leg.compact_model) {
      leg.t_end = tr.final_state.time;
      leg.area_end = tr.final_state.area;
      leg.maslov_end = last_resolved_maslov(tr, lag);
      std::ostringstream os;
      os << "not a type I singularity modelled by a compact self-shrinker of area <= " << Lambda << " ("
         << (rep.is_type1 ? "type I" : "not type I") << ", constant " << rep.type1_constant;
      if (!rep.rescale.note.empty()) os << "; " << rep.rescale.note;
      if (rep.rescale.converged)
        os << "; model area " << leg.model_area << ", rescaled diameter " << leg.model_diameter;
      os << ")";
      leg.note = os.str();
      log.legs.push_back(leg);
      log.outcome = PiecewiseOutcome::TerminalNonCompact;
      log.terminal_note = leg.note;
      return log;
    }

    const double t1 = rep.rescale.model_time;
    const StoredMap* at_t1 = snapshot_at(tr, t1);
    if (!at_t1) fail(ErrorCode::InvalidArgument, "model time does not match a stored map");
    leg.t_end = t1;
    leg.area_end = area(at_t1->map, backend);
    leg.note = "compact type I model";
    if (static_cast<int>(log.events.size()) >= log.event_cap) {
      leg.maslov_end = pair_of(maslov_numbers(at_t1->map, lag));
      log.legs.push_back(leg);
      log.outcome = PiecewiseOutcome::TerminatedAtCap;
      log.terminal_note = "event cap " + std::to_string(log.event_cap) + " reached";
      return log;
    }

    PiecewiseEvent ev;
    ev.t = t1;
    PerturbationResult pr;
    try {
      leg.maslov_end = pair_of(maslov_numbers(at_t1->map, lag));
      pr = perturbation_search(rep.rescale.model, popts);
    } catch (const Error& e) {
      leg.note = std::string(error_code_name(e.code())) + ": " + e.what();
      log.legs.push_back(leg);
      log.outcome = PiecewiseOutcome::Error;
      log.terminal_note = "perturbation at t = " + std::to_string(t1) + " failed: " + leg.note;
      return log;
    }
    log.legs.push_back(leg);

    const RescaledBack back = rescale_back(pr.map, pr.area_model, rep.T0_est, t1, rep.q_est, backend);
    ev.direction = pr.direction;
    ev.s = pr.s;
    ev.kappa = back.kappa;
    ev.area_before = area(at_t1->map, backend);
    ev.area_after = area(back.map, backend);
    ev.lambda_before = entropy(at_t1->map, eo).lambda;
    ev.lambda_after = entropy(back.map, eo).lambda;
    ev.c0_distance = c0_distance(back.map, at_t1->map);
    ev.delta_bound = delta * std::sqrt(ev.area_before);
    ev.maslov_before = leg.maslov_end;
    ev.cert_lagrangian = symplectic_residual(back.map, backend) <= lag_tolerance(back.map.grid(), lag);
    try {
      ev.maslov_after = pair_of(maslov_numbers(back.map, lag));
    } catch (const Error&) {
      ev.cert_lagrangian = false;
    }
    ev.cert_area = std::abs(ev.area_after - ev.area_before) <= 1e-6 * ev.area_before;
    ev.cert_entropy = ev.lambda_before - ev.lambda_after >= popts.c_min;
    ev.cert_c0 = ev.c0_distance <= ev.delta_bound;
    ev.cert_maslov = ev.maslov_before == ev.maslov_after && leg.maslov_start == leg.maslov_end;
    log.events.push_back(ev);
    if (!ev.certified()) {
      log.outcome = PiecewiseOutcome::Error;
      log.terminal_note = "event at t = " + std::to_string(t1) + " failed certification";
      return log;
    }
    current = back.map;
    t = t1;
  }
}

EmbeddednessReport embeddedness_check(const TorusMap& u, double rel, Backend backend) {
  const ImmersionData d = derivatives(u, backend);
  const GridSpec& g = d.grid;
  const Field4 x = u.positions();
  const int n = g.size();
  std::vector<Eigen::Matrix4d> proj(n);
  for (int k = 0; k < n; ++k) proj[k] = d.tangential_projector(k);

  EmbeddednessReport rep;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) rep.diameter = std::max(rep.diameter, (x.col(a) - x.col(b)).norm());
  const double thresh = rel * rep.diameter;
  rep.closest = std::numeric_limits<double>::infinity();
  auto cyc = [](int da, int m) {
    da = std::abs(da) % m;
    return std::min(da, m - da);
  };
  for (int a = 0; a < n; ++a) {
    const int ia = a % g.nx, ja = a / g.nx;
    for (int b = a + 1; b < n; ++b) {
      const int ib = b % g.nx, jb = b / g.nx;
      if (std::max(cyc(ia - ib, g.nx), cyc(ja - jb, g.ny)) < 2) continue;
      const double dist = (x.col(a) - x.col(b)).norm();
      rep.closest = std::min(rep.closest, dist);
      if (dist < thresh && (proj[a] - proj[b]).norm() > 0.1) ++rep.flagged_pairs;
    }
  }
  rep.embedded = rep.flagged_pairs == 0;
  return rep;
}

CensusReport entropy_census(const std::vector<CensusSeed>& seeds, double Lambda, const CensusOptions& opts) {
  CensusReport rep;
  const Backend backend = opts.critical.backend;
  EntropyOptions eo = opts.entropy;
  eo.backend = backend;
  for (const CensusSeed& seed : seeds) {
    CensusEntry e;
    e.label = seed.label;
    try {
      const CriticalPoint cp = find_critical_point(seed.map, seed.tau, opts.critical);
      e.grad_norm = cp.grad_norm;
      e.iterations = cp.iterations;
      const ImmersionData d = fundamental_forms(cp.u, backend);
      e.area = area(d);
      e.shrinker_residual = shrinker_residual(d, cp.u.positions());
      const double tol = shrinker_tolerance(d, opts.shrinker_tol_factor);
      if (e.shrinker_residual > tol) {
        std::ostringstream os;
        os << "critical point is not an accepted shrinker (residual " << e.shrinker_residual << " > " << tol << ")";
        e.notice = os.str();
      } else if (e.area > Lambda) {
        std::ostringstream os;
        os << "area " << e.area << " exceeds Lambda = " << Lambda;
        e.notice = os.str();
      } else {
        e.entropy = entropy(cp.u, eo).lambda;
        e.accepted = true;
        if (e.area <= 32.0 * kPi) {
          e.embedding_checked = true;
          e.embedded = embeddedness_check(cp.u, 1e-3, backend).embedded;
        }
      }
    } catch (const Error& err) {
      e.notice = std::string("skipped: ") + error_code_name(err.code()) + ": " + err.what();
    }
    rep.entries.push_back(e);
  }

  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(rep.entries.size()); ++i)
    if (rep.entries[i].accepted) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return rep.entries[a].entropy < rep.entries[b].entropy; });
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const CensusEntry& e = rep.entries[idx[k]];
    if (k == 0 || e.entropy - rep.entries[idx[k - 1]].entropy > opts.cluster_tol) rep.clusters.emplace_back();
    rep.clusters.back().members.push_back(idx[k]);
  }
  for (CensusCluster& c : rep.clusters) {
    double lo = 1e300, hi = -1e300;
    for (int i : c.members) {
      c.entropy += rep.entries[i].entropy / c.members.size();
      c.area += rep.entries[i].area / c.members.size();
      lo = std::min(lo, rep.entries[i].entropy);
      hi = std::max(hi, rep.entries[i].entropy);
    }
    c.spread = hi - lo;
  }
  return rep;
}

std::vector<CensusSeed> perturbed_clifford_seeds(const GridSpec& grid, int count, double amplitude,
                                                 std::uint64_t seed, Backend backend) {
  std::vector<CensusSeed> seeds;
  const TorusMap base = clifford_seed(grid);
  seeds.push_back({"clifford", base, {0.0, 1.0}});
  LagrangianOptions lag;
  lag.backend = backend;
  const Differentiator diff(grid, backend);
  for (int i = 1; i <= count; ++i) {
    CounterRng rng(seed, 1000 + static_cast<std::uint64_t>(i));
    const double p = rng.normal(), q = rng.normal();
    const OneForm exact = OneForm::exact(random_bandlimited(grid, 2, rng), diff);
    OneForm alpha = OneForm::harmonic(grid, p, q);
    alpha.a += exact.a;
    alpha.b += exact.b;
    alpha.f = exact.f;
    const double xmax = one_form_to_variation(base, alpha, lag).colwise().norm().maxCoeff();
    seeds.push_back({"clifford+" + std::to_string(i), lagrangian_perturb(base, alpha.scaled(1.0 / xmax), amplitude, lag),
                     {0.0, 1.0}});
  }
  return seeds;
}

}  // namespace lagshrink

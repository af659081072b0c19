#include "flow.hpp"

#include "lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lagshrink {

namespace {

void refresh_from(FlowState& s, const ImmersionData& d) {
  s.area = area(d);
  s.maxA2 = d.max_second_fundamental_form_sq();
  s.min_spacing = min_nodal_spacing(d);
  s.lag_residual = symplectic_residual(d);
}

}  // namespace

void refresh_diagnostics(FlowState& s, Backend backend) { refresh_from(s, fundamental_forms(s.map, backend)); }

FlowState make_flow_state(const TorusMap& u, double time, const FlowOptions& opts) {
  if (u.has_lift()) fail(ErrorCode::InvalidArgument, "flow needs a closed torus map (no lift)");
  u.validate_finite();
  FlowState s;
  s.map = u;
  s.time = time;
  refresh_diagnostics(s, opts.backend);
  if (opts.track_entropy) {
    EntropyOptions eo = opts.entropy;
    eo.backend = opts.backend;
    const EntropyReport r = entropy(u, eo);
    s.entropy = r.lambda;
    s.entropy_argmax = r.argmax;
  }
  return s;
}

double flow_time_step(const FlowState& s, const FlowOptions& opts) {
  if (opts.fixed_dt > 0.0) return opts.fixed_dt;
  const double h2 = s.min_spacing * s.min_spacing;
  return opts.sigma_cfl * h2 / std::max(1.0, s.maxA2 * h2);
}

FlowState mcf_step(const FlowState& s, const FlowOptions& opts) {
  double dt = flow_time_step(s, opts);
  const GridSpec& g = s.map.grid();
  auto velocity = [&](const Field4& x) {
    return fundamental_forms(TorusMap(g, x), opts.backend).mean_curvature;
  };
  for (int attempt = 0; attempt <= opts.max_rejections; ++attempt) {
    try {
      const Field4& u = s.map.values();
      const Field4 k1 = velocity(u);
      const Field4 k2 = velocity(u + 0.5 * dt * k1);
      const Field4 k3 = velocity(u + 0.5 * dt * k2);
      const Field4 k4 = velocity(u + dt * k3);
      FlowState next = s;
      next.map = TorusMap(g, u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      next.time = s.time + dt;
      next.dt_last = dt;
      refresh_from(next, fundamental_forms(next.map, opts.backend));
      if (!std::isfinite(next.maxA2)) fail(ErrorCode::DegenerateMetric, "non-finite curvature after step");
      return next;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateMetric) throw;
      dt *= 0.5;
    }
  }
  std::ostringstream os;
  os << "time step rejected " << opts.max_rejections << " times at t = " << s.time;
  fail(ErrorCode::StepRejected, os.str());
}

double equidistribute(TorusMap& u, Backend backend) {
  const ImmersionData d = fundamental_forms(u, backend);
  Differentiator diff(d.grid, backend);
  const double hx = d.grid.hx(), hy = d.grid.hy();
  const Field4 lap = diff.d1(d.d1) * (hx * hx) + diff.d2(d.d2) * (hy * hy);
  double moved = 0.0;
  for (int k = 0; k < d.grid.size(); ++k) {
    // A quarter of the tangential part of the grid Laplacian: pulls nodes
    // towards the average of their neighbours without leaving the tangent plane.
    const Vec4 v = 0.25 * d.tangential(k, lap.col(k));
    u.values().col(k) += v;
    // Distance of the moved node from the surface, to second order.
    moved = std::max(moved, 0.5 * std::sqrt(d.second_fundamental_form_sq(k)) * v.squaredNorm());
  }
  return moved;
}

namespace {

// Follows a few local maxima of the F-functional along the flow. The global
// maximizer can jump between branches (e.g. from the centre of a product torus
// to a point of its larger factor), so a single warm-started maximizer is not
// enough; branches are refreshed from a global scan at every snapshot level.
class EntropyTracker {
 public:
  explicit EntropyTracker(const EntropyOptions& eo) : eo_(eo) {}

  void rescan(const TorusMap& u) {
    const EntropyReport r = entropy(u, eo_);
    for (const BasePoint& b : r.local_maxima) add(b);
    if (r.local_maxima.empty()) add(r.argmax);
  }

  // Advances every branch by dt; returns the best one.
  EntropyReport advance(const TorusMap& u, double dt) {
    EntropyReport best;
    best.lambda = -1.0;
    std::vector<BasePoint> kept;
    for (const BasePoint& b0 : branches_) {
      BasePoint start = b0;
      start.t0 = std::max(start.t0 - dt, 0.5 * start.t0);
      const EntropyReport r = entropy_local(u, start, eo_);
      if (!duplicate(kept, r.argmax)) kept.push_back(r.argmax);
      if (r.lambda > best.lambda) best = r;
    }
    branches_ = std::move(kept);
    return best;
  }

  EntropyReport value(const TorusMap& u) { return advance(u, 0.0); }

 private:
  static constexpr std::size_t kMaxBranches = 4;

  static bool duplicate(const std::vector<BasePoint>& list, const BasePoint& b) {
    for (const BasePoint& q : list)
      if ((q.x0 - b.x0).norm() < 1e-3 * std::sqrt(b.t0) && std::abs(std::log(q.t0 / b.t0)) < 1e-3) return true;
    return false;
  }

  void add(const BasePoint& b) {
    if (branches_.size() < kMaxBranches && !duplicate(branches_, b)) branches_.push_back(b);
  }

  EntropyOptions eo_;
  std::vector<BasePoint> branches_;
};

}  // namespace

Trajectory run_flow(const TorusMap& u0, double t_start, const FlowOptions& opts) {
  Trajectory tr;
  FlowOptions quiet = opts;
  quiet.track_entropy = false;
  FlowState s = make_flow_state(u0, t_start, quiet);
  EntropyOptions eo = opts.entropy;
  eo.backend = opts.backend;
  EntropyTracker tracker(eo);
  bool entropy_live = opts.track_entropy;
  double last_scan_value = 0.0;
  if (entropy_live) {
    tracker.rescan(s.map);
    const EntropyReport r = tracker.value(s.map);
    last_scan_value = r.lambda;
    s.entropy = r.lambda;
    s.entropy_argmax = r.argmax;
    entropy_live = r.resolved;
    if (!entropy_live) s.entropy = std::numeric_limits<double>::quiet_NaN();
  }

  auto record = [&](const FlowState& st) {
    tr.samples.push_back({st.time, st.dt_last, st.area, st.maxA2, st.entropy, st.lag_residual});
  };
  auto level = [&](double maxA2) {
    return static_cast<long>(std::floor(std::log(std::max(maxA2, 1e-300)) / opts.snapshot_log_spacing));
  };
  record(s);
  tr.snapshots.push_back({s.map, s.time, s.maxA2});
  tr.recent.push_back({s.map, s.time, s.maxA2});
  long last_level = level(s.maxA2);
  tr.entropy_resolved_until = s.time;

  for (long step = 1;; ++step) {
    if (s.maxA2 >= opts.maxA2_stop) {
      tr.stop_reason = "curvature";
      break;
    }
    if (s.time >= opts.t_max) {
      std::ostringstream os;
      os << "no singularity before t_max = " << opts.t_max << " (max|A|^2 = " << s.maxA2 << ")";
      fail(ErrorCode::NoSingularity, os.str());
    }
    if (flow_time_step(s, opts) < opts.dt_min) {
      tr.stop_reason = "dt_min";
      break;
    }
    FlowState next;
    try {
      next = mcf_step(s, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepRejected) throw;
      tr.stop_reason = "step_rejected";
      break;
    }
    if (next.dt_last < flow_time_step(s, opts)) ++tr.rejected_steps;
    if (opts.equidistribute && opts.equidistribute_every > 0 && step % opts.equidistribute_every == 0) {
      equidistribute(next.map, opts.backend);
      refresh_diagnostics(next, opts.backend);
    }
    const long lv = level(next.maxA2);
    const bool periodic = opts.snapshot_every > 0 && step % opts.snapshot_every == 0;
    if (entropy_live) {
      const bool dropped = opts.entropy_rescan_drop > 0.0 && s.entropy < last_scan_value - opts.entropy_rescan_drop;
      const bool scan =
          dropped || lv > last_level || (opts.entropy_rescan_every > 0 && step % opts.entropy_rescan_every == 0);
      if (scan) tracker.rescan(next.map);
      EntropyReport r = tracker.advance(next.map, next.dt_last);
      if (scan) last_scan_value = r.lambda;
      next.entropy = r.lambda;
      next.entropy_argmax = r.argmax;
      if (!r.resolved) {
        entropy_live = false;
        next.entropy = std::numeric_limits<double>::quiet_NaN();
      }
    }
    if (entropy_live) tr.entropy_resolved_until = next.time;
    s = std::move(next);
    record(s);

    if (lv > last_level || periodic) tr.snapshots.push_back({s.map, s.time, s.maxA2});
    if (lv > last_level) last_level = lv;
    tr.recent.push_back({s.map, s.time, s.maxA2});
    if (tr.recent.size() > 5) tr.recent.pop_front();
  }
  tr.final_state = s;
  return tr;
}

double aligned_distance(const Field4& a, const Field4& b, Eigen::Matrix4d* rotation) {
  if (a.cols() != b.cols()) fail(ErrorCode::InvalidArgument, "aligned_distance: node counts differ");
  const Eigen::Matrix4d cov = b * a.transpose();
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix4d d = Eigen::Matrix4d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(3, 3) = -1.0;
  const Eigen::Matrix4d r = svd.matrixU() * d * svd.matrixV().transpose();
  if (rotation) *rotation = r;
  return (r * a - b).colwise().norm().maxCoeff();
}

namespace {

double sampled_diameter(const Field4& x, int nx, int ny) {
  const int sx = std::max(1, nx / 32), sy = std::max(1, ny / 32);
  std::vector<Vec4> pts;
  for (int j = 0; j < ny; j += sy)
    for (int i = 0; i < nx; i += sx) pts.push_back(x.col(i + nx * j));
  double dmax = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) dmax = std::max(dmax, (pts[a] - pts[b]).norm());
  return dmax;
}

}  // namespace

RescaleResult type1_rescale(const Trajectory& traj, const SingularityReport& report, const FlowOptions& opts) {
  if (!report.is_type1) fail(ErrorCode::PreconditionViolated, "type-I rescaling needs a type-I singularity");
  if (traj.samples.empty()) fail(ErrorCode::InsufficientSamples, "empty trajectory");
  RescaleResult out;
  const double T0 = report.T0_est;
  const double t_start = traj.samples.front().t;
  const double gap_max = (T0 - t_start) * std::exp(-opts.rescale_window_start);
  std::vector<TorusMap> unaligned;
  for (const StoredMap& m : traj.snapshots) {
    const double gap = T0 - m.time;
    if (!(gap > 0.0) || gap > gap_max) continue;
    TorusMap r = m.map.translated(-report.q_est).scaled(1.0 / std::sqrt(gap));
    unaligned.push_back(r);
    if (!out.maps.empty()) {
      Eigen::Matrix4d rot;
      out.diffs.push_back(aligned_distance(r.values(), out.maps.back().values(), &rot));
      r = r.transformed(rot);
    }
    out.max_diameter = std::max(out.max_diameter, sampled_diameter(r.values(), r.grid().nx, r.grid().ny));
    out.maps.push_back(std::move(r));
    out.times.push_back(m.time);
    out.s_values.push_back(-std::log(gap));
  }
  const int n = static_cast<int>(out.maps.size());
  if (n < 3) {
    std::ostringstream os;
    os << "NotCauchy: only " << n << " stored maps inside the rescaling window";
    out.note = os.str();
    return out;
  }
  // Earliest index after which every consecutive difference is within tolerance.
  int j = n - 1;
  while (j > 0 && out.diffs[j - 1] <= opts.rescale_tol) --j;
  if (n - j < 3) {
    std::ostringstream os;
    os << "NotCauchy: rescaled maps do not settle (last difference "
       << out.diffs.back() << ", tolerance " << opts.rescale_tol << ")";
    out.note = os.str();
    return out;
  }
  out.model_index = j;
  out.model = unaligned[j];
  out.model_time = out.times[j];
  const ImmersionData d = fundamental_forms(out.model, opts.backend);
  out.model_residual = shrinker_residual(d, out.model.positions());
  out.model_tolerance = shrinker_tolerance(d, opts.shrinker_tol_factor);
  if (out.model_residual > out.model_tolerance) {
    std::ostringstream os;
    os << "NotShrinker: limit candidate has shrinker residual " << out.model_residual << " > "
       << out.model_tolerance;
    out.note = os.str();
    return out;
  }
  out.converged = true;
  out.note = "converged";
  return out;
}

SingularityReport analyze_singularity(const Trajectory& traj, const FlowOptions& opts) {
  if (traj.samples.size() < 3) fail(ErrorCode::InsufficientSamples, "trajectory too short for singularity analysis");
  SingularityReport rep;
  const double final_a2 = traj.samples.back().maxA2;

  // 1/maxA2 is affine in t near a type-I singularity; fit over the last decade of curvature.
  std::vector<const FlowSample*> win;
  for (const FlowSample& s : traj.samples)
    if (s.maxA2 >= final_a2 / 10.0) win.push_back(&s);
  if (win.size() < 3) fail(ErrorCode::InsufficientSamples, "too few samples in the last curvature decade");
  const double n = static_cast<double>(win.size());
  double tm = 0.0, ym = 0.0;
  for (const FlowSample* s : win) {
    tm += s->t / n;
    ym += 1.0 / s->maxA2 / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const FlowSample* s : win) {
    const double dt = s->t - tm, dy = 1.0 / s->maxA2 - ym;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx, icept = ym - slope * tm;
  double ss_res = 0.0;
  for (const FlowSample* s : win) {
    const double r = 1.0 / s->maxA2 - (icept + slope * s->t);
    ss_res += r * r;
  }
  rep.T0_est = -icept / slope;
  rep.fit_residual = std::sqrt(ss_res / n) / std::sqrt(ym * ym + syy / n);
  const double sigma = n > 2 ? std::sqrt(ss_res / (n - 2)) : 0.0;
  rep.T0_stderr = sigma / std::abs(slope) * std::sqrt(1.0 / n + (rep.T0_est - tm) * (rep.T0_est - tm) / sxx);

  rep.type1_constant = 0.0;
  for (const FlowSample* s : win) rep.type1_constant = std::max(rep.type1_constant, s->maxA2 * (rep.T0_est - s->t));
  const bool blew_up = traj.stop_reason == "curvature" || traj.stop_reason == "dt_min" ||
                       traj.stop_reason == "step_rejected";
  rep.is_type1 = blew_up && slope < 0.0 && std::isfinite(rep.type1_constant) &&
                 rep.type1_constant <= opts.type1_max && rep.fit_residual <= opts.fit_residual_max;

  // Blow-up centre: the node of largest |A| at the last resolved time, followed
  // back through the last maps and fitted to x(t) = q + sqrt(T0 - t) y.
  const TorusMap& last = traj.recent.back().map;
  const ImmersionData d = fundamental_forms(last, opts.backend);
  int node = 0;
  double best = -1.0;
  for (int k = 0; k < d.grid.size(); ++k)
    if (const double a2 = d.second_fundamental_form_sq(k); a2 > best) {
      best = a2;
      node = k;
    }
  const int m = static_cast<int>(traj.recent.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::MatrixXd B(m, 4);
  for (int i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::sqrt(std::max(0.0, rep.T0_est - traj.recent[i].time));
    B.row(i) = traj.recent[i].map.position(node).transpose();
  }
  if (m >= 2 && A.col(1).maxCoeff() - A.col(1).minCoeff() > 0.0) {
    const Eigen::MatrixXd sol = A.colPivHouseholderQr().solve(B);
    rep.q_est = sol.row(0).transpose();
  } else {
    rep.q_est = B.colwise().mean().transpose();
  }

  if (rep.is_type1) {
    rep.rescale = type1_rescale(traj, rep, opts);
  } else {
    std::ostringstream os;
    os << "not a type-I singularity (constant " << rep.type1_constant << ", fit residual " << rep.fit_residual
       << ")";
    rep.rescale.note = os.str();
  }
  return rep;
}

FlowRun run_to_singularity(const TorusMap& u0, double t_start, const FlowOptions& opts) {
  FlowRun run;
  run.trajectory = run_flow(u0, t_start, opts);
  run.report = analyze_singularity(run.trajectory, opts);
  return run;
}

}  // namespace lagshrink

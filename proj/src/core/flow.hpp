#pragma once

#include "functionals.hpp"

#include <deque>
#include <limits>
#include <string>
#include <vector>

namespace lagshrink {

struct FlowOptions {
  Backend backend = Backend::FiniteDifference4;
  double sigma_cfl = 0.1;
  double fixed_dt = 0.0;       // > 0 overrides the adaptive step
  double t_max = 10.0;         // absolute time limit
  double maxA2_stop = 1e6;     // curvature level treated as blow-up
  double dt_min = 1e-14;
  int max_rejections = 10;
  bool track_entropy = true;
  int entropy_rescan_every = 100;  // global entropy scans, in steps (also at each snapshot level)
  // Also rescan once the tracked value has fallen this much since the last scan:
  // a fast drop means the tracked branch is dying and another may overtake it.
  double entropy_rescan_drop = 1e-3;
  bool equidistribute = false;  // tangential smoothing every equidistribute_every steps
  int equidistribute_every = 100;
  double snapshot_log_spacing = 0.5;  // store maps each time log(maxA2) crosses a multiple
  int snapshot_every = 0;             // additionally every k steps (0 = off)
  double type1_max = 100.0;
  double fit_residual_max = 0.05;
  double rescale_tol = 1e-3;
  double rescale_window_start = 2.0;  // first rescaled time s = -log(T0) + this
  double shrinker_tol_factor = 10.0;  // model must satisfy residual <= factor * tol_shrink
  EntropyOptions entropy;
};

struct FlowState {
  TorusMap map;
  double time = 0.0;
  double dt_last = 0.0;
  double area = 0.0;
  double maxA2 = 0.0;
  double min_spacing = 0.0;  // smallest induced nodal spacing
  double entropy = std::numeric_limits<double>::quiet_NaN();
  BasePoint entropy_argmax;
  double lag_residual = 0.0;
};

// Refreshes area, maxA2 and the Lagrangian residual (entropy is left untouched).
void refresh_diagnostics(FlowState& s, Backend backend);

FlowState make_flow_state(const TorusMap& u, double time, const FlowOptions& opts);

// Adaptive time step sigma * s_min^2 / max(1, maxA2 s_min^2), or fixed_dt when set.
double flow_time_step(const FlowState& s, const FlowOptions& opts);

// One RK4 step of du/dt = H with the adaptive step; halves on degenerate stages.
// Throws StepRejected after max_rejections halvings.
FlowState mcf_step(const FlowState& s, const FlowOptions& opts);

// Moves nodes tangentially by a small smoothing step; returns the largest normal displacement.
double equidistribute(TorusMap& u, Backend backend);

struct FlowSample {
  double t, dt, area, maxA2, entropy, lag_residual;
};

struct StoredMap {
  TorusMap map;
  double time;
  double maxA2;
};

struct Trajectory {
  std::vector<FlowSample> samples;
  std::vector<StoredMap> snapshots;  // log-spaced in maxA2, plus the periodic ones
  std::deque<StoredMap> recent;      // the last 5 resolved maps
  FlowState final_state;
  std::string stop_reason;
  int rejected_steps = 0;
  // Entropy is tracked until its maximizing scale drops below grid resolution;
  // later samples carry NaN.
  double entropy_resolved_until = 0.0;
};

struct RescaleResult {
  std::vector<TorusMap> maps;  // rescaled maps in the window, each rotated onto its predecessor
  std::vector<double> times, s_values;
  std::vector<double> diffs;   // aligned max-norm differences of consecutive maps
  bool converged = false;
  int model_index = -1;
  TorusMap model;  // (F_t - q) / sqrt(T0 - t) at model_time, not rotated
  double model_time = 0.0;
  double model_residual = 0.0;
  double model_tolerance = 0.0;
  double max_diameter = 0.0;
  std::string note;
};

struct SingularityReport {
  double T0_est = 0.0;
  double T0_stderr = 0.0;
  double type1_constant = 0.0;
  double fit_residual = 0.0;
  bool is_type1 = false;
  Vec4 q_est = Vec4::Zero();
  RescaleResult rescale;
};

// Runs from u0 at time t_start until blow-up; NoSingularity when t_max is reached first.
Trajectory run_flow(const TorusMap& u0, double t_start, const FlowOptions& opts);

// Singular time, type-I constant, blow-up centre and the rescaled sequence of a trajectory.
SingularityReport analyze_singularity(const Trajectory& traj, const FlowOptions& opts);

struct FlowRun {
  Trajectory trajectory;
  SingularityReport report;
};

FlowRun run_to_singularity(const TorusMap& u0, double t_start, const FlowOptions& opts);

// Best rotation R (Kabsch, det R = +1) minimizing |R a - b| over nodes; returns max_k |R a_k - b_k|.
double aligned_distance(const Field4& a, const Field4& b, Eigen::Matrix4d* rotation = nullptr);

// Type-I rescaling of stored maps: (F_t - q) / sqrt(T0 - t). PreconditionViolated unless is_type1.
RescaleResult type1_rescale(const Trajectory& traj, const SingularityReport& report, const FlowOptions& opts);

}  // namespace lagshrink

#pragma once

#include "geometry.hpp"

#include <vector>

namespace lagshrink {

struct BasePoint {
  Vec4 x0 = Vec4::Zero();
  double t0 = 1.0;
};

// Gaussian density (4 pi t0)^-1 int exp(-|u - x0|^2 / 4 t0) dmu.
double f_functional(const TorusMap& u, const BasePoint& b, Backend backend = Backend::FiniteDifference4);
double f_functional(const ImmersionData& data, const Field4& points, const BasePoint& b);

struct EntropyOptions {
  int lattice = 5;          // x0 samples per ambient axis
  int t_points = 17;        // log-spaced t0 samples
  double t_lo = 1e-2;       // t0 range, in units of the map's squared size
  double t_hi = 1e2;
  double box_inflation = 0.2;
  int refine_starts = 5;
  double simplex_tol = 1e-6;
  int max_simplex_iter = 5000;
  // Scales t0 < (resolution * largest nodal spacing)^2 are not resolved by the
  // grid quadrature; the search stays above that floor.
  double resolution = 1.0;
  Backend backend = Backend::FiniteDifference4;
};

struct EntropyReport {
  double lambda = 0.0;
  BasePoint argmax;
  int n_restarts = 0;
  bool converged = false;
  // Search domain actually scanned.
  Vec4 box_lo = Vec4::Zero(), box_hi = Vec4::Zero();
  double t_lo = 0.0, t_hi = 0.0;
  double t_floor = 0.0;
  bool resolved = true;  // false when the maximizer sits on the resolution floor
  std::vector<BasePoint> local_maxima;  // distinct refined maxima, best first (global search only)
};

EntropyReport entropy(const TorusMap& u, const EntropyOptions& opts = {});

// Local maximization of the F-functional from a warm start (Newton on
// (x0, t0) with analytic derivatives, simplex fallback). Used to track the
// entropy along a flow.
EntropyReport entropy_local(const TorusMap& u, const BasePoint& start, const EntropyOptions& opts = {});

// Gaussian energy (1/2) int exp(-|u|^2/4) |Du|^2_tau dmu_tau.
double energy(const TorusMap& u, const ConformalStructure& tau, Backend backend = Backend::FiniteDifference4);

// (1/4) int |H|^2 dmu.
double willmore(const TorusMap& u, Backend backend = Backend::FiniteDifference4);

// max_k |H + u^perp / 2|.
double shrinker_residual(const TorusMap& u, Backend backend = Backend::FiniteDifference4);
double shrinker_residual(const ImmersionData& data, const Field4& points);

// Acceptance threshold for shrinker_residual: factor * h^2 * max|H|, h = max(hx, hy).
double shrinker_tolerance(const ImmersionData& data, double factor = 10.0);
double shrinker_tolerance(const TorusMap& u, Backend backend = Backend::FiniteDifference4, double factor = 10.0);

// max_k |Lap_g |u|^2 + |u^perp|^2 - 4|. Requires an accepted numerical shrinker.
double drift_identity_residual(const TorusMap& u, Backend backend = Backend::FiniteDifference4,
                               double tol_factor = 10.0);

}  // namespace lagshrink

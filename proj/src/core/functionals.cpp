#include "functionals.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lagshrink {

namespace {

// exp(-a) underflows to zero beyond this; skipping it avoids the slow libm path.
constexpr double kExpCutoff = 745.0;

// Quadrature weights sqrt(det g) hx hy.
Scalar quadrature_weights(const ImmersionData& data) {
  return data.area_element * data.grid.cell_area();
}

double gaussian_sum(const Field4& points, const Scalar& w, const Vec4& x0, double t0) {
  const double inv = 1.0 / (4.0 * t0);
  double s = 0.0;
  for (int k = 0; k < points.cols(); ++k) {
    const double a = (points.col(k) - x0).squaredNorm() * inv;
    if (a < kExpCutoff) s += w[k] * std::exp(-a);
  }
  return s / (4.0 * kPi * t0);
}

struct ScaleFrame {
  Vec4 center;
  double length;  // size with length^2 = mean |u - c|^2 / 4
};

ScaleFrame scale_frame(const Field4& points, const Scalar& w) {
  ScaleFrame f;
  const double total = w.sum();
  f.center = (points * w) / total;
  double m2 = 0.0;
  for (int k = 0; k < points.cols(); ++k) m2 += w[k] * (points.col(k) - f.center).squaredNorm();
  m2 /= total;
  f.length = std::sqrt(std::max(m2 / 4.0, 1e-300));
  return f;
}

struct SimplexProblem {
  const Field4* points;
  const Scalar* w;
  ScaleFrame frame;
  double t_floor;
};

double resolution_floor(const ImmersionData& data, const EntropyOptions& opts) {
  const double h = opts.resolution * max_nodal_spacing(data);
  return h * h;
}

BasePoint decode(const gsl_vector* z, const ScaleFrame& frame, double t_floor) {
  BasePoint b;
  for (int a = 0; a < 4; ++a) b.x0[a] = frame.center[a] + frame.length * gsl_vector_get(z, a);
  b.t0 = std::max(t_floor, frame.length * frame.length * std::exp(gsl_vector_get(z, 4)));
  return b;
}

double simplex_objective(const gsl_vector* z, void* params) {
  const auto* p = static_cast<const SimplexProblem*>(params);
  const BasePoint b = decode(z, p->frame, p->t_floor);
  return -gaussian_sum(*p->points, *p->w, b.x0, b.t0);
}

struct SimplexResult {
  BasePoint best;
  double value;
  bool converged;
};

SimplexResult refine_simplex(const SimplexProblem& problem, const BasePoint& start, double step_x,
                             double step_logt, const EntropyOptions& opts) {
  const ScaleFrame& fr = problem.frame;
  gsl_vector* z = gsl_vector_alloc(5);
  gsl_vector* step = gsl_vector_alloc(5);
  for (int a = 0; a < 4; ++a) {
    gsl_vector_set(z, a, (start.x0[a] - fr.center[a]) / fr.length);
    gsl_vector_set(step, a, step_x);
  }
  gsl_vector_set(z, 4, std::log(std::max(start.t0, problem.t_floor) / (fr.length * fr.length)));
  gsl_vector_set(step, 4, step_logt);

  gsl_multimin_function fn;
  fn.n = 5;
  fn.f = simplex_objective;
  fn.params = const_cast<SimplexProblem*>(&problem);

  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5);
  gsl_multimin_fminimizer_set(s, &fn, z, step);
  bool converged = false;
  for (int it = 0; it < opts.max_simplex_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != 0) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opts.simplex_tol) == GSL_SUCCESS) {
      converged = true;
      break;
    }
  }
  SimplexResult r{decode(s->x, fr, problem.t_floor), -s->fval, converged};
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(z);
  gsl_vector_free(step);
  return r;
}

// Value, gradient and Hessian of F in the variables (x0, t0).
struct LocalModel {
  double value;
  Eigen::Matrix<double, 5, 1> grad;
  Eigen::Matrix<double, 5, 5> hess;
};

LocalModel local_model(const Field4& points, const Scalar& w, const BasePoint& b) {
  const double t = b.t0;
  const double c = 1.0 / (4.0 * kPi * t);
  LocalModel m;
  m.value = 0.0;
  m.grad.setZero();
  m.hess.setZero();
  Eigen::Matrix4d hxx = Eigen::Matrix4d::Zero();
  Vec4 gx = Vec4::Zero(), hxt = Vec4::Zero();
  double gt = 0.0, htt = 0.0, s0 = 0.0;
  for (int k = 0; k < points.cols(); ++k) {
    const Vec4 d = points.col(k) - b.x0;
    const double r2 = d.squaredNorm();
    if (r2 / (4.0 * t) >= kExpCutoff) continue;
    const double e = w[k] * std::exp(-r2 / (4.0 * t));
    s0 += e;
    gx += e * d;
    gt += e * (r2 / (4.0 * t * t) - 1.0 / t);
    hxx += e * d * d.transpose();
    hxt += e * d * (r2 / (8.0 * t * t * t) - 1.0 / (t * t));
    htt += e * (r2 * r2 / (16.0 * t * t * t * t) - r2 / (t * t * t) + 2.0 / (t * t));
  }
  m.value = c * s0;
  m.grad.head<4>() = c * gx / (2.0 * t);
  m.grad[4] = c * gt;
  m.hess.topLeftCorner<4, 4>() = c * (hxx / (4.0 * t * t) - Eigen::Matrix4d::Identity() * s0 / (2.0 * t));
  m.hess.block<4, 1>(0, 4) = c * hxt;
  m.hess.block<1, 4>(4, 0) = c * hxt.transpose();
  m.hess(4, 4) = c * htt;
  return m;
}

}  // namespace

double f_functional(const ImmersionData& data, const Field4& points, const BasePoint& b) {
  if (!(b.t0 > 0.0)) fail(ErrorCode::InvalidArgument, "t0 must be positive");
  return gaussian_sum(points, quadrature_weights(data), b.x0, b.t0);
}

double f_functional(const TorusMap& u, const BasePoint& b, Backend backend) {
  if (!(b.t0 > 0.0)) fail(ErrorCode::InvalidArgument, "t0 must be positive");
  return f_functional(derivatives(u, backend), u.positions(), b);
}

EntropyReport entropy(const TorusMap& u, const EntropyOptions& opts) {
  const ImmersionData data = derivatives(u, opts.backend);
  const Field4 points = u.positions();
  const Scalar w = quadrature_weights(data);
  const ScaleFrame frame = scale_frame(points, w);

  EntropyReport rep;
  Vec4 lo = points.rowwise().minCoeff(), hi = points.rowwise().maxCoeff();
  const Vec4 pad = opts.box_inflation * 0.5 * (hi - lo);
  lo -= pad;
  hi += pad;
  rep.box_lo = lo;
  rep.box_hi = hi;
  rep.t_lo = opts.t_lo * frame.length * frame.length;
  rep.t_hi = opts.t_hi * frame.length * frame.length;
  rep.t_floor = resolution_floor(data, opts);
  rep.t_lo = std::max(rep.t_lo, rep.t_floor);
  rep.t_hi = std::max(rep.t_hi, 2.0 * rep.t_lo);

  const int nl = std::max(opts.lattice, 1), nt = std::max(opts.t_points, 2);
  std::vector<double> ts(nt);
  for (int m = 0; m < nt; ++m)
    ts[m] = rep.t_lo * std::pow(rep.t_hi / rep.t_lo, static_cast<double>(m) / (nt - 1));
  auto lattice_coord = [&](int a, int idx) {
    return nl == 1 ? 0.5 * (lo[a] + hi[a]) : lo[a] + (hi[a] - lo[a]) * idx / (nl - 1);
  };

  struct Candidate {
    double value;
    BasePoint b;
  };
  std::vector<Candidate> scan;
  scan.reserve(static_cast<std::size_t>(nl * nl * nl * nl));
  std::vector<double> sums(nt);
  std::vector<double> inv(nt);
  for (int m = 0; m < nt; ++m) inv[m] = 1.0 / (4.0 * ts[m]);
  for (int i0 = 0; i0 < nl; ++i0)
    for (int i1 = 0; i1 < nl; ++i1)
      for (int i2 = 0; i2 < nl; ++i2)
        for (int i3 = 0; i3 < nl; ++i3) {
          const Vec4 x0(lattice_coord(0, i0), lattice_coord(1, i1), lattice_coord(2, i2),
                        lattice_coord(3, i3));
          std::fill(sums.begin(), sums.end(), 0.0);
          for (int k = 0; k < points.cols(); ++k) {
            const double r2 = (points.col(k) - x0).squaredNorm();
            for (int m = 0; m < nt; ++m)
              if (r2 * inv[m] < kExpCutoff) sums[m] += w[k] * std::exp(-r2 * inv[m]);
          }
          // Best scale per centre, so that the refinement starts are spread over distinct centres.
          Candidate best{-1.0, {x0, ts[0]}};
          for (int m = 0; m < nt; ++m)
            if (const double v = sums[m] / (4.0 * kPi * ts[m]); v > best.value) best = {v, {x0, ts[m]}};
          scan.push_back(best);
        }

  const int starts = std::min<int>(opts.refine_starts, static_cast<int>(scan.size()));
  std::partial_sort(scan.begin(), scan.begin() + starts, scan.end(),
                    [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  const SimplexProblem problem{&points, &w, frame, rep.t_floor};
  double step_x = 0.5;
  if (nl > 1) step_x = 0.5 * (hi - lo).maxCoeff() / (nl - 1) / frame.length;
  const double step_logt = 0.5 * std::log(opts.t_hi / opts.t_lo) / (nt - 1);

  rep.lambda = -1.0;
  rep.converged = false;
  std::vector<Candidate> found;
  for (int s = 0; s < starts; ++s) {
    const SimplexResult r = refine_simplex(problem, scan[s].b, step_x, step_logt, opts);
    ++rep.n_restarts;
    found.push_back({r.value, r.best});
    if (r.value > rep.lambda) {
      rep.lambda = r.value;
      rep.argmax = r.best;
      rep.converged = r.converged;
    }
  }
  // The reported value is the functional at the reported base point.
  rep.lambda = gaussian_sum(points, w, rep.argmax.x0, rep.argmax.t0);
  rep.resolved = rep.argmax.t0 > rep.t_floor * (1.0 + 1e-6);
  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  for (const Candidate& c : found) {
    bool distinct = true;
    for (const BasePoint& q : rep.local_maxima)
      if ((q.x0 - c.b.x0).norm() < 1e-3 * frame.length && std::abs(std::log(q.t0 / c.b.t0)) < 1e-3) distinct = false;
    if (distinct) rep.local_maxima.push_back(c.b);
  }
  return rep;
}

EntropyReport entropy_local(const TorusMap& u, const BasePoint& start, const EntropyOptions& opts) {
  const ImmersionData data = derivatives(u, opts.backend);
  const Field4 points = u.positions();
  const Scalar w = quadrature_weights(data);

  EntropyReport rep;
  rep.n_restarts = 1;
  rep.t_floor = resolution_floor(data, opts);
  BasePoint b = start;
  b.t0 = std::max(b.t0, rep.t_floor);
  LocalModel m = local_model(points, w, b);
  bool converged = false;
  for (int it = 0; it < 60; ++it) {
    // Newton step on the strictly concave eigenspace; symmetric maximizers
    // (e.g. x0 free to slide along a circle factor) leave flat directions.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(m.hess);
    const double cut = 1e-8 * es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().maxCoeff() > cut) break;  // not locally concave: use the simplex
    Eigen::Matrix<double, 5, 1> step = Eigen::Matrix<double, 5, 1>::Zero();
    for (int e = 0; e < 5; ++e)
      if (es.eigenvalues()[e] < -cut)
        step -= es.eigenvectors().col(e) * (es.eigenvectors().col(e).dot(m.grad) / es.eigenvalues()[e]);
    double eta = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      BasePoint trial = b;
      trial.x0 += eta * step.head<4>();
      trial.t0 += eta * step[4];
      if (trial.t0 > rep.t_floor) {
        const LocalModel mt = local_model(points, w, trial);
        if (mt.value >= m.value - 1e-15 * std::abs(m.value)) {
          b = trial;
          m = mt;
          accepted = true;
          break;
        }
      }
      eta *= 0.5;
    }
    if (!accepted) break;
    const double size = std::sqrt(b.t0);
    if (eta * (step.head<4>().norm() / size + std::abs(step[4]) / b.t0) < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    const ScaleFrame frame{b.x0, std::sqrt(b.t0)};
    const SimplexProblem problem{&points, &w, frame, rep.t_floor};
    const SimplexResult r = refine_simplex(problem, b, 0.05, 0.05, opts);
    b = r.best;
    converged = r.converged;
    rep.n_restarts = 2;
  }
  rep.argmax = b;
  rep.lambda = gaussian_sum(points, w, b.x0, b.t0);
  rep.converged = converged;
  rep.resolved = b.t0 > rep.t_floor * (1.0 + 1e-6);
  return rep;
}

double energy(const TorusMap& u, const ConformalStructure& tau, Backend backend) {
  const ImmersionData d = derivatives(u, backend);
  const Eigen::Matrix2d gi = metric_g_tau(tau).inverse();
  const Field4 p = u.positions();
  double s = 0.0;
  for (int k = 0; k < d.grid.size(); ++k) {
    const double dens = gi(0, 0) * d.g11[k] + 2.0 * gi(0, 1) * d.g12[k] + gi(1, 1) * d.g22[k];
    s += std::exp(-p.col(k).squaredNorm() / 4.0) * dens;
  }
  return 0.5 * s * tau.tau2 * d.grid.cell_area();
}

double willmore(const TorusMap& u, Backend backend) {
  const ImmersionData d = fundamental_forms(u, backend);
  return 0.25 * integrate(d.mean_curvature.colwise().squaredNorm().transpose(), d);
}

double shrinker_residual(const ImmersionData& data, const Field4& points) {
  double m = 0.0;
  for (int k = 0; k < data.grid.size(); ++k) {
    const Vec4 r = data.mean_curvature.col(k) + 0.5 * data.normal(k, points.col(k));
    m = std::max(m, r.norm());
  }
  return m;
}

double shrinker_residual(const TorusMap& u, Backend backend) {
  return shrinker_residual(fundamental_forms(u, backend), u.positions());
}

double shrinker_tolerance(const ImmersionData& data, double factor) {
  const double h = std::max(data.grid.hx(), data.grid.hy());
  double hmax = 0.0;
  for (int k = 0; k < data.grid.size(); ++k) hmax = std::max(hmax, data.mean_curvature.col(k).norm());
  return factor * h * h * hmax;
}

double shrinker_tolerance(const TorusMap& u, Backend backend, double factor) {
  return shrinker_tolerance(fundamental_forms(u, backend), factor);
}

double drift_identity_residual(const TorusMap& u, Backend backend, double tol_factor) {
  const ImmersionData d = fundamental_forms(u, backend);
  const Field4 p = u.positions();
  const double res = shrinker_residual(d, p);
  const double tol = shrinker_tolerance(d, tol_factor);
  if (res > tol)
    fail(ErrorCode::PreconditionViolated,
         "drift identity requires a numerical shrinker (residual " + std::to_string(res) +
             " > tolerance " + std::to_string(tol) + ")");
  Differentiator diff(u.grid(), backend);
  const Scalar r2 = p.colwise().squaredNorm().transpose();
  const Scalar lap = laplace_beltrami(r2, d, diff);
  double m = 0.0;
  for (int k = 0; k < d.grid.size(); ++k) {
    const double perp2 = d.normal(k, p.col(k)).squaredNorm();
    m = std::max(m, std::abs(lap[k] + perp2 - 4.0));
  }
  return m;
}

}  // namespace lagshrink

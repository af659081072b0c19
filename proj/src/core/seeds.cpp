#include "seeds.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lagshrink {

namespace {

namespace odeint = boost::numeric::odeint;

// (x, y, phi, Gaussian length) along arclength.
using CurveState = std::array<double, 4>;

void curve_rhs(const CurveState& s, CurveState& ds, double /*arclength*/) {
  const double c = std::cos(s[2]), sn = std::sin(s[2]);
  ds[0] = c;
  ds[1] = sn;
  ds[2] = 0.5 * (s[0] * sn - s[1] * c);
  ds[3] = std::exp(-(s[0] * s[0] + s[1] * s[1]) / 4.0) / std::sqrt(4.0 * kPi);
}

double radial_speed(const CurveState& s) { return s[0] * std::cos(s[2]) + s[1] * std::sin(s[2]); }

struct HalfPeriod {
  double arclength;
  double angle;  // polar angle of the next extremum of |F|
  double gaussian_length;
};

// Integrates from (r0, 0) with vertical tangent to the next zero of <F, T>.
HalfPeriod half_period(double r0, double tol) {
  using Stepper = odeint::runge_kutta_fehlberg78<CurveState>;
  auto controlled = odeint::make_controlled<Stepper>(tol, tol);
  Stepper single;
  CurveState s{r0, 0.0, kPi / 2.0, 0.0};
  double t = 0.0, dt = 1e-3;
  const double s_max = 200.0;
  bool left_start = false;
  while (t < s_max) {
    CurveState prev = s;
    const double t_prev = t;
    if (controlled.try_step(curve_rhs, s, t, dt) != odeint::success) continue;
    const double g = radial_speed(s);
    if (!left_start) {
      if (g > 0.0) left_start = true;
      continue;
    }
    if (g <= 0.0) {
      // Bisect the crossing with single high-order steps from the previous state.
      double lo = 0.0, hi = t - t_prev;
      CurveState mid_state;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
        const double mid = 0.5 * (lo + hi);
        single.do_step(curve_rhs, prev, t_prev, mid_state, mid);
        if (radial_speed(mid_state) > 0.0) lo = mid;
        else hi = mid;
      }
      single.do_step(curve_rhs, prev, t_prev, mid_state, hi);
      return {t_prev + hi, std::atan2(mid_state[1], mid_state[0]), mid_state[3]};
    }
  }
  fail(ErrorCode::ShootingFailed, "shooting orbit did not return to an extremum of |F|");
}

}  // namespace

Eigen::Matrix2Xd ShrinkerCurve::sample(int n) const {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample count must be positive");
  Eigen::Matrix2Xd out(2, n);
  if (kind == Kind::Circle) {
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * kPi * k / n;
      out.col(k) << radius * std::cos(a), radius * std::sin(a);
    }
    return out;
  }
  std::vector<double> times(n);
  for (int k = 0; k < n; ++k) times[k] = length * k / n;
  CurveState s{radius, 0.0, kPi / 2.0, 0.0};
  int idx = 0;
  odeint::integrate_times(
      odeint::make_controlled<odeint::runge_kutta_fehlberg78<CurveState>>(1e-13, 1e-13), curve_rhs, s,
      times.begin(), times.end(), 1e-3, [&](const CurveState& st, double) {
        out.col(idx++) << st[0], st[1];
      });
  return out;
}

ShrinkerCurve circle_curve(double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "circle radius must be positive");
  ShrinkerCurve c;
  c.kind = ShrinkerCurve::Kind::Circle;
  c.radius = radius;
  c.length = 2.0 * kPi * radius;
  c.entropy_1d = c.length * std::exp(-radius * radius / 4.0) / std::sqrt(4.0 * kPi);
  return c;
}

ShrinkerCurve abresch_langer_curve(int p, int q, double tol) {
  if (p <= 0 || q <= 0) fail(ErrorCode::InvalidArgument, "p and q must be positive");
  if (std::gcd(p, q) != 1) fail(ErrorCode::InvalidArgument, "p and q must be coprime");
  if (p == 1 && q == 1) return circle_curve(std::sqrt(2.0));
  const double target = kPi * p / q;
  // The half-period angle increases from pi/2 (r0 -> 0) to pi/sqrt 2 (r0 -> sqrt 2).
  double lo = 0.05, hi = std::sqrt(2.0) - 1e-6;
  if (!(target > kPi / 2.0 && target < kPi / std::sqrt(2.0))) {
    std::ostringstream os;
    os << "no closed shrinking curve with p/q = " << p << "/" << q << " (need 1/2 < p/q < 1/sqrt 2)";
    fail(ErrorCode::ShootingFailed, os.str());
  }
  const double a_lo = half_period(lo, tol).angle, a_hi = half_period(hi, tol).angle;
  if (!(a_lo < target && target < a_hi)) fail(ErrorCode::ShootingFailed, "shooting bracket does not contain the target angle");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (half_period(mid, tol).angle < target) lo = mid;
    else hi = mid;
  }
  const double r0 = 0.5 * (lo + hi);
  const HalfPeriod hp = half_period(r0, tol);

  ShrinkerCurve c;
  c.kind = ShrinkerCurve::Kind::Shooting;
  c.p = p;
  c.q = q;
  c.radius = r0;
  c.length = 2.0 * q * hp.arclength;

  CurveState s{r0, 0.0, kPi / 2.0, 0.0};
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_fehlberg78<CurveState>>(tol, tol),
                             curve_rhs, s, 0.0, c.length, 1e-3);
  c.entropy_1d = s[3];
  c.closure_gap = std::hypot(s[0] - r0, s[1]);
  if (c.closure_gap > 1e-8 * c.length) {
    std::ostringstream os;
    os << "shooting orbit does not close: gap " << c.closure_gap;
    fail(ErrorCode::ShootingFailed, os.str());
  }
  return c;
}

TorusMap clifford_seed(const GridSpec& grid) {
  TorusMap u(grid);
  const double r = std::sqrt(2.0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double a = 2.0 * kPi * i * grid.hx(), b = 2.0 * kPi * j * grid.hy();
      u.values().col(grid.index(i, j)) << r * std::cos(a), r * std::sin(a), r * std::cos(b), r * std::sin(b);
    }
  return u;
}

TorusMap figure_eight_seed(const GridSpec& grid) {
  TorusMap u(grid);
  const double r = std::sqrt(2.0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double a = 2.0 * kPi * i * grid.hx(), b = 2.0 * kPi * j * grid.hy();
      u.values().col(grid.index(i, j)) << std::sin(a), std::sin(a) * std::cos(a), r * std::cos(b), r * std::sin(b);
    }
  return u;
}

std::pair<TorusMap, ConformalStructure> product_torus_seed(const ShrinkerCurve& c1, const ShrinkerCurve& c2,
                                                           const GridSpec& grid) {
  const Eigen::Matrix2Xd a = c1.sample(grid.nx), b = c2.sample(grid.ny);
  TorusMap u(grid);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      u.values().col(grid.index(i, j)) << a(0, i), a(1, i), b(0, j), b(1, j);
  return {u, ConformalStructure(0.0, c2.length / c1.length)};
}

}  // namespace lagshrink

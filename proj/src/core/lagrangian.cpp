#include "lagrangian.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace lagshrink {

OneForm OneForm::harmonic(const GridSpec& grid, double p, double q) {
  OneForm w;
  w.a = Scalar::Constant(grid.size(), p);
  w.b = Scalar::Constant(grid.size(), q);
  w.p = p;
  w.q = q;
  w.f = Scalar::Zero(grid.size());
  return w;
}

OneForm OneForm::exact(const Scalar& f, const Differentiator& diff) {
  OneForm w;
  w.a = diff.d1(f);
  w.b = diff.d2(f);
  w.f = f;
  return w;
}

OneForm OneForm::decompose(const Scalar& a, const Scalar& b, const Differentiator& diff) {
  OneForm w;
  w.a = a;
  w.b = b;
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  const double defect = w.closedness_defect(diff);
  if (defect > 1e-6 * scale) {
    std::ostringstream os;
    os << "1-form is not closed: max |d2 a - d1 b| = " << defect;
    fail(ErrorCode::NotClosed, os.str());
  }
  w.p = a.mean();
  w.q = b.mean();
  const Scalar div = diff.d1(Scalar(a.array() - w.p)) + diff.d2(Scalar(b.array() - w.q));
  w.f = diff.solve_poisson(div);
  return w;
}

OneForm OneForm::scaled(double c) const {
  OneForm w = *this;
  w.a *= c;
  w.b *= c;
  w.p *= c;
  w.q *= c;
  w.f *= c;
  return w;
}

double OneForm::closedness_defect(const Differentiator& diff) const {
  return (diff.d2(a) - diff.d1(b)).cwiseAbs().maxCoeff();
}

double AngleField::at(int i, int j) const {
  return periodic[grid.index(i, j)] + 2.0 * kPi * (w1 * i * grid.hx() + w2 * j * grid.hy());
}

double tol_lag(const GridSpec& grid, const LagrangianOptions& opts) {
  const double h = std::max(grid.hx(), grid.hy());
  return opts.tol_lag_factor * h * h;
}

double symplectic_residual(const ImmersionData& data) {
  double m = 0.0;
  for (int k = 0; k < data.grid.size(); ++k)
    m = std::max(m, std::abs(omega(data.d1.col(k), data.d2.col(k))) / data.area_element[k]);
  return m;
}

double symplectic_residual(const TorusMap& u, Backend backend) {
  return symplectic_residual(derivatives(u, backend));
}

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

void require_lagrangian(const ImmersionData& d, const LagrangianOptions& opts) {
  const double res = symplectic_residual(d);
  const double tol = tol_lag(d.grid, opts);
  if (res > tol) {
    std::ostringstream os;
    os << "map is not Lagrangian: symplectic residual " << res << " > " << tol;
    fail(ErrorCode::NotLagrangian, os.str());
  }
}

std::complex<double> complex_determinant(const Vec4& e1, const Vec4& e2) {
  const std::complex<double> a(e1[0], e1[1]), b(e1[2], e1[3]);
  const std::complex<double> c(e2[0], e2[1]), d(e2[2], e2[3]);
  return a * d - b * c;
}

}  // namespace

AngleField lagrangian_angle(const TorusMap& u, const LagrangianOptions& opts) {
  const ImmersionData d = derivatives(u, opts.backend);
  require_lagrangian(d, opts);
  const GridSpec& g = d.grid;
  Scalar raw(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double n1 = d.d1.col(k).norm();
    if (!(n1 > 0.0)) fail(ErrorCode::FrameDegenerate, "zero tangent vector in frame");
    const Vec4 e1 = d.d1.col(k) / n1;
    Vec4 e2 = d.d2.col(k) - e1.dot(d.d2.col(k)) * e1;
    const double n2 = e2.norm();
    if (!(n2 > 1e-12 * d.d2.col(k).norm())) fail(ErrorCode::FrameDegenerate, "tangent frame is degenerate");
    e2 /= n2;
    const std::complex<double> det = complex_determinant(e1, e2);
    if (std::abs(det) < 0.5) fail(ErrorCode::FrameDegenerate, "complex determinant of frame is not unimodular");
    raw[k] = std::arg(det);
  }

  // Unwrap along row 0 in x, then every column in y.
  Scalar un(g.size());
  un[0] = raw[0];
  for (int i = 1; i < g.nx; ++i)
    un[g.index(i, 0)] = un[g.index(i - 1, 0)] + wrap_angle(raw[g.index(i, 0)] - raw[g.index(i - 1, 0)]);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j)
      un[g.index(i, j)] = un[g.index(i, j - 1)] + wrap_angle(raw[g.index(i, j)] - raw[g.index(i, j - 1)]);

  const double close_x = un[g.index(g.nx - 1, 0)] + wrap_angle(raw[0] - raw[g.index(g.nx - 1, 0)]) - un[0];
  const double close_y = un[g.index(0, g.ny - 1)] + wrap_angle(raw[0] - raw[g.index(0, g.ny - 1)]) - un[0];
  AngleField out;
  out.grid = g;
  out.w1 = static_cast<int>(std::lround(close_x / (2.0 * kPi)));
  out.w2 = static_cast<int>(std::lround(close_y / (2.0 * kPi)));
  out.periodic.resize(g.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.periodic[g.index(i, j)] =
          un[g.index(i, j)] - 2.0 * kPi * (out.w1 * i * g.hx() + out.w2 * j * g.hy());

  // Every edge of the grid must agree with the unwrapped field; otherwise the
  // frame rotates too fast to resolve or the windings are inconsistent.
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double tx = out.at(i + 1, j) - out.at(i, j);
      const double ty = out.at(i, j + 1) - out.at(i, j);
      const int kx = g.index(i + 1, j), ky = g.index(i, j + 1), k = g.index(i, j);
      if (std::abs(tx - wrap_angle(raw[kx] - raw[k])) > 1e-8 ||
          std::abs(ty - wrap_angle(raw[ky] - raw[k])) > 1e-8)
        fail(ErrorCode::FrameDegenerate, "Lagrangian angle is inconsistent across grid edges");
    }
  return out;
}

std::pair<Scalar, Scalar> mean_curvature_form(const ImmersionData& data) {
  if (!data.has_second_order) fail(ErrorCode::InvalidArgument, "mean curvature form needs second-order data");
  Scalar h1(data.grid.size()), h2(data.grid.size());
  for (int k = 0; k < data.grid.size(); ++k) {
    const Vec4 hv = data.mean_curvature.col(k);
    h1[k] = hv.dot(apply_j(data.d1.col(k)));
    h2[k] = hv.dot(apply_j(data.d2.col(k)));
  }
  return {h1, h2};
}

MaslovResult maslov_numbers(const TorusMap& u, const LagrangianOptions& opts) {
  const ImmersionData d = fundamental_forms(u, opts.backend);
  require_lagrangian(d, opts);
  const auto [h1, h2] = mean_curvature_form(d);
  const GridSpec& g = d.grid;
  // Periods along x-cycles (one per row) and y-cycles (one per column), averaged.
  MaslovResult r;
  r.period1 = h1.sum() * g.hx() / g.ny;
  r.period2 = h2.sum() * g.hy() / g.nx;
  const double q1 = r.period1 / kPi, q2 = r.period2 / kPi;
  r.m1 = static_cast<int>(std::lround(q1));
  r.m2 = static_cast<int>(std::lround(q2));
  r.rounding_error = std::max(std::abs(q1 - r.m1), std::abs(q2 - r.m2));
  if (r.rounding_error >= 0.1) {
    std::ostringstream os;
    os << "Maslov periods are not integral: " << q1 << ", " << q2;
    fail(ErrorCode::NonIntegerPeriod, os.str());
  }
  return r;
}

namespace {

Field4 sharp_then_j(const ImmersionData& d, const Scalar& a, const Scalar& b) {
  Field4 x(4, d.grid.size());
  for (int k = 0; k < d.grid.size(); ++k) {
    const double c1 = d.gi11[k] * a[k] + d.gi12[k] * b[k];
    const double c2 = d.gi12[k] * a[k] + d.gi22[k] * b[k];
    x.col(k) = apply_j(c1 * d.d1.col(k) + c2 * d.d2.col(k));
  }
  return x;
}

}  // namespace

Field4 one_form_to_variation(const TorusMap& u, const OneForm& alpha, const LagrangianOptions& opts) {
  const ImmersionData d = derivatives(u, opts.backend);
  require_lagrangian(d, opts);
  if (alpha.a.size() != d.grid.size() || alpha.b.size() != d.grid.size())
    fail(ErrorCode::InvalidArgument, "1-form does not match the grid");
  Differentiator diff(d.grid, opts.backend);
  const double scale = std::max({1.0, alpha.a.cwiseAbs().maxCoeff(), alpha.b.cwiseAbs().maxCoeff()});
  if (alpha.closedness_defect(diff) > 1e-6 * scale) fail(ErrorCode::NotClosed, "1-form is not closed");
  return sharp_then_j(d, alpha.a, alpha.b);
}

TorusMap lagrangian_project(const TorusMap& u, const LagrangianOptions& opts, double* residual) {
  Differentiator diff(u.grid(), opts.backend);
  TorusMap v = u;
  for (int sweep = 0; sweep < opts.k_proj; ++sweep) {
    const ImmersionData d = derivatives(v, opts.backend);
    Scalar rho(d.grid.size());
    for (int k = 0; k < d.grid.size(); ++k) rho[k] = omega(d.d1.col(k), d.d2.col(k));
    // A variation J beta^sharp changes the pulled-back form by -d beta; with
    // beta = *dpsi and Lap psi = rho this cancels rho to first order.
    const Scalar psi = diff.solve_poisson(rho);
    const Scalar beta1 = -diff.d2(psi), beta2 = diff.d1(psi);
    v.values() += opts.damping * sharp_then_j(d, beta1, beta2);
  }
  if (residual) *residual = symplectic_residual(v, opts.backend);
  return v;
}

TorusMap lagrangian_perturb(const TorusMap& u, const OneForm& alpha, double s, const LagrangianOptions& opts) {
  if (!std::isfinite(s)) fail(ErrorCode::InvalidArgument, "perturbation amplitude must be finite");
  if (s == 0.0) return u;
  const Field4 x = one_form_to_variation(u, alpha, opts);
  const double disp = std::abs(s) * x.colwise().norm().maxCoeff();
  const double bound = 0.1 * injectivity_scale(u);
  if (disp > bound) {
    std::ostringstream os;
    os << "perturbation too large: |s| max|X| = " << disp << " exceeds " << bound;
    fail(ErrorCode::PreconditionViolated, os.str());
  }
  TorusMap v = u;
  v.values() += s * x;
  const double before = symplectic_residual(v, opts.backend);
  double after = 0.0;
  v = lagrangian_project(v, opts, &after);
  const double tol = std::max(tol_lag(u.grid(), opts), 10.0 * u.grid().hx() * u.grid().hy());
  if (after > tol) {
    std::ostringstream os;
    os << "Lagrangian projection did not reach tolerance: residual " << after << " > " << tol
       << " (before projection " << before << ")";
    fail(ErrorCode::ProjectionDiverged, os.str());
  }
  return v;
}

}  // namespace lagshrink

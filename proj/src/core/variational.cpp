#include "variational.hpp"

#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lagshrink {

VariationPair& VariationPair::operator+=(const VariationPair& o) {
  phi += o.phi;
  nu += o.nu;
  return *this;
}

VariationPair& VariationPair::operator*=(double c) {
  phi *= c;
  nu *= c;
  return *this;
}

VariationPair operator+(VariationPair a, const VariationPair& b) { return a += b; }
VariationPair operator-(VariationPair a, const VariationPair& b) { return a += (-1.0) * b; }
VariationPair operator*(double c, VariationPair a) { return a *= c; }

namespace {

struct Sym2 {
  double c11 = 0, c12 = 0, c22 = 0;
};

// a = tau2 g_tau^-1 and its first and second tau-derivatives.
struct TauCoefficients {
  Sym2 a;
  Sym2 da[2];
  Sym2 dda[2][2];
};

TauCoefficients tau_coefficients(const ConformalStructure& tau) {
  const double t1 = tau.tau1, t2 = tau.tau2;
  TauCoefficients c;
  c.a = {(t1 * t1 + t2 * t2) / t2, -t1 / t2, 1.0 / t2};
  c.da[0] = {2.0 * t1 / t2, -1.0 / t2, 0.0};
  c.da[1] = {1.0 - t1 * t1 / (t2 * t2), t1 / (t2 * t2), -1.0 / (t2 * t2)};
  c.dda[0][0] = {2.0 / t2, 0.0, 0.0};
  c.dda[0][1] = c.dda[1][0] = {-2.0 * t1 / (t2 * t2), 1.0 / (t2 * t2), 0.0};
  const double t23 = t2 * t2 * t2;
  c.dda[1][1] = {2.0 * t1 * t1 / t23, -2.0 * t1 / t23, 2.0 / t23};
  return c;
}

// First derivatives and weight at a map, without the nondegeneracy check.
struct Jet {
  GridSpec grid;
  Field4 pos, d1, d2;
  Scalar w;
};

Jet make_jet(const TorusMap& u, const Differentiator& diff) {
  u.validate_finite();
  Jet j;
  j.grid = u.grid();
  j.pos = u.positions();
  j.d1 = diff.d1(u.values());
  j.d2 = diff.d2(u.values());
  if (u.has_lift()) {
    j.d1.colwise() += u.lift().col(0);
    j.d2.colwise() += u.lift().col(1);
  }
  j.w = (-0.25 * j.pos.colwise().squaredNorm().array()).exp().transpose();
  return j;
}

// c11 A1.B1 + c12 (A1.B2 + A2.B1) + c22 A2.B2 per node
Scalar quad(const Sym2& c, const Field4& a1, const Field4& a2, const Field4& b1, const Field4& b2) {
  const Eigen::ArrayXd p11 = (a1.array() * b1.array()).colwise().sum().transpose();
  const Eigen::ArrayXd p12 = (a1.array() * b2.array()).colwise().sum().transpose();
  const Eigen::ArrayXd p21 = (a2.array() * b1.array()).colwise().sum().transpose();
  const Eigen::ArrayXd p22 = (a2.array() * b2.array()).colwise().sum().transpose();
  return (c.c11 * p11 + c.c12 * (p12 + p21) + c.c22 * p22).matrix();
}

// c^ij D_j (s D_i U), with U1 = D1 U and U2 = D2 U
Field4 flux_div(const Sym2& c, const Scalar& s, const Field4& u1, const Field4& u2, const Differentiator& diff) {
  const Field4 f1 = (c.c11 * u1 + c.c12 * u2) * s.asDiagonal();
  const Field4 f2 = (c.c12 * u1 + c.c22 * u2) * s.asDiagonal();
  return diff.d1(f1) + diff.d2(f2);
}

// Euclidean gradient of (1/2) sum w c^ij D_iu.D_ju hx hy with respect to the node values.
Field4 euclidean_gradient(const Jet& j, const Sym2& c, const Differentiator& diff) {
  const Scalar q = quad(c, j.d1, j.d2, j.d1, j.d2);
  Field4 g = -0.25 * j.pos * (j.w.cwiseProduct(q)).asDiagonal();
  g -= flux_div(c, j.w, j.d1, j.d2, diff);
  return g * j.grid.cell_area();
}

double tau_derivative(const Jet& j, const Sym2& c) {
  return 0.5 * j.w.dot(quad(c, j.d1, j.d2, j.d1, j.d2)) * j.grid.cell_area();
}

Scalar node_weights(const Jet& j, const ConformalStructure& tau) {
  return j.w * (tau.tau2 * j.grid.cell_area());
}

VariationPair hessian_euclidean(const Jet& j, const TauCoefficients& tc, const VariationPair& p,
                                const Differentiator& diff) {
  const double h2 = j.grid.cell_area();
  const Field4 p1 = diff.d1(p.phi), p2 = diff.d2(p.phi);
  const Scalar s = (j.pos.array() * p.phi.array()).colwise().sum().transpose().matrix();
  const Scalar dw = -0.5 * s.cwiseProduct(j.w);
  const Scalar q = quad(tc.a, j.d1, j.d2, j.d1, j.d2);
  const Scalar dq = 2.0 * quad(tc.a, j.d1, j.d2, p1, p2);
  // d(w Q u) = dw Q u + w dQ u + w Q phi
  const Field4 dwqu = j.pos * (dw.cwiseProduct(q) + j.w.cwiseProduct(dq)).asDiagonal() +
                      p.phi * j.w.cwiseProduct(q).asDiagonal();
  VariationPair out;
  out.phi = -0.25 * dwqu - flux_div(tc.a, dw, j.d1, j.d2, diff) - flux_div(tc.a, j.w, p1, p2, diff);
  out.phi *= h2;
  for (int k = 0; k < 2; ++k) {
    const Field4 ck = euclidean_gradient(j, tc.da[k], diff);
    out.phi += p.nu[k] * ck;
    out.nu[k] = (ck.array() * p.phi.array()).sum();
    for (int l = 0; l < 2; ++l) out.nu[k] += tau_derivative(j, tc.dda[k][l]) * p.nu[l];
  }
  return out;
}

Eigen::VectorXd flatten_pair(const VariationPair& p) {
  Eigen::VectorXd v(p.phi.size() + 2);
  v.head(p.phi.size()) = Eigen::Map<const Eigen::VectorXd>(p.phi.data(), p.phi.size());
  v.tail<2>() = p.nu;
  return v;
}

VariationPair unflatten_pair(const Eigen::VectorXd& v, int nodes) {
  VariationPair p;
  p.phi = Eigen::Map<const Field4>(v.data(), 4, nodes);
  p.nu = v.tail<2>();
  return p;
}

Eigen::VectorXd flat_weights(const Jet& j, const ConformalStructure& tau) {
  const Scalar w = node_weights(j, tau);
  Eigen::VectorXd out(4 * w.size() + 2);
  for (int k = 0; k < w.size(); ++k) out.segment<4>(4 * k).setConstant(w[k]);
  out.tail<2>().setOnes();
  return out;
}

TorusMap moved(const TorusMap& u, const Field4& phi, double s) {
  TorusMap v = u;
  v.values() += s * phi;
  return v;
}

}  // namespace

double weighted_inner(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p1,
                      const VariationPair& p2) {
  if (p1.phi.cols() != u.grid().size() || p2.phi.cols() != u.grid().size())
    fail(ErrorCode::InvalidArgument, "variation does not match the grid");
  const Field4 pos = u.positions();
  double s = 0.0;
  for (int k = 0; k < u.grid().size(); ++k)
    s += std::exp(-0.25 * pos.col(k).squaredNorm()) * p1.phi.col(k).dot(p2.phi.col(k));
  return s * tau.tau2 * u.grid().cell_area() + p1.nu.dot(p2.nu);
}

double weighted_norm(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p) {
  return std::sqrt(std::max(0.0, weighted_inner(u, tau, p, p)));
}

double discrete_energy(const TorusMap& u, const ConformalStructure& tau, Backend backend) {
  Differentiator diff(u.grid(), backend);
  const Jet j = make_jet(u, diff);
  return tau_derivative(j, tau_coefficients(tau).a);
}

VariationPair gradient_M(const TorusMap& u, const ConformalStructure& tau, Backend backend) {
  Differentiator diff(u.grid(), backend);
  const Jet j = make_jet(u, diff);
  const TauCoefficients tc = tau_coefficients(tau);
  VariationPair m;
  m.phi = euclidean_gradient(j, tc.a, diff) * node_weights(j, tau).cwiseInverse().asDiagonal();
  for (int k = 0; k < 2; ++k) m.nu[k] = tau_derivative(j, tc.da[k]);
  return m;
}

Field4 B_map(const TorusMap& u, const ConformalStructure& sigma, Backend backend) {
  Differentiator diff(u.grid(), backend);
  const Jet j = make_jet(u, diff);
  const Eigen::Matrix2d gi = metric_g_tau(sigma).inverse();
  const Sym2 c{gi(0, 0), gi(0, 1), gi(1, 1)};
  const Scalar q = quad(c, j.d1, j.d2, j.d1, j.d2);
  return -(flux_div(c, j.w, j.d1, j.d2, diff) * j.w.cwiseInverse().asDiagonal()) -
         0.25 * j.pos * q.asDiagonal();
}

VariationPair hessian_apply(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p,
                            Backend backend) {
  if (p.phi.cols() != u.grid().size()) fail(ErrorCode::InvalidArgument, "variation does not match the grid");
  if (!p.phi.allFinite() || !p.nu.allFinite()) fail(ErrorCode::InvalidArgument, "variation is not finite");
  Differentiator diff(u.grid(), backend);
  const Jet j = make_jet(u, diff);
  VariationPair h = hessian_euclidean(j, tau_coefficients(tau), p, diff);
  h.phi = h.phi * node_weights(j, tau).cwiseInverse().asDiagonal();
  return h;
}

VariationPair operator_L_apply(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p,
                               double tol_crit, Backend backend) {
  const double g = weighted_norm(u, tau, gradient_M(u, tau, backend));
  if (g > tol_crit) {
    std::ostringstream os;
    os << "operator L is defined at critical points only: |M| = " << g << " > " << tol_crit;
    fail(ErrorCode::NotCritical, os.str());
  }
  return hessian_apply(u, tau, p, backend);
}

std::vector<VariationPair> symmetry_generators(const TorusMap& u, Backend backend) {
  const Field4 pos = u.positions();
  std::vector<VariationPair> gens;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      VariationPair g = VariationPair::zero(u.grid());
      g.phi.row(a) = pos.row(b);
      g.phi.row(b) = -pos.row(a);
      gens.push_back(g);
    }
  Differentiator diff(u.grid(), backend);
  const Jet j = make_jet(u, diff);
  gens.push_back({j.d1, Eigen::Vector2d::Zero()});
  gens.push_back({j.d2, Eigen::Vector2d::Zero()});
  return gens;
}

// ---------------------------------------------------------------------------

namespace {

// MINRES for the symmetric system A x = b, preconditioned by the diagonal
// inverse weights, so the residual is minimized in the weighted norm.
template <typename Apply>
Eigen::VectorXd minres(Apply apply, const Eigen::VectorXd& b, const Eigen::VectorXd& minv, double rtol,
                       int max_iter, double* rel_residual) {
  const int n = static_cast<int>(b.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r1 = b, y = minv.cwiseProduct(b);
  const double beta1 = std::sqrt(std::max(0.0, r1.dot(y)));
  if (rel_residual) *rel_residual = 0.0;
  if (beta1 == 0.0) return x;
  Eigen::VectorXd r2 = r1, w = Eigen::VectorXd::Zero(n), w1, w2 = Eigen::VectorXd::Zero(n), v;
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  for (int itn = 1; itn <= max_iter; ++itn) {
    v = y / beta;
    y = apply(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = minv.cwiseProduct(r2);
    oldb = beta;
    beta = std::sqrt(std::max(0.0, r2.dot(y)));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::epsilon());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;
    if (phibar <= rtol * beta1 || beta == 0.0) break;
  }
  if (rel_residual) *rel_residual = phibar / beta1;
  return x;
}

}  // namespace

CriticalPoint find_critical_point(const TorusMap& u0, const ConformalStructure& tau0, const CriticalOptions& opts) {
  Differentiator diff(u0.grid(), opts.backend);
  derivatives(u0, opts.backend);  // rejects degenerate input
  CriticalPoint cp{u0, tau0, 0.0, 0.0, 0};
  VariationPair m = gradient_M(cp.u, cp.tau, opts.backend);
  double norm = weighted_norm(cp.u, cp.tau, m);
  while (norm > opts.tol_crit) {
    if (cp.iterations >= opts.max_iter) {
      std::ostringstream os;
      os << "critical point search stopped after " << cp.iterations << " Newton steps, |M| = " << norm;
      fail(ErrorCode::MaxIterations, os.str());
    }
    ++cp.iterations;
    const Jet j = make_jet(cp.u, diff);
    const TauCoefficients tc = tau_coefficients(cp.tau);
    const Eigen::VectorXd wts = flat_weights(j, cp.tau);
    const int nodes = cp.u.grid().size();
    Eigen::VectorXd rhs = -flatten_pair(m);
    rhs.head(4 * nodes) = rhs.head(4 * nodes).cwiseProduct(wts.head(4 * nodes));
    auto apply = [&](const Eigen::VectorXd& v) {
      return flatten_pair(hessian_euclidean(j, tc, unflatten_pair(v, nodes), diff));
    };
    const double forcing = std::clamp(norm, 1e-10, 1e-1);
    const VariationPair step =
        unflatten_pair(minres(apply, rhs, wts.cwiseInverse(), forcing, opts.max_minres, nullptr), nodes);

    double alpha = 1.0;
    if (cp.tau.tau2 + step.nu[1] < opts.tau2_min)
      alpha = 0.5 * (cp.tau.tau2 - opts.tau2_min) / std::max(-step.nu[1], 1e-300);
    bool accepted = false;
    for (int ls = 0; ls < 40 && !accepted; ++ls, alpha *= 0.5) {
      try {
        TorusMap trial = moved(cp.u, step.phi, alpha);
        const ConformalStructure tt(cp.tau.tau1 + alpha * step.nu[0], cp.tau.tau2 + alpha * step.nu[1]);
        derivatives(trial, opts.backend);
        const VariationPair mt = gradient_M(trial, tt, opts.backend);
        const double nt = weighted_norm(trial, tt, mt);
        if (nt < (1.0 - 1e-4 * alpha) * norm) {
          cp.u = std::move(trial);
          cp.tau = tt;
          m = mt;
          norm = nt;
          accepted = true;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateMetric && e.code() != ErrorCode::InvalidArgument) throw;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "critical point search: no step reduces |M| = " << norm;
      fail(ErrorCode::MaxIterations, os.str());
    }
  }
  cp.grad_norm = norm;
  cp.energy = discrete_energy(cp.u, cp.tau, opts.backend);
  return cp;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd AssembledOperator::L() const { return weights.cwiseInverse().asDiagonal() * hessian; }

Eigen::VectorXd AssembledOperator::flatten(const VariationPair& p) const { return flatten_pair(p); }

VariationPair AssembledOperator::unflatten(const Eigen::VectorXd& v) const {
  return unflatten_pair(v, u.grid().size());
}

AssembledOperator assemble_L(const TorusMap& u, const ConformalStructure& tau, int n, const CriticalOptions& opts) {
  if (n > kMaxAssemblyGrid) {
    std::ostringstream os;
    os << "dense assembly limited to n <= " << kMaxAssemblyGrid << " (requested " << n << ")";
    fail(ErrorCode::MemoryGuard, os.str());
  }
  const GridSpec coarse(n, n);
  TorusMap start;
  if (u.grid() == coarse) {
    start = u;
  } else if (u.grid().nx % n == 0 && u.grid().ny % n == 0) {
    if (u.has_lift()) fail(ErrorCode::InvalidArgument, "cannot subsample a lifted map");
    const int sx = u.grid().nx / n, sy = u.grid().ny / n;
    start = TorusMap(coarse);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) start.values().col(coarse.index(i, j)) = u.values().col(u.grid().index(i * sx, j * sy));
  } else {
    fail(ErrorCode::InvalidArgument, "assembly grid must divide the map's grid");
  }
  const CriticalPoint cp = find_critical_point(start, tau, opts);

  AssembledOperator op;
  op.u = cp.u;
  op.tau = cp.tau;
  Differentiator diff(coarse, opts.backend);
  const Jet j = make_jet(op.u, diff);
  const TauCoefficients tc = tau_coefficients(op.tau);
  const int dim = 4 * coarse.size() + 2;
  op.weights = flat_weights(j, op.tau);
  op.hessian.resize(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  for (int c = 0; c < dim; ++c) {
    e[c] = 1.0;
    op.hessian.col(c) = flatten_pair(hessian_euclidean(j, tc, unflatten_pair(e, coarse.size()), diff));
    e[c] = 0.0;
  }
  return op;
}

Spectrum spectrum(const AssembledOperator& op) {
  const Eigen::VectorXd s = op.weights.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd sym = s.asDiagonal() * op.hessian * s.asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) fail(ErrorCode::MaxIterations, "eigensolver did not converge");
  return {es.eigenvalues(), s.asDiagonal() * es.eigenvectors()};
}

// ---------------------------------------------------------------------------

double holder_proxy_norm(const VariationPair& p, const GridSpec& grid) {
  double sup = 0.0, quot = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int k = grid.index(i, j);
      sup = std::max(sup, p.phi.col(k).norm());
      quot = std::max(quot, (p.phi.col(grid.index(i + 1, j)) - p.phi.col(k)).norm() / grid.hx());
      quot = std::max(quot, (p.phi.col(grid.index(i, j + 1)) - p.phi.col(k)).norm() / grid.hy());
    }
  return sup + quot + p.nu.norm();
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

}  // namespace

LojasiewiczFit lojasiewicz_fit(const CriticalPoint& cp, const LojasiewiczOptions& opts) {
  const GridSpec& grid = cp.u.grid();
  const double e_c = discrete_energy(cp.u, cp.tau, opts.backend);

  // Weighted-orthonormal basis of the symmetry generators.
  std::vector<VariationPair> basis;
  for (const VariationPair& g : symmetry_generators(cp.u, opts.backend)) {
    VariationPair r = g;
    const double n0 = weighted_norm(cp.u, cp.tau, g);
    for (const VariationPair& b : basis) r = r - weighted_inner(cp.u, cp.tau, r, b) * b;
    const double n1 = weighted_norm(cp.u, cp.tau, r);
    if (n1 > 1e-8 * n0) basis.push_back((1.0 / n1) * r);
  }

  LojasiewiczFit fit;
  std::vector<double> slopes, sigmas;
  for (int d = 0; d < opts.directions; ++d) {
    CounterRng rng(opts.seed, 1000 + static_cast<std::uint64_t>(d));
    VariationPair dir = VariationPair::zero(grid);
    for (int a = 0; a < 4; ++a) dir.phi.row(a) = random_bandlimited(grid, opts.band, rng).transpose();
    dir.nu << rng.normal(), rng.normal();
    for (int pass = 0; pass < 2; ++pass)
      for (const VariationPair& b : basis) dir = dir - weighted_inner(cp.u, cp.tau, dir, b) * b;
    dir *= 1.0 / weighted_norm(cp.u, cp.tau, dir);
    for (const VariationPair& b : basis)
      fit.kernel_leak = std::max(fit.kernel_leak, std::abs(weighted_inner(cp.u, cp.tau, dir, b)));

    std::vector<double> lg, le;
    for (int m = 0; m < opts.eps_count; ++m) {
      const double eps = opts.eps_min * std::pow(opts.eps_max / opts.eps_min,
                                                 opts.eps_count == 1 ? 0.0 : double(m) / (opts.eps_count - 1));
      const ConformalStructure tt(cp.tau.tau1 + eps * dir.nu[0], cp.tau.tau2 + eps * dir.nu[1]);
      const TorusMap um = moved(cp.u, dir.phi, eps);
      LojasiewiczSample s;
      s.direction = d;
      s.eps = eps;
      s.energy_gap = std::abs(discrete_energy(um, tt, opts.backend) - e_c);
      s.grad_norm = holder_proxy_norm(gradient_M(um, tt, opts.backend), grid);
      fit.samples.push_back(s);
      if (s.energy_gap > 0.0 && s.grad_norm > 0.0) {
        lg.push_back(std::log(s.grad_norm));
        le.push_back(std::log(s.energy_gap));
      }
    }
    if (lg.size() >= 3) {
      slopes.push_back(fit_slope(lg, le));
      sigmas.push_back(fit_slope(le, lg));
    }
  }
  fit.n_samples = static_cast<int>(fit.samples.size());
  if (fit.n_samples < 200 || slopes.size() < 2) {
    std::ostringstream os;
    os << "Lojasiewicz fit needs at least 200 samples over 2 directions, got " << fit.n_samples;
    fail(ErrorCode::InsufficientSamples, os.str());
  }
  fit.slope_mean = 0.0;
  fit.slope_min = slopes[0];
  fit.slope_max = slopes[0];
  for (double s : slopes) {
    fit.slope_mean += s / slopes.size();
    fit.slope_min = std::min(fit.slope_min, s);
    fit.slope_max = std::max(fit.slope_max, s);
  }
  // |E - E_c| ~ |M|^s along a direction; |E - E_c|^(1 - theta) <= C |M| near the
  // critical point needs theta <= 1 - 1/s.
  double sigma_max = 0.0;
  for (double s : sigmas) sigma_max = std::max(sigma_max, s);
  fit.theta = std::min(0.5, 1.0 - sigma_max);

  // The constant is fitted on even directions and checked on all samples.
  double ratio = 0.0;
  for (const auto& s : fit.samples)
    if (s.direction % 2 == 0 && s.grad_norm > 0.0)
      ratio = std::max(ratio, std::pow(s.energy_gap, 1.0 - fit.theta) / s.grad_norm);
  fit.C2 = opts.constant_margin * ratio;
  fit.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& s : fit.samples)
    fit.max_violation = std::max(fit.max_violation, std::pow(s.energy_gap, 1.0 - fit.theta) - fit.C2 * s.grad_norm);
  return fit;
}

}  // namespace lagshrink

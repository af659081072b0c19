#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lagshrink {

Vec4 ImmersionData::tangential(int k, const Vec4& v) const {
  const double c1 = d1.col(k).dot(v), c2 = d2.col(k).dot(v);
  const double a = gi11[k] * c1 + gi12[k] * c2;
  const double b = gi12[k] * c1 + gi22[k] * c2;
  return a * d1.col(k) + b * d2.col(k);
}

Eigen::Matrix4d ImmersionData::tangential_projector(int k) const {
  const Vec4 e1 = d1.col(k), e2 = d2.col(k);
  return gi11[k] * e1 * e1.transpose() + gi12[k] * (e1 * e2.transpose() + e2 * e1.transpose()) +
         gi22[k] * e2 * e2.transpose();
}

double ImmersionData::second_fundamental_form_sq(int k) const {
  // |A|^2 = g^ij g^kl <A_ik, A_jl> expanded over the symmetric components.
  const Vec4 a11k = a11.col(k), a12k = a12.col(k), a22k = a22.col(k);
  const double p = gi11[k], q = gi12[k], r = gi22[k];
  // B = g^-1 A as a 2x2 matrix of vectors; |A|^2 = tr(B B) with metric contraction.
  const Vec4 b11 = p * a11k + q * a12k, b12 = p * a12k + q * a22k;
  const Vec4 b21 = q * a11k + r * a12k, b22 = q * a12k + r * a22k;
  // sum_{i,l} <B^i_l, B^l_i>
  return b11.dot(b11) + 2.0 * b12.dot(b21) + b22.dot(b22);
}

double ImmersionData::max_second_fundamental_form_sq() const {
  double m = 0.0;
  for (int k = 0; k < grid.size(); ++k) m = std::max(m, second_fundamental_form_sq(k));
  return m;
}

namespace {

void fill_metric(ImmersionData& d) {
  const int n = d.grid.size();
  d.g11.resize(n);
  d.g12.resize(n);
  d.g22.resize(n);
  d.gi11.resize(n);
  d.gi12.resize(n);
  d.gi22.resize(n);
  d.area_element.resize(n);
  Scalar det(n);
  for (int k = 0; k < n; ++k) {
    d.g11[k] = d.d1.col(k).squaredNorm();
    d.g12[k] = d.d1.col(k).dot(d.d2.col(k));
    d.g22[k] = d.d2.col(k).squaredNorm();
    det[k] = d.g11[k] * d.g22[k] - d.g12[k] * d.g12[k];
  }
  const double threshold = kDegenerateRelative * std::max(det.mean(), 0.0);
  for (int k = 0; k < n; ++k) {
    if (!(det[k] > threshold) || !(det[k] > 0.0)) {
      std::ostringstream os;
      os << "degenerate induced metric at node (" << k % d.grid.nx << ", " << k / d.grid.nx
         << "): det g = " << det[k];
      fail(ErrorCode::DegenerateMetric, os.str());
    }
    d.gi11[k] = d.g22[k] / det[k];
    d.gi12[k] = -d.g12[k] / det[k];
    d.gi22[k] = d.g11[k] / det[k];
    d.area_element[k] = std::sqrt(det[k]);
  }
}

}  // namespace

ImmersionData derivatives(const TorusMap& u, Backend backend) {
  u.validate_finite();
  Differentiator diff(u.grid(), backend);
  ImmersionData d;
  d.grid = u.grid();
  d.d1 = diff.d1(u.values());
  d.d2 = diff.d2(u.values());
  if (u.has_lift()) {
    d.d1.colwise() += u.lift().col(0);
    d.d2.colwise() += u.lift().col(1);
  }
  fill_metric(d);
  return d;
}

ImmersionData fundamental_forms(const TorusMap& u, Backend backend) {
  ImmersionData d = derivatives(u, backend);
  Differentiator diff(u.grid(), backend);
  const Field4 u11 = diff.d1(d.d1);
  const Field4 u12 = diff.d1(d.d2);
  const Field4 u22 = diff.d2(d.d2);
  const int n = d.grid.size();
  d.a11.resize(4, n);
  d.a12.resize(4, n);
  d.a22.resize(4, n);
  d.mean_curvature.resize(4, n);
  for (int k = 0; k < n; ++k) {
    d.a11.col(k) = d.normal(k, u11.col(k));
    d.a12.col(k) = d.normal(k, u12.col(k));
    d.a22.col(k) = d.normal(k, u22.col(k));
    d.mean_curvature.col(k) =
        d.gi11[k] * d.a11.col(k) + 2.0 * d.gi12[k] * d.a12.col(k) + d.gi22[k] * d.a22.col(k);
  }
  d.has_second_order = true;
  return d;
}

double area(const ImmersionData& data) { return data.area_element.sum() * data.grid.cell_area(); }

double area(const TorusMap& u, Backend backend) { return area(derivatives(u, backend)); }

double min_distance_to_origin(const TorusMap& u) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < u.grid().size(); ++k) m = std::min(m, u.position(k).norm());
  return m;
}

Scalar laplace_beltrami(const Scalar& f, const ImmersionData& data, const Differentiator& diff) {
  const Scalar f1 = diff.d1(f), f2 = diff.d2(f);
  const Scalar& s = data.area_element;
  const Scalar flux1 = s.cwiseProduct(data.gi11.cwiseProduct(f1) + data.gi12.cwiseProduct(f2));
  const Scalar flux2 = s.cwiseProduct(data.gi12.cwiseProduct(f1) + data.gi22.cwiseProduct(f2));
  return (diff.d1(flux1) + diff.d2(flux2)).cwiseQuotient(s);
}

double integrate(const Scalar& f, const ImmersionData& data) {
  return f.dot(data.area_element) * data.grid.cell_area();
}

double injectivity_scale(const TorusMap& u) {
  const GridSpec& g = u.grid();
  const Field4 p = u.positions();
  // Subsample large grids; the estimate only needs to resolve sheet separation.
  const int stride_x = std::max(1, g.nx / 64), stride_y = std::max(1, g.ny / 64);
  const int qx = g.nx / 4, qy = g.ny / 4;
  double best = std::numeric_limits<double>::infinity();
  for (int j1 = 0; j1 < g.ny; j1 += stride_y)
    for (int i1 = 0; i1 < g.nx; i1 += stride_x) {
      const int k1 = g.index(i1, j1);
      for (int j2 = 0; j2 < g.ny; j2 += stride_y)
        for (int i2 = 0; i2 < g.nx; i2 += stride_x) {
          const int di = std::min(std::abs(i1 - i2), g.nx - std::abs(i1 - i2));
          const int dj = std::min(std::abs(j1 - j2), g.ny - std::abs(j1 - j2));
          if (di < qx && dj < qy) continue;
          const double dist = (p.col(k1) - p.col(g.index(i2, j2))).norm();
          best = std::min(best, dist);
        }
    }
  return best;
}

double min_nodal_spacing(const ImmersionData& data) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < data.grid.size(); ++k) {
    m = std::min(m, data.d1.col(k).norm() * data.grid.hx());
    m = std::min(m, data.d2.col(k).norm() * data.grid.hy());
  }
  return m;
}

double max_nodal_spacing(const ImmersionData& data) {
  double m = 0.0;
  for (int k = 0; k < data.grid.size(); ++k) {
    m = std::max(m, data.d1.col(k).norm() * data.grid.hx());
    m = std::max(m, data.d2.col(k).norm() * data.grid.hy());
  }
  return m;
}

}  // namespace lagshrink

#pragma once

#include "grid.hpp"

namespace lagshrink {

// Pointwise differential geometry of the immersion u: T^2 -> R^4 on its grid.
struct ImmersionData {
  GridSpec grid;
  Field4 d1, d2;             // D_1 u, D_2 u
  Scalar g11, g12, g22;      // induced metric
  Scalar gi11, gi12, gi22;   // inverse metric
  Scalar area_element;       // sqrt(det g)
  bool has_second_order = false;
  Field4 a11, a12, a22;      // (D_ij u)^perp
  Field4 mean_curvature;     // H = g^ij A_ij

  Vec4 tangential(int k, const Vec4& v) const;
  Vec4 normal(int k, const Vec4& v) const { return v - tangential(k, v); }
  Eigen::Matrix4d tangential_projector(int k) const;
  Eigen::Matrix4d normal_projector(int k) const {
    return Eigen::Matrix4d::Identity() - tangential_projector(k);
  }

  // g^ij g^kl <A_ik, A_jl> at node k.
  double second_fundamental_form_sq(int k) const;
  double max_second_fundamental_form_sq() const;
};

// Relative threshold on det g below which a node is treated as a branch point.
inline constexpr double kDegenerateRelative = 1e-10;

// First-derivative part: D_i u, g, g^-1, area element. Throws DegenerateMetric.
ImmersionData derivatives(const TorusMap& u, Backend backend = Backend::FiniteDifference4);

// Adds second fundamental form and mean curvature vector.
ImmersionData fundamental_forms(const TorusMap& u, Backend backend = Backend::FiniteDifference4);

double area(const TorusMap& u, Backend backend = Backend::FiniteDifference4);
double area(const ImmersionData& data);

double min_distance_to_origin(const TorusMap& u);

// Laplace-Beltrami operator of the induced metric applied to a scalar field,
// (1/sqrt g) D_i (sqrt g g^ij D_j f).
Scalar laplace_beltrami(const Scalar& f, const ImmersionData& data, const Differentiator& diff);

// Integral of f against the induced area measure.
double integrate(const Scalar& f, const ImmersionData& data);

// Smallest distance between nodes whose parameter separation is at least a
// quarter period in some direction; a coarse proxy for the normal injectivity scale.
double injectivity_scale(const TorusMap& u);

// Smallest induced nodal spacing min_k min(|D_1u| hx, |D_2u| hy).
double min_nodal_spacing(const ImmersionData& data);
double max_nodal_spacing(const ImmersionData& data);

}  // namespace lagshrink

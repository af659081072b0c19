#pragma once

#include "geometry.hpp"

#include <utility>

namespace lagshrink {

// Closed 1-form a dx + b dy = p dx + q dy + df on the grid.
struct OneForm {
  Scalar a, b;
  double p = 0.0, q = 0.0;
  Scalar f;

  static OneForm harmonic(const GridSpec& grid, double p, double q);
  static OneForm exact(const Scalar& f, const Differentiator& diff);
  // Splits (a, b) into harmonic and exact parts; NotClosed if D2 a - D1 b is not small.
  static OneForm decompose(const Scalar& a, const Scalar& b, const Differentiator& diff);

  OneForm scaled(double c) const;
  // max |D2 a - D1 b|
  double closedness_defect(const Differentiator& diff) const;
};

// Lagrangian angle theta = periodic + 2 pi (w1 x + w2 y).
struct AngleField {
  GridSpec grid;
  Scalar periodic;
  int w1 = 0, w2 = 0;

  double at(int i, int j) const;
};

struct LagrangianOptions {
  Backend backend = Backend::FiniteDifference4;
  double tol_lag_factor = 50.0;  // tol_lag = factor * h^2
  int k_proj = 20;
  double damping = 0.5;
};

double tol_lag(const GridSpec& grid, const LagrangianOptions& opts = {});

// max_k |omega(D1u, D2u)| / sqrt(det g)
double symplectic_residual(const TorusMap& u, Backend backend = Backend::FiniteDifference4);
double symplectic_residual(const ImmersionData& data);

AngleField lagrangian_angle(const TorusMap& u, const LagrangianOptions& opts = {});

// Mean curvature 1-form H(D_i u) = <H, J D_i u>, components along dx and dy.
std::pair<Scalar, Scalar> mean_curvature_form(const ImmersionData& data);

struct MaslovResult {
  int m1 = 0, m2 = 0;
  double period1 = 0.0, period2 = 0.0;  // mean periods of H over the two cycles
  double rounding_error = 0.0;
};

MaslovResult maslov_numbers(const TorusMap& u, const LagrangianOptions& opts = {});

// X = J alpha^sharp, alpha^sharp = g^ij alpha_j D_i u.
Field4 one_form_to_variation(const TorusMap& u, const OneForm& alpha, const LagrangianOptions& opts = {});

// First-order step u + s X followed by projection sweeps back toward the Lagrangian condition.
TorusMap lagrangian_perturb(const TorusMap& u, const OneForm& alpha, double s,
                            const LagrangianOptions& opts = {});

// Projection sweeps alone; returns the final symplectic residual through *residual.
TorusMap lagrangian_project(const TorusMap& u, const LagrangianOptions& opts, double* residual = nullptr);

}  // namespace lagshrink

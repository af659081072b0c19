#pragma once

#include "grid.hpp"

#include <utility>

namespace lagshrink {

// Closed plane curve, either a round circle or a closed solution of the
// curve shrinker equation k = -<F, nu>/2 found by shooting.
struct ShrinkerCurve {
  enum class Kind { Circle, Shooting };
  Kind kind = Kind::Circle;
  int p = 1, q = 1;            // turns and petals
  double radius = 0.0;         // circle radius, or starting radius of the shooting orbit
  double length = 0.0;
  double entropy_1d = 0.0;     // (4 pi)^-1/2 int exp(-|F|^2/4) ds
  double closure_gap = 0.0;

  // n points equally spaced in arclength, starting at (radius, 0), counterclockwise.
  Eigen::Matrix2Xd sample(int n) const;
};

ShrinkerCurve circle_curve(double radius);

// Abresch-Langer curve with p turns and q petals (p/q in (1/2, 1/sqrt 2)); (1, 1) is the circle of radius sqrt 2.
ShrinkerCurve abresch_langer_curve(int p, int q, double tol = 1e-13);

TorusMap clifford_seed(const GridSpec& grid);

// Gerono figure-eight (sin 2 pi x, sin 2 pi x cos 2 pi x) times the circle of radius sqrt 2:
// Lagrangian, immersed, with a transverse self-crossing along x = 0 ~ x = 1/2.
TorusMap figure_eight_seed(const GridSpec& grid);

// (c1(L1 x), c2(L2 y)) with the conformal structure (0, L2/L1) that makes it conformal.
std::pair<TorusMap, ConformalStructure> product_torus_seed(const ShrinkerCurve& c1, const ShrinkerCurve& c2,
                                                           const GridSpec& grid);

}  // namespace lagshrink

#pragma once

#include "common.hpp"

#include <memory>

namespace lagshrink {

namespace detail {
struct FftPlan;
}

// Uniform periodic sampling of the unit-square torus [0,1)^2. Node (i, j) sits
// at (i/nx, j/ny) and is stored at index i + nx * j.
struct GridSpec {
  int nx = 0;
  int ny = 0;

  GridSpec() = default;
  GridSpec(int nx_, int ny_);
  static GridSpec square(int n) { return GridSpec(n, n); }

  double hx() const { return 1.0 / nx; }
  double hy() const { return 1.0 / ny; }
  double cell_area() const { return hx() * hy(); }
  int size() const { return nx * ny; }
  int index(int i, int j) const {
    i %= nx;
    j %= ny;
    if (i < 0) i += nx;
    if (j < 0) j += ny;
    return i + nx * j;
  }
  bool operator==(const GridSpec& o) const { return nx == o.nx && ny == o.ny; }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// Teichmueller parameter of a flat torus; tau2 > 0.
struct ConformalStructure {
  double tau1 = 0.0;
  double tau2 = 1.0;

  ConformalStructure() = default;
  ConformalStructure(double t1, double t2);
};

// The flat metric g_tau = P^T P with P = [[1, tau1], [0, tau2]].
Eigen::Matrix2d metric_g_tau(const ConformalStructure& tau);

// Grid samples of a map from the torus to R^4. An optional linear lift lets the
// map carry a non-periodic linear part: position = value + lift * (x, y).
class TorusMap {
 public:
  using Lift = Eigen::Matrix<double, 4, 2>;

  TorusMap() = default;
  explicit TorusMap(GridSpec grid);
  TorusMap(GridSpec grid, Field4 values);
  TorusMap(GridSpec grid, Field4 values, const Lift& lift);

  const GridSpec& grid() const { return grid_; }
  const Field4& values() const { return values_; }
  Field4& values() { return values_; }
  const Lift& lift() const { return lift_; }
  bool has_lift() const { return !lift_.isZero(0.0); }

  Vec4 position(int node) const;
  Field4 positions() const;
  void validate_finite() const;

  TorusMap translated(const Vec4& v) const;
  TorusMap scaled(double c) const;
  TorusMap transformed(const Eigen::Matrix4d& r) const;

 private:
  GridSpec grid_;
  Field4 values_;
  Lift lift_ = Lift::Zero();
};

enum class Backend { FiniteDifference4, Spectral };

const char* backend_name(Backend b);
Backend parse_backend(const std::string& name);

// Periodic differentiation on a grid. Both backends are circulant and
// skew-symmetric, so summation by parts holds exactly on the grid.
class Differentiator {
 public:
  Differentiator(GridSpec grid, Backend backend = Backend::FiniteDifference4);

  const GridSpec& grid() const { return grid_; }
  Backend backend() const { return backend_; }

  Scalar d1(const Scalar& f) const;
  Scalar d2(const Scalar& f) const;
  Field4 d1(const Field4& f) const;
  Field4 d2(const Field4& f) const;

  // Modified wavenumber of d1 for Fourier index m (signed), i.e. d1 e_m = i k e_m.
  double wavenumber_x(int m) const;
  double wavenumber_y(int m) const;

  // Zero-mean solution of (d1 d1 + d2 d2) f = rhs; the mean of rhs is ignored.
  Scalar solve_poisson(const Scalar& rhs) const;

 private:
  GridSpec grid_;
  Backend backend_;
  mutable std::shared_ptr<const detail::FftPlan> fft_;

  const detail::FftPlan& fft() const;

  Scalar spectral_derivative(const Scalar& f, int axis) const;
};

// Mean of a scalar field with respect to the coordinate measure dx dy.
inline double grid_mean(const Scalar& f) { return f.mean(); }

}  // namespace lagshrink

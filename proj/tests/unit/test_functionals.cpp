#include <doctest.h>

#include "functionals.hpp"
#include "seeds.hpp"

#include <cmath>

using namespace lagshrink;

namespace {

const double kLambdaClifford = 2.0 * kPi / std::exp(1.0);

// Clifford torus in a non-uniform parametrization, so that discretization errors are visible.
TorusMap reparametrized_clifford(int n) {
  const GridSpec g = GridSpec::square(n);
  TorusMap u(g);
  const double r = std::sqrt(2.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = double(i) / n, y = double(j) / n;
      const double a = 2 * kPi * (x + 0.1 * std::sin(2 * kPi * x)), b = 2 * kPi * (y + 0.05 * std::sin(2 * kPi * y));
      u.values().col(g.index(i, j)) << r * std::cos(a), r * std::sin(a), r * std::cos(b), r * std::sin(b);
    }
  return u;
}

}  // namespace

TEST_CASE("Clifford oracles at N = 64") {
  const TorusMap c = clifford_seed(GridSpec::square(64));
  const double A = area(c);
  CHECK(A == doctest::Approx(8 * kPi * kPi).epsilon(1e-3));
  CHECK(willmore(c) == doctest::Approx(A / 4).epsilon(1e-3));
  const double E = energy(c, {0.0, 1.0});
  CHECK(E == doctest::Approx(8 * kPi * kPi / std::exp(1.0)).epsilon(1e-3));

  const EntropyReport r = entropy(c);
  CHECK(r.converged);
  CHECK(r.resolved);
  CHECK(r.lambda == doctest::Approx(kLambdaClifford).epsilon(1e-3));
  CHECK(std::abs(E - 4 * kPi * r.lambda) <= 1e-3 * E);
  CHECK(r.argmax.x0.norm() < 1e-2);
  CHECK(std::abs(r.argmax.t0 - 1.0) < 1e-2);
  CHECK(shrinker_residual(c) <= shrinker_tolerance(c));
}

TEST_CASE("entropy is invariant under translation and dilation") {
  const TorusMap c = clifford_seed(GridSpec::square(32));
  const double l0 = entropy(c).lambda;
  const EntropyReport moved = entropy(c.translated(Vec4(0.3, -0.2, 0.1, 0.5)));
  CHECK(moved.lambda == doctest::Approx(l0).epsilon(1e-6));
  CHECK(moved.argmax.x0[0] == doctest::Approx(0.3).epsilon(1e-3));
  const EntropyReport big = entropy(c.scaled(3.0));
  CHECK(big.lambda == doctest::Approx(l0).epsilon(1e-6));
  CHECK(big.argmax.t0 == doctest::Approx(9.0).epsilon(1e-3));
}

TEST_CASE("entropy of a product of unequal circles") {
  // sup_t pi r1 r2 / t exp(-(r1^2 + r2^2) / 4t) = 4 pi r1 r2 / ((r1^2 + r2^2) e), at t = (r1^2 + r2^2) / 4
  const auto [u, tau] = product_torus_seed(circle_curve(1.0), circle_curve(2.0), GridSpec(32, 64));
  EntropyOptions spectral;
  spectral.backend = Backend::Spectral;
  const EntropyReport r = entropy(u, spectral);
  CHECK(r.lambda == doctest::Approx(8 * kPi / (5 * std::exp(1.0))).epsilon(1e-8));
  CHECK(r.argmax.t0 == doctest::Approx(1.25).epsilon(1e-4));
  // FD4 carries the (2 pi / 32)^4 / 30 derivative error of the coarser circle
  CHECK(entropy(u).lambda == doctest::Approx(r.lambda).epsilon(1e-4));
  CHECK(f_functional(u, BasePoint{}) < r.lambda);
}

TEST_CASE("shrinker residual converges at second order or better") {
  double res[3];
  for (int k = 0; k < 3; ++k) res[k] = shrinker_residual(reparametrized_clifford(32 << k));
  for (int k = 0; k < 2; ++k) CHECK(std::log2(res[k] / res[k + 1]) >= 1.9);
  for (int k = 0; k < 3; ++k) {
    const TorusMap u = reparametrized_clifford(32 << k);
    CHECK(shrinker_residual(u) <= shrinker_tolerance(u));
  }
  CHECK(drift_identity_residual(reparametrized_clifford(64)) < 1e-2);
}

TEST_CASE("non-shrinkers are detected") {
  const auto [u, tau] = product_torus_seed(circle_curve(1.0), circle_curve(2.0), GridSpec::square(32));
  CHECK(shrinker_residual(u) > 10 * shrinker_tolerance(u));
  CHECK_THROWS_AS(drift_identity_residual(u), Error);
}

TEST_CASE("resolution floor keeps the entropy scale above the grid spacing") {
  const TorusMap c = clifford_seed(GridSpec::square(16));
  const EntropyReport r = entropy(c);
  CHECK(r.t_floor > 0.0);
  CHECK(r.argmax.t0 >= r.t_floor);
  const EntropyReport tiny = entropy(c.scaled(1e-3));
  CHECK(tiny.lambda == doctest::Approx(r.lambda).epsilon(1e-6));
}

TEST_CASE("local entropy tracking agrees with the global search") {
  const TorusMap c = clifford_seed(GridSpec::square(32));
  const EntropyReport g = entropy(c);
  BasePoint start;
  start.x0 = Vec4(0.05, 0.0, -0.05, 0.02);
  start.t0 = 1.2;
  const EntropyReport l = entropy_local(c, start);
  CHECK(l.lambda == doctest::Approx(g.lambda).epsilon(1e-8));
}

#include <doctest.h>

#include "functionals.hpp"
#include "lagrangian.hpp"
#include "seeds.hpp"
#include "variational.hpp"

#include <cmath>

using namespace lagshrink;

TEST_CASE("the (1, 1) curve is the circle of radius sqrt 2") {
  const ShrinkerCurve c = abresch_langer_curve(1, 1);
  CHECK(c.radius == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.entropy_1d == doctest::Approx(std::sqrt(2 * kPi / std::exp(1.0))).epsilon(1e-12));
}

TEST_CASE("Abresch-Langer (2, 3) closes and has larger entropy than the circle") {
  const ShrinkerCurve c = abresch_langer_curve(2, 3);
  CHECK(c.kind == ShrinkerCurve::Kind::Shooting);
  CHECK(c.closure_gap <= 1e-8 * c.length);
  CHECK(c.entropy_1d > std::sqrt(2 * kPi / std::exp(1.0)));
  CHECK(c.length == doctest::Approx(21.121976).epsilon(1e-6));
  CHECK(c.entropy_1d == doctest::Approx(3.09241019).epsilon(1e-7));

  // samples lie on a curve satisfying k = -<F, nu> / 2: check via discrete curvature
  const int n = 2048;
  const Eigen::Matrix2Xd p = c.sample(n);
  const double ds = c.length / n;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d a = p.col((i + n - 1) % n), b = p.col(i), d = p.col((i + 1) % n);
    const Eigen::Vector2d t = (d - a) / (2 * ds), acc = (d - 2 * b + a) / (ds * ds);
    const Eigen::Vector2d nu(-t[1], t[0]);
    const double k = acc.dot(nu) / t.squaredNorm();
    worst = std::max(worst, std::abs(k + 0.5 * b.dot(nu) / t.norm()));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("inadmissible rotation/petal pairs fail to shoot") {
  CHECK_THROWS_AS(abresch_langer_curve(1, 3), Error);
  try {
    abresch_langer_curve(1, 3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShootingFailed);
  }
  CHECK_THROWS_AS(abresch_langer_curve(2, 4), Error);
  CHECK_THROWS_AS(abresch_langer_curve(0, 1), Error);
}

TEST_CASE("circle x circle product is the Clifford seed") {
  const GridSpec g = GridSpec::square(16);
  const auto [u, tau] = product_torus_seed(abresch_langer_curve(1, 1), abresch_langer_curve(1, 1), g);
  CHECK(tau.tau1 == 0.0);
  CHECK(tau.tau2 == doctest::Approx(1.0));
  CHECK((u.values() - clifford_seed(g).values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("product entropy factorizes over circle x AL(2, 3)") {
  const ShrinkerCurve c = abresch_langer_curve(1, 1), al = abresch_langer_curve(2, 3);
  const double oracle = c.entropy_1d * al.entropy_1d;
  // F at the origin and unit scale is exactly the product of the 1-d integrals
  const auto [u, tau] = product_torus_seed(c, al, GridSpec(64, 128));
  CHECK(f_functional(u, BasePoint{}) == doctest::Approx(oracle).epsilon(1e-4));
  EntropyOptions spectral;
  spectral.backend = Backend::Spectral;
  const auto [us, taus] = product_torus_seed(c, al, GridSpec(32, 128));
  CHECK(std::abs(f_functional(us, BasePoint{}, Backend::Spectral) - oracle) < 1e-10);
  CHECK(tau.tau2 == doctest::Approx(al.length / c.length));
}

TEST_CASE("product seeds are numerical shrinkers and tau-critical") {
  const auto [u, tau] =
      product_torus_seed(abresch_langer_curve(1, 1), abresch_langer_curve(2, 3), GridSpec(32, 128));
  CHECK(shrinker_residual(u, Backend::Spectral) <= shrinker_tolerance(u, Backend::Spectral));
  CHECK(symplectic_residual(u, Backend::Spectral) <= tol_lag(u.grid()));
  const VariationPair g = gradient_M(u, tau, Backend::Spectral);
  CHECK(g.nu.norm() < 1e-6);
  // a wrong conformal structure is not critical in tau
  const VariationPair g2 = gradient_M(u, ConformalStructure(0.0, 1.2 * tau.tau2), Backend::Spectral);
  CHECK(g2.nu.norm() > 1e-2);
}

TEST_CASE("figure-eight fixture is a Lagrangian immersion") {
  const TorusMap f = figure_eight_seed(GridSpec::square(32));
  CHECK(symplectic_residual(f) <= tol_lag(f.grid()));
  CHECK(area(f) > 0.0);
}

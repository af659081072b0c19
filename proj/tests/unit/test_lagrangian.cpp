#include <doctest.h>

#include "io.hpp"
#include "lagrangian.hpp"
#include "seeds.hpp"

#include <cmath>

using namespace lagshrink;

namespace {

TorusMap tilted_torus(int n) {
  const GridSpec g = GridSpec::square(n);
  TorusMap u(g);
  const double r = std::sqrt(2.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double a = 2 * kPi * i / n, b = 2 * kPi * j / n;
      u.values().col(g.index(i, j)) << r * std::cos(a), r * std::cos(b), r * std::sin(a), r * std::sin(b);
    }
  return u;
}

}  // namespace

TEST_CASE("seeds are Lagrangian to second order") {
  for (int n : {32, 64}) {
    const TorusMap c = clifford_seed(GridSpec::square(n));
    CHECK(symplectic_residual(c) <= tol_lag(c.grid()));
  }
  const auto [al, tau] = product_torus_seed(circle_curve(std::sqrt(2.0)), abresch_langer_curve(2, 3), GridSpec(32, 128));
  CHECK(symplectic_residual(al) <= tol_lag(al.grid()));
}

TEST_CASE("non-Lagrangian tori are rejected") {
  const TorusMap u = tilted_torus(32);
  CHECK(symplectic_residual(u) > 0.5);
  CHECK_THROWS_AS(maslov_numbers(u), Error);
  try {
    lagrangian_angle(u);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotLagrangian);
  }
}

TEST_CASE("Maslov numbers of products count the turning of each factor") {
  CHECK(maslov_numbers(clifford_seed(GridSpec::square(32))).m1 == 2);
  const MaslovResult c = maslov_numbers(clifford_seed(GridSpec::square(32)));
  CHECK(c.m2 == 2);
  CHECK(c.rounding_error < 1e-3);

  const auto [u, tau] = product_torus_seed(circle_curve(1.0), circle_curve(2.0), GridSpec::square(32));
  const MaslovResult r = maslov_numbers(u);
  CHECK(r.m1 == 2);
  CHECK(r.m2 == 2);

  // Abresch-Langer (2, 3) turns twice.
  const auto [al, tau2] = product_torus_seed(circle_curve(std::sqrt(2.0)), abresch_langer_curve(2, 3), GridSpec(32, 128));
  const MaslovResult a = maslov_numbers(al);
  CHECK(a.m1 == 2);
  CHECK(a.m2 == 4);

  // The figure-eight has turning number zero.
  const MaslovResult f = maslov_numbers(figure_eight_seed(GridSpec::square(64)));
  CHECK(f.m1 == 0);
  CHECK(f.m2 == 2);
}

TEST_CASE("Maslov numbers are invariant under dilation, translation and unitary rotation") {
  const TorusMap c = clifford_seed(GridSpec::square(32));
  Eigen::Matrix4d U = Eigen::Matrix4d::Zero();
  // (z1, z2) -> (z2, i z1)
  U(0, 3) = -1.0;
  U(1, 2) = 1.0;
  U(2, 0) = 1.0;
  U(3, 1) = 1.0;
  for (const TorusMap& v : {c.scaled(0.3), c.translated(Vec4(1, 2, 3, 4)), c.transformed(U)}) {
    const MaslovResult m = maslov_numbers(v);
    CHECK(m.m1 == 2);
    CHECK(m.m2 == 2);
  }
}

TEST_CASE("Lagrangian angle winds with the Maslov class") {
  const AngleField a = lagrangian_angle(clifford_seed(GridSpec::square(32)));
  CHECK(std::abs(a.w1) == 1);
  CHECK(std::abs(a.w2) == 1);
}

TEST_CASE("closed 1-forms split into harmonic and exact parts") {
  const GridSpec g(16, 32);
  const Differentiator d(g);
  CounterRng rng(5, 9);
  const Scalar f = random_bandlimited(g, 3, rng);
  const OneForm ex = OneForm::exact(f, d);
  const OneForm w = OneForm::decompose((ex.a.array() + 0.7).matrix(), (ex.b.array() - 1.3).matrix(), d);
  CHECK(w.p == doctest::Approx(0.7));
  CHECK(w.q == doctest::Approx(-1.3));
  CHECK((w.f - (f.array() - f.mean()).matrix()).cwiseAbs().maxCoeff() < 1e-10);

  Scalar a = Scalar::Zero(g.size()), b = Scalar::Zero(g.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) b[g.index(i, j)] = std::sin(2 * kPi * i * g.hx());
  CHECK_THROWS_AS(OneForm::decompose(a, b, d), Error);
}

TEST_CASE("Lagrangian perturbations stay Lagrangian and move by s X") {
  const TorusMap c = clifford_seed(GridSpec::square(32));
  const Differentiator d(c.grid());
  CounterRng rng(11, 3);
  OneForm alpha = OneForm::exact(random_bandlimited(c.grid(), 3, rng), d);
  alpha.a.array() += 0.4;
  alpha.p = 0.4;
  const Field4 x = one_form_to_variation(c, alpha);
  const double s = 1e-2 / x.colwise().norm().maxCoeff();
  const TorusMap v = lagrangian_perturb(c, alpha, s);
  CHECK(symplectic_residual(v) <= tol_lag(v.grid()));
  const double moved = (v.values() - c.values()).colwise().norm().maxCoeff();
  CHECK(moved == doctest::Approx(1e-2).epsilon(0.05));
  // the variation J alpha^sharp is normal
  const ImmersionData dd = derivatives(c);
  double tangential = 0.0;
  for (int k = 0; k < c.grid().size(); ++k) tangential = std::max(tangential, dd.tangential(k, x.col(k)).norm());
  CHECK(tangential < 1e-10 * x.colwise().norm().maxCoeff());
  const MaslovResult m = maslov_numbers(v);
  CHECK(m.m1 == 2);
  CHECK(m.m2 == 2);
  CHECK_THROWS_AS(lagrangian_perturb(c, alpha, 100.0 * s), Error);
}

TEST_CASE("projection repairs a small non-Lagrangian defect") {
  const TorusMap c = clifford_seed(GridSpec::square(32));
  TorusMap v = c;
  CounterRng rng(2, 2);
  for (int a = 0; a < 4; ++a) v.values().row(a) += 1e-3 * random_bandlimited(c.grid(), 2, rng).transpose();
  const double before = symplectic_residual(v);
  double after = 0.0;
  lagrangian_project(v, {}, &after);
  CHECK(after < 1e-2 * before);
}

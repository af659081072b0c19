#include <doctest.h>

#include "functionals.hpp"
#include "io.hpp"
#include "seeds.hpp"
#include "variational.hpp"

#include <cmath>

using namespace lagshrink;

namespace {

VariationPair random_pair(const GridSpec& g, std::uint64_t stream, int band = 3) {
  CounterRng rng(99, stream);
  VariationPair p = VariationPair::zero(g);
  for (int a = 0; a < 4; ++a) p.phi.row(a) = random_bandlimited(g, band, rng).transpose();
  p.nu << rng.normal(), rng.normal();
  return p;
}

TorusMap perturbed_clifford(int n, double amp) {
  const GridSpec g = GridSpec::square(n);
  TorusMap u = clifford_seed(g);
  CounterRng rng(1, 2);
  for (int a = 0; a < 4; ++a) u.values().row(a) += amp * random_bandlimited(g, 3, rng).transpose();
  return u;
}

}  // namespace

TEST_CASE("discrete energy matches the Gaussian energy and 4 pi lambda at Clifford") {
  const TorusMap c = clifford_seed(GridSpec::square(32));
  CHECK(discrete_energy(c, {0, 1}) == doctest::Approx(energy(c, {0, 1})).epsilon(1e-12));
  CHECK(weighted_norm(c, {0, 1}, gradient_M(c, {0, 1})) < 1e-10);
}

TEST_CASE("gradient agrees with finite differences of the energy") {
  const TorusMap u = perturbed_clifford(16, 0.05);
  const ConformalStructure tau(0.03, 1.05);
  const VariationPair g = gradient_M(u, tau);
  double worst = 0.0;
  for (int d = 0; d < 20; ++d) {
    const VariationPair p = random_pair(u.grid(), 100 + d);
    const double h = 1e-5;
    TorusMap up = u, um = u;
    up.values() += h * p.phi;
    um.values() -= h * p.phi;
    const double fd = (discrete_energy(up, {tau.tau1 + h * p.nu[0], tau.tau2 + h * p.nu[1]}) -
                       discrete_energy(um, {tau.tau1 - h * p.nu[0], tau.tau2 - h * p.nu[1]})) /
                      (2 * h);
    const double an = weighted_inner(u, tau, g, p);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("Hessian is self-adjoint in the weighted inner product") {
  const TorusMap u = clifford_seed(GridSpec::square(16));
  const ConformalStructure tau(0, 1);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const VariationPair a = random_pair(u.grid(), 1000 + 2 * k), b = random_pair(u.grid(), 1001 + 2 * k);
    const VariationPair La = hessian_apply(u, tau, a), Lb = hessian_apply(u, tau, b);
    const double lhs = weighted_inner(u, tau, La, b), rhs = weighted_inner(u, tau, a, Lb);
    const double scale = weighted_norm(u, tau, La) * weighted_norm(u, tau, b);
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("linearized operator requires a critical point") {
  const TorusMap u = perturbed_clifford(16, 0.05);
  const VariationPair p = random_pair(u.grid(), 5);
  CHECK_THROWS_AS(operator_L_apply(u, {0, 1}, p), Error);
  CHECK_NOTHROW(operator_L_apply(clifford_seed(GridSpec::square(16)), {0, 1}, p));
}

TEST_CASE("Newton descent returns to the Clifford critical point") {
  const CriticalPoint cp = find_critical_point(perturbed_clifford(32, 1e-3), {0.01, 1.02});
  CHECK(cp.grad_norm <= 1e-6);
  CHECK(cp.tau.tau1 == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(cp.tau.tau2 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(cp.energy == doctest::Approx(discrete_energy(clifford_seed(GridSpec::square(32)), {0, 1})).epsilon(1e-9));
  CHECK(shrinker_residual(cp.u) <= shrinker_tolerance(cp.u));
}

TEST_CASE("Newton descent from a product of unequal circles reaches Clifford") {
  const GridSpec g = GridSpec::square(32);
  const auto [u, tau] = product_torus_seed(circle_curve(1.3), circle_curve(1.5), g);
  const CriticalPoint cp = find_critical_point(u, tau);
  CHECK(cp.grad_norm <= 1e-6);
  for (int k = 0; k < g.size(); ++k) {
    CHECK(cp.u.values().col(k).head<2>().norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(cp.u.values().col(k).tail<2>().norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  }
}

TEST_CASE("symmetries span part of the kernel; kernel is separated by a gap") {
  const AssembledOperator op = assemble_L(clifford_seed(GridSpec::square(64)), {0, 1}, 16);
  const Spectrum sp = spectrum(op);
  const double h = 1.0 / 16;
  const int n = static_cast<int>(sp.eigenvalues.size());
  int kernel = 0;
  double smallest_nonzero = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double e = std::abs(sp.eigenvalues[i]);
    if (e <= 10 * h * h) ++kernel;
    else smallest_nonzero = std::min(smallest_nonzero, e);
  }
  // 6 rotations, 2 reparametrizations and 4 further Jacobi fields of the Clifford torus
  CHECK(kernel == 12);
  CHECK(smallest_nonzero >= 1.0);

  const Eigen::MatrixXd L = op.L();
  const auto gens = symmetry_generators(op.u);
  REQUIRE(gens.size() == 8);
  for (int k = 0; k < 6; ++k) {
    const Eigen::VectorXd v = op.flatten(gens[k]);
    const Eigen::VectorXd Lv = L * v;
    CHECK(std::sqrt(Lv.dot(op.weights.asDiagonal() * Lv)) <= 10 * h * h * std::sqrt(v.dot(op.weights.asDiagonal() * v)));
  }
  // eigenvectors are weighted-orthonormal
  const Eigen::MatrixXd gram = sp.eigenvectors.transpose() * op.weights.asDiagonal() * sp.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("assembly refuses oversized grids") {
  CHECK_THROWS_AS(assemble_L(clifford_seed(GridSpec::square(64)), {0, 1}, 32), Error);
}

TEST_CASE("Lojasiewicz inequality holds on kernel-orthogonal samples") {
  const TorusMap c = clifford_seed(GridSpec::square(32));
  const CriticalPoint cp{c, {0, 1}, 0.0, discrete_energy(c, {0, 1}), 0};
  const LojasiewiczFit f = lojasiewicz_fit(cp);
  CHECK(f.n_samples >= 200);
  CHECK(f.theta >= 0.25);
  CHECK(f.theta <= 0.5);
  CHECK(f.max_violation <= 0.0);
  for (const auto& s : f.samples) CHECK(std::pow(s.energy_gap, 1.0 - f.theta) <= f.C2 * s.grad_norm);
  CHECK(f.slope_min >= 1.8);
  CHECK(f.slope_max <= 2.2);
  CHECK(f.kernel_leak < 1e-10);

  LojasiewiczOptions few;
  few.directions = 2;
  few.eps_count = 5;
  CHECK_THROWS_AS(lojasiewicz_fit(cp, few), Error);
}

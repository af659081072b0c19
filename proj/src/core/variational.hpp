#pragma once

#include "geometry.hpp"

#include <cstdint>
#include <vector>

namespace lagshrink {

// Argument and value of the linearized operator: a grid field plus a tau-direction.
struct VariationPair {
  Field4 phi;
  Eigen::Vector2d nu = Eigen::Vector2d::Zero();

  static VariationPair zero(const GridSpec& grid) { return {Field4::Zero(4, grid.size()), Eigen::Vector2d::Zero()}; }
  VariationPair& operator+=(const VariationPair& o);
  VariationPair& operator*=(double c);
};
VariationPair operator+(VariationPair a, const VariationPair& b);
VariationPair operator-(VariationPair a, const VariationPair& b);
VariationPair operator*(double c, VariationPair a);

struct CriticalPoint {
  TorusMap u;
  ConformalStructure tau;
  double grad_norm = 0.0;
  double energy = 0.0;
  int iterations = 0;
};

// int phi1.phi2 exp(-|u|^2/4) dmu_tau + nu1.nu2
double weighted_inner(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p1,
                      const VariationPair& p2);
double weighted_norm(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p);

// Grid energy (1/2) sum w a^ij D_iu.D_ju hx hy with a = tau2 g_tau^-1; equals energy().
double discrete_energy(const TorusMap& u, const ConformalStructure& tau, Backend backend = Backend::FiniteDifference4);

// Exact gradient of discrete_energy in the weighted inner product.
VariationPair gradient_M(const TorusMap& u, const ConformalStructure& tau, Backend backend = Backend::FiniteDifference4);

// -g_sigma^ij (w^-1 D_j(w D_i u) + (1/4)(D_iu.D_ju) u), w = exp(-|u|^2/4)
Field4 B_map(const TorusMap& u, const ConformalStructure& sigma, Backend backend = Backend::FiniteDifference4);

// Weighted-metric Hessian of discrete_energy, W^-1 Hess. At critical points this is the
// Frechet derivative of gradient_M; it is self-adjoint in weighted_inner everywhere.
VariationPair hessian_apply(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p,
                            Backend backend = Backend::FiniteDifference4);

// hessian_apply restricted to accepted critical points; NotCritical otherwise.
VariationPair operator_L_apply(const TorusMap& u, const ConformalStructure& tau, const VariationPair& p,
                               double tol_crit = 1e-6, Backend backend = Backend::FiniteDifference4);

// The 6 rotation generators R u (R antisymmetric, e_a e_b^T - e_b e_a^T for a < b)
// followed by D1 u and D2 u, all with nu = 0.
std::vector<VariationPair> symmetry_generators(const TorusMap& u, Backend backend = Backend::FiniteDifference4);

struct CriticalOptions {
  double tol_crit = 1e-6;
  int max_iter = 40;
  int max_minres = 2000;
  double tau2_min = 1e-2;
  Backend backend = Backend::FiniteDifference4;
};

// Newton iteration on the gradient, linear solves by MINRES in the weighted inner product.
CriticalPoint find_critical_point(const TorusMap& u0, const ConformalStructure& tau0, const CriticalOptions& opts = {});

struct AssembledOperator {
  TorusMap u;                 // critical point on the assembly grid
  ConformalStructure tau;
  Eigen::MatrixXd hessian;    // Euclidean Hessian of the discrete energy
  Eigen::VectorXd weights;    // diagonal of the weighted inner product
  Eigen::MatrixXd L() const;  // weights^-1 hessian
  Eigen::VectorXd flatten(const VariationPair& p) const;
  VariationPair unflatten(const Eigen::VectorXd& v) const;
};

inline constexpr int kMaxAssemblyGrid = 24;

// Dense operator on an n x n grid (n <= 24): the input is subsampled when n divides
// its grid and re-solved to a critical point there.
AssembledOperator assemble_L(const TorusMap& u, const ConformalStructure& tau, int n,
                             const CriticalOptions& opts = {});

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // weighted-orthonormal columns
};

Spectrum spectrum(const AssembledOperator& op);

struct LojasiewiczOptions {
  int directions = 20;
  int eps_count = 10;
  double eps_min = 1e-4;
  double eps_max = 1e-1;
  int band = 4;
  std::uint64_t seed = 20240611;
  double constant_margin = 2.0;
  Backend backend = Backend::FiniteDifference4;
};

struct LojasiewiczSample {
  int direction = 0;
  double eps = 0.0;
  double energy_gap = 0.0;  // |E - E_c|
  double grad_norm = 0.0;   // Hoelder-type proxy of |M|
};

struct LojasiewiczFit {
  double theta = 0.0;
  double C2 = 0.0;
  int n_samples = 0;
  double max_violation = 0.0;
  double slope_mean = 0.0, slope_min = 0.0, slope_max = 0.0;  // d log|E - E_c| / d log|M|
  double kernel_leak = 0.0;  // largest weighted projection of a direction on the generators
  std::vector<LojasiewiczSample> samples;
};

// Max-norm plus max first-difference quotient of the field part, plus |nu|.
double holder_proxy_norm(const VariationPair& p, const GridSpec& grid);

LojasiewiczFit lojasiewicz_fit(const CriticalPoint& cp, const LojasiewiczOptions& opts = {});

}  // namespace lagshrink

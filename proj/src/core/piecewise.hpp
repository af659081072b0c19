#pragma once

#include "flow.hpp"
#include "lagrangian.hpp"
#include "variational.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lagshrink {

struct PerturbationOptions {
  double delta = 0.1;
  double c_min = 1e-4;      // smallest entropy drop accepted
  double area_max = 100.0;  // Lambda
  int k_exact = 8;          // random exact forms after dx, dy
  std::uint64_t seed = 20240611;
  double shrinker_tol_factor = 10.0;
  LagrangianOptions lag;
  EntropyOptions entropy;
};

struct PerturbationCandidate {
  std::string direction;  // "dx", "dy" or "df<k>"
  double s = 0.0;
  double lambda = 0.0;
  double drop = 0.0;
  double c0 = 0.0;
  bool certified = false;
  std::string reason;  // why it was rejected
};

struct PerturbationResult {
  TorusMap map;
  OneForm alpha;  // normalized so that max |J alpha^sharp| = 1
  std::string direction;
  double s = 0.0;
  double delta1 = 0.0;  // delta sqrt(area) / 6
  double lambda_model = 0.0, lambda_perturbed = 0.0;
  double area_model = 0.0, area_perturbed = 0.0;
  double c0_distance = 0.0;
  double lag_residual = 0.0;
  MaslovResult maslov_model, maslov_perturbed;
  std::vector<PerturbationCandidate> tried;
};

// The closed 1-forms searched, in order: dx, dy, then k_exact random df.
std::vector<std::pair<std::string, OneForm>> perturbation_dictionary(const GridSpec& grid, int k_exact,
                                                                     std::uint64_t seed, Backend backend);

// First dictionary entry and amplitude in +-{d1/4, d1/2, d1} that lowers the entropy by
// at least c_min, stays within 3 d1 in C0 and keeps the Maslov pair. NoDecreaseFound otherwise.
PerturbationResult perturbation_search(const TorusMap& model, const PerturbationOptions& opts);

struct RescaledBack {
  TorusMap map;
  double kappa = 1.0;
};

// sqrt(T0 - t1) kappa perturbed + q with kappa^2 = target_area / area(perturbed).
RescaledBack rescale_back(const TorusMap& perturbed, double target_area, double T0, double t1, const Vec4& q,
                          Backend backend = Backend::FiniteDifference4);

struct PiecewiseEvent {
  double t = 0.0;
  std::string direction;
  double s = 0.0;
  double lambda_before = 0.0, lambda_after = 0.0;
  double area_before = 0.0, area_after = 0.0;
  double c0_distance = 0.0, delta_bound = 0.0;
  std::array<int, 2> maslov_before{}, maslov_after{};
  double kappa = 1.0;
  // The four conditions of a piecewise flow: smooth legs, area match,
  // entropy drop and delta-closeness (with the Maslov pair alongside).
  bool cert_lagrangian = false;
  bool cert_area = false;
  bool cert_entropy = false;
  bool cert_c0 = false;
  bool cert_maslov = false;
  bool certified() const { return cert_lagrangian && cert_area && cert_entropy && cert_c0 && cert_maslov; }
};

struct PiecewiseLeg {
  double t_start = 0.0, t_end = 0.0;
  int steps = 0;
  std::string stop_reason;
  double lambda_start = 0.0;
  double max_entropy_increase = 0.0;  // over resolved steps
  double area_start = 0.0, area_end = 0.0;
  std::array<int, 2> maslov_start{}, maslov_end{};
  double T0_est = 0.0, type1_constant = 0.0;
  bool is_type1 = false;
  bool compact_model = false;
  double model_area = 0.0, model_diameter = 0.0;
  std::string note;
  std::vector<FlowSample> samples;
};

enum class PiecewiseOutcome { TerminalNonCompact, TerminatedAtCap, Error };
const char* outcome_name(PiecewiseOutcome o);

struct PiecewiseLog {
  std::vector<PiecewiseLeg> legs;
  std::vector<PiecewiseEvent> events;
  PiecewiseOutcome outcome = PiecewiseOutcome::Error;
  std::string terminal_note;
  double lambda_initial = 0.0;
  int event_cap = 0;  // min(k_max, (lambda(F0) - 1) / c_min)
  std::vector<TorusMap> leg_starts;
};

struct PiecewiseOptions {
  FlowOptions flow;
  PerturbationOptions perturb;
  int k_max = 16;
};

PiecewiseLog run_piecewise(const TorusMap& F0, double Lambda, double delta, const PiecewiseOptions& opts);

// Distinct nodes (at least two cells apart) closer than rel * diameter with
// tangent planes that are not aligned.
struct EmbeddednessReport {
  bool embedded = true;
  double diameter = 0.0;
  double closest = 0.0;  // smallest distance among well-separated node pairs
  int flagged_pairs = 0;
};

EmbeddednessReport embeddedness_check(const TorusMap& u, double rel = 1e-3,
                                      Backend backend = Backend::FiniteDifference4);

struct CensusSeed {
  std::string label;
  TorusMap map;
  ConformalStructure tau;
};

struct CensusEntry {
  std::string label;
  bool accepted = false;
  std::string notice;
  double area = 0.0, entropy = 0.0, grad_norm = 0.0, shrinker_residual = 0.0;
  int iterations = 0;
  bool embedded = false;
  bool embedding_checked = false;  // only for area <= 32 pi
};

struct CensusCluster {
  double entropy = 0.0;  // mean
  double spread = 0.0;   // max - min
  double area = 0.0;     // mean
  std::vector<int> members;
};

struct CensusReport {
  std::vector<CensusEntry> entries;
  std::vector<CensusCluster> clusters;
};

struct CensusOptions {
  // Degenerate critical points (kernel beyond the symmetries) make Newton
  // converge only linearly, hence the larger iteration budget.
  CriticalOptions critical{.max_iter = 100};
  EntropyOptions entropy;
  double shrinker_tol_factor = 10.0;
  double cluster_tol = 1e-3;
};

CensusReport entropy_census(const std::vector<CensusSeed>& seeds, double Lambda, const CensusOptions& opts = {});

// Clifford torus followed by `count` Lagrangian perturbations of it (random
// harmonic plus exact forms at the given amplitude).
std::vector<CensusSeed> perturbed_clifford_seeds(const GridSpec& grid, int count, double amplitude,
                                                 std::uint64_t seed, Backend backend = Backend::FiniteDifference4);

}  // namespace lagshrink

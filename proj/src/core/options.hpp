#pragma once

#include "io.hpp"
#include "piecewise.hpp"

namespace lagshrink {

// All module options derived from one RunConfig.
struct Toolkit {
  GridSpec grid;
  Backend backend = Backend::FiniteDifference4;
  std::uint64_t seed = 0;
  double tol_shrink_factor = 10.0;
  EntropyOptions entropy;
  LagrangianOptions lag;
  CriticalOptions critical;
  int spectrum_n = 16;
  LojasiewiczOptions lojasiewicz;
  FlowOptions flow;
  PiecewiseOptions piecewise;
  double piecewise_lambda = 100.0, piecewise_delta = 0.1;
  CensusOptions census;
  int census_perturbed = 20;
  double census_amplitude = 1e-2;
};

Toolkit toolkit_from(const RunConfig& cfg);

}  // namespace lagshrink

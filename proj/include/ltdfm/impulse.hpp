#pragma once

#include <vector>

#include "ltdfm/sampler.hpp"

namespace ltdfm {

struct ImpulseRequest {
  std::vector<int> origins;  // projection start times, each in 1..T
  int horizon = 80;
  double shock = std::nan("");  // nan = default_shock
  int replicates = 1;           // forward coefficient-path replicates per draw
  bool freeze_indicators = false;
  bool freeze_volatilities = false;
  // common random numbers: shocked and unshocked projections share every
  // innovation, so additive noise cancels exactly in the difference. The
  // independent mode redraws innovations per path (variance comparison only).
  bool common_random_numbers = true;
  std::uint64_t seed = 0;  // 0 = derive from the draw file seed
};

struct ImpulseSurface {
  std::vector<int> origins;
  int horizon = 0;
  double shock = 0.0;
  std::vector<Matrix> responses;           // per origin: m x horizon
  std::vector<std::vector<char>> divergent;  // per origin: m flags
};

// Average over t and draws of the posterior innovation standard deviation
// E[w_t^{1/2} | y].
double default_shock(const PosteriorDraws& draws);

// Expected forward path difference of every channel after a one-time shock to
// the latent innovation, Monte Carlo averaged over posterior draws and
// forward replicates of the coefficient paths.
ImpulseSurface impulse_response(const PosteriorDraws& draws, const ImpulseRequest& request);

}  // namespace ltdfm

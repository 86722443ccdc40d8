#pragma once

#include <optional>
#include <vector>

#include "ltdfm/config.hpp"
#include "ltdfm/rng.hpp"
#include "ltdfm/types.hpp"

namespace ltdfm {

// Controls for one thresholded AR(1) coefficient process: any field left
// unset is drawn from its prior.
struct LtProcessSpec {
  std::optional<double> mu, phi, v, d;
  std::optional<Vector> beta_path;  // length T+1, overrides the AR(1) draw
};

// Generation spec: explicit truth values where set, hyper-level prior draws
// elsewhere.
struct GenerationSpec {
  std::optional<Matrix> psi;
  std::optional<Matrix> delta_path;   // p x (T+1)
  std::optional<Vector> w_path;       // length T
  std::optional<double> sigma1_sq;
  std::optional<Matrix> sigma_path;   // (m-1) x T
  std::optional<Vector> x_init;       // length max(p,r), times -(n-1)..0
  std::vector<std::vector<LtProcessSpec>> loadings;    // (m-1) x r, may be empty
  std::vector<std::vector<LtProcessSpec>> var_coeffs;  // m x m (M+), may be empty
  std::optional<Vector> y0;
  int max_regenerations = 5;
  double explosion_guard = 1e9;
};

// Multiplicative beta-shock variance path matching the discount model
// exactly: the sampler's volatility step is correctly specified against data
// generated this way.
Vector simulate_volatility_path(int T, double lambda, double n0, double s0, Rng& rng);

// Draws a complete latent configuration and a data set from the generative
// law. Explosive latent paths trigger regeneration (counted); repeated
// failures raise a numerical error.
TruthRecord simulate_dataset(const ModelInputs& inputs, int T, const GenerationSpec& gen,
                             Rng& rng);

// Parse a GenerationSpec from the config file's "simulate.truth" JSON block.
GenerationSpec parse_generation_spec(const std::string& json_text, const ModelConfig& config,
                                     int T);

}  // namespace ltdfm

#pragma once

#include <string>

#include "ltdfm/types.hpp"

namespace ltdfm {

// Default hyperpriors for a given model shape.
PriorSpec default_priors(const ModelConfig& config);

// Inputs checked against every type invariant; data-dependent prior defaults
// (x0 variance, volatility init scales) resolved to concrete numbers.
struct ModelInputs {
  ModelConfig config;
  ResolvedPriors prior;
};

ModelInputs validate_config(const ModelConfig& config, const PriorSpec& prior,
                            const ObservationMatrix& data);

// Validation without data (simulation path); all data-dependent defaults must
// be explicit.
ModelInputs validate_config_for_simulation(const ModelConfig& config, const PriorSpec& prior,
                                           int T);

// Structural checks that do not need data.
void check_config(const ModelConfig& config);
void check_prior(const ModelConfig& config, const PriorSpec& prior);

// JSON config file: {"model": {...}, "priors": {...}, "mcmc": {...}, ...};
// schema documented in the README. Unknown keys are rejected.
struct ConfigFile {
  ModelConfig config;
  PriorSpec prior;
  int simulate_T = 0;            // "simulate" section, optional
  std::string simulate_mode;     // "prior" | "fixed"
  std::string simulate_truth;    // JSON text of the truth block ("fixed" mode)
};

ConfigFile load_config_file(const std::string& path);
std::string config_json(const ModelConfig& config, const PriorSpec& prior);
std::uint64_t config_hash(const ModelConfig& config, const PriorSpec& prior);

std::string serialize_config(const ModelConfig& config);
ModelConfig deserialize_config(const std::string& json_text);
std::string serialize_prior(const PriorSpec& prior);
PriorSpec deserialize_prior(const std::string& json_text, const ModelConfig& config);

// parse a {"model": ..., "priors": ...} bundle produced by config_json
ModelConfig config_from_bundle_json(const std::string& json_text);
PriorSpec prior_from_bundle_json(const std::string& json_text, const ModelConfig& config);

}  // namespace ltdfm

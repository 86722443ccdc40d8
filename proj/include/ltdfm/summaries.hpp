#pragma once

#include <string>
#include <vector>

#include "ltdfm/sampler.hpp"

namespace ltdfm {

// Equal-tailed quantile with linear interpolation between order statistics
// (h = (n-1)q + 1); sorts the buffer in place.
double interpolated_quantile(std::vector<double>& values, double q);

struct TrajectorySummary {
  std::string series;
  Matrix stats;  // 3 x T: mean, lower, upper
};

// Pointwise posterior mean and central credible interval for the selected
// scalar state trajectories. Selectors: x | delta | w | sqrt_w | sigma |
// sigma_sq; unknown selectors raise a config error.
std::vector<TrajectorySummary> summarize_trajectories(const PosteriorDraws& draws,
                                                      const std::string& which,
                                                      double level = 0.95);

struct ShrinkageProbabilities {
  Matrix loadings;      // ((m-1)*r) x T, row (i-2)*r + (k-1)
  Matrix var_coeffs;    // (m*m) x T for M+, row (i-1)*m + (j-1); empty for M
};

// Draw frequency of s_ikt = 1 (and s^a for M+).
ShrinkageProbabilities shrinkage_probabilities(const PosteriorDraws& draws);

// b-hat_ikt = E[beta_ikt | y] * I(Pr(s_ikt=1|y) > 0.5), rows as above.
Matrix estimated_loadings(const PosteriorDraws& draws);

// Per-time, per-channel fitted observation means for one state configuration.
Matrix fitted_means(const LatentStateSet& st, const ModelConfig& cfg, const Matrix& y);

struct DicResult {
  double dic = 0.0;
  double mean_deviance = 0.0;
  double plugin_deviance = 0.0;
  double effective_parameters = 0.0;
};

// Conditional-deviance DIC: Dbar = E[-2 log p(y | states, params)] over draws,
// plug-in deviance at the posterior means of the fitted mean vector and the
// observation variances; DIC = 2 Dbar - D(plug-in).
DicResult compute_dic(const PosteriorDraws& draws, const ObservationMatrix& data);

}  // namespace ltdfm

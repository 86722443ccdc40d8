#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ltdfm/errors.hpp"

namespace ltdfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// T x m multivariate series, channels in columns.
struct ObservationMatrix {
  Matrix values;
  std::vector<std::string> channel_names;

  int T() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()); }
};

enum class ModelVariant { M, MPlus };

inline std::string variant_name(ModelVariant v) { return v == ModelVariant::M ? "M" : "M+"; }

struct McmcOptions {
  int burn_in = 5000;
  int draws = 20000;
  int thin = 1;
  std::uint64_t rng_seed = 1;
  int checkpoint_every = 0;  // sweeps between checkpoints; 0 = off
  int adapt_window = 100;    // sweeps between proposal-scale adaptations during burn-in; 0 = off
};

struct ModelConfig {
  int m = 19;
  int p = 6;
  int r = 5;
  int s = 3;  // anchor lag index in 1..r; channel 1 reads x_{t-s+1}
  ModelVariant variant = ModelVariant::M;
  double lambda_w = 0.99;
  double lambda_sigma = 0.99;
  double K = 3.0;
  McmcOptions mcmc;

  // companion state holds max(p, r) lagged x values so the observation map is
  // always a prefix selection; config enforces r <= p+1
  int state_dim() const { return p > r ? p : r; }
};

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;
};

struct NormalPrior {
  double mean = 0.0;
  double variance = 1.0;
};

struct WishartPrior {
  double dof = 100.0;
  Matrix scale;  // E[X] = dof * scale
};

struct VolatilityInit {
  double n0 = 1.0;
  double s0 = std::nan("");  // nan = resolve from data at validation time
};

struct PriorSpec {
  GammaPrior sigma1_prec{500.0, 1e4};  // sigma_1^{-2}
  GammaPrior v_prec{50.0, 0.01};       // 1/v_ik^2
  BetaPrior phi_beta{20.0, 1.5};       // (phi_ik+1)/2
  NormalPrior mu_normal{0.0, 1.0};
  WishartPrior psi_prec;                     // Psi^{-1}
  double x0_variance = std::nan("");         // nan = 1e6 * var(channel 1), set at validation
  Vector delta0_mean;                        // defaults to zeros(p)
  Matrix delta0_cov;                         // defaults to I(p)
  VolatilityInit w_init;                     // TVAR innovations volatility
  VolatilityInit sigma_init;                 // per-channel observation volatilities
  double y0_variance = 1e6;                  // M+ only: diffuse prior for latent y_0
  Matrix K_matrix;                           // optional per-(i,k) threshold range multiplier; empty = scalar config K
};

// Priors with all data-dependent defaults resolved to concrete numbers.
struct ResolvedPriors : PriorSpec {
  double x0_var = 1e6;
  double w_s0 = 1.0;
  Vector sigma_s0;  // size m-1, channels 2..m
};

struct LtHyper {
  Matrix mu;   // (m-1) x r  (or m x m for the A block)
  Matrix phi;
  Matrix v_sq;
};

// One complete configuration of all time-indexed latent quantities.
// x is indexed t = -(n-1)..T with n = max(p, r); delta and beta include the
// uncertain initial state at t = 0.
struct LatentStateSet {
  Vector x;                    // length T + n; x(idx) with idx = t + n - 1
  Matrix delta;                // p x (T+1), column t
  std::vector<Matrix> beta;    // size m-1; beta[i-2] is r x (T+1)
  Matrix thresholds;           // (m-1) x r
  LtHyper hyper;               // (m-1) x r each
  Matrix psi;                  // p x p
  Vector w;                    // length T, w(t-1) = w_t
  double sigma1_sq = 1.0;
  Matrix sigma_sq;             // (m-1) x T, channels 2..m

  // M+ only
  std::vector<Matrix> alpha;   // size m; alpha[i-1] is m x (T+1)
  Matrix a_thresholds;         // m x m
  LtHyper a_hyper;             // m x m each
  Vector y0;                   // length m

  int n_state = 0;  // max(p, r)

  double x_at(int t) const { return x(t + n_state - 1); }
  double& x_at(int t) { return x(t + n_state - 1); }

  // thresholded loading b_ikt; channel index i in 1..m, lag index k in 1..r
  double loading(int i, int k, int t, int anchor_s) const {
    if (i == 1) return k == anchor_s ? 1.0 : 0.0;
    double b = beta[i - 2](k - 1, t);
    return std::abs(b) >= thresholds(i - 2, k - 1) ? b : 0.0;
  }

  // thresholded VAR coefficient a_ijt (M+)
  double var_coeff(int i, int j, int t) const {
    double a = alpha[i - 1](j - 1, t);
    return std::abs(a) >= a_thresholds(i - 1, j - 1) ? a : 0.0;
  }
};

// Everything a simulation run produced: the generating state and the data.
struct TruthRecord {
  LatentStateSet truth;
  ObservationMatrix data;
  int regeneration_count = 0;
};

}  // namespace ltdfm

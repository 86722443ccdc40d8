#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ltdfm/config.hpp"
#include "ltdfm/rng.hpp"
#include "ltdfm/types.hpp"

namespace ltdfm {

// Fixed sweep order; steps can be disabled to freeze blocks in tests.
struct SweepPlan {
  bool x_states = true;
  bool delta = true;
  bool w_vol = true;
  bool sigma = true;
  bool loadings = true;
  bool psi = true;
  bool a_block = true;  // M+ only
  bool y0 = true;       // M+ only
};

struct AcceptCounts {
  long long beta_acc = 0, beta_tot = 0;
  long long thr_acc = 0, thr_tot = 0;
  long long mu_acc = 0, mu_tot = 0;
  long long v_acc = 0, v_tot = 0;
  long long phi_acc = 0, phi_tot = 0;

  void add(const AcceptCounts& o) {
    beta_acc += o.beta_acc;
    beta_tot += o.beta_tot;
    thr_acc += o.thr_acc;
    thr_tot += o.thr_tot;
    mu_acc += o.mu_acc;
    mu_tot += o.mu_tot;
    v_acc += o.v_acc;
    v_tot += o.v_tot;
    phi_acc += o.phi_acc;
    phi_tot += o.phi_tot;
  }
};

struct AcceptanceRates {
  double beta_points = 1.0;
  double thresholds = 1.0;
  double mu = 1.0;
  double v = 1.0;
  double phi = 1.0;
  double a_points = 1.0;
  double a_thresholds = 1.0;
  double a_mu = 1.0;
  double a_v = 1.0;
  double a_phi = 1.0;
};

// One thinned posterior draw. Long trajectories are stored column-compressed
// (one float32 series per state component, contiguous in time); scalars,
// hyper-parameters and the conditional log-likelihood are kept in double.
struct DrawRecord {
  double loglik = 0.0;
  double sigma1_sq = 1.0;
  std::vector<double> psi;           // p*p row-major
  std::vector<double> thresholds;    // (m-1)*r
  std::vector<double> hyper;         // mu, phi, v_sq blocks, each (m-1)*r
  std::vector<double> a_thresholds;  // m*m (M+)
  std::vector<double> a_hyper;       // 3*m*m (M+)
  std::vector<double> y0;            // m (M+)
  std::vector<float> x;              // T+n
  std::vector<float> delta;          // p series of length T+1
  std::vector<float> w;              // T
  std::vector<float> sigma;          // (m-1) series of length T
  std::vector<float> beta;           // (m-1)*r series of length T+1
  std::vector<float> alpha;          // m*m series of length T+1 (M+)
};

struct PosteriorDraws {
  ModelConfig config;
  ResolvedPriors prior;
  int T = 0;
  std::uint64_t seed = 0;
  std::vector<DrawRecord> records;
  AcceptanceRates acceptance;

  int n_draws() const { return static_cast<int>(records.size()); }
  int n_state() const { return config.state_dim(); }
  LatentStateSet state(int draw) const;
};

DrawRecord pack_record(const LatentStateSet& st, const ModelConfig& cfg, int T, double loglik);

// Full conditional observation log-density log p(y | states, params).
double conditional_loglik(const LatentStateSet& st, const ModelConfig& cfg, const Matrix& y);

// Assembles the Metropolis-within-Gibbs sweep. Channel-indexed blocks run in
// parallel with rng substreams derived from (seed, sweep, block); results are
// bit-identical for any thread count.
class Sampler {
 public:
  Sampler(const ModelInputs& inputs, const ObservationMatrix& data);

  LatentStateSet& state() { return st_; }
  const LatentStateSet& state() const { return st_; }
  void set_state(const LatentStateSet& st);
  void set_data(const Matrix& values);
  void init_default();

  const ModelConfig& config() const { return cfg_; }
  const ResolvedPriors& prior() const { return prior_; }
  SweepPlan& plan() { return plan_; }

  void sweep(std::uint64_t sweep_index);

  // individual blocks, conditional on everything else in the current state
  void sample_latent_x(Rng& rng);
  void sample_tvar_coefficients(Rng& rng);
  void sample_w(Rng& rng);
  void sample_sigma1(Rng& rng);
  void sample_sigma_channel(int i, Rng& rng);
  void sample_loadings_channel(int i, Rng& rng, AcceptCounts& counts);
  void sample_psi(Rng& rng);
  void sample_a_row(int i, Rng& rng, AcceptCounts& counts);
  void sample_y0(Rng& rng);

  // conjugate posterior parameters, exposed for exact checks
  GammaPrior sigma1_posterior_params() const;
  std::pair<double, Matrix> psi_posterior_params() const;  // (dof, scale)
  std::pair<Vector, Matrix> y0_posterior_params() const;   // (mean, covariance)

  double loglik() const { return conditional_loglik(st_, cfg_, y_); }

  // proposal-scale adaptation (burn-in only); freeze afterwards
  void adapt_proposals();
  void reset_adapt_window();

  // copies state, counters and adaptation scales (checkpoint resume)
  void restore_from(const Sampler& other);

  AcceptanceRates acceptance_rates() const;
  const std::vector<AcceptCounts>& channel_counts() const { return counts_; }
  std::vector<AcceptCounts>& mutable_channel_counts() { return counts_; }
  std::vector<AcceptCounts>& mutable_a_counts() { return a_counts_; }
  Matrix& phi_scales() { return phi_scale_; }
  Matrix& a_phi_scales() { return a_phi_scale_; }
  Matrix& phi_window_acc() { return phi_win_acc_; }
  Matrix& phi_window_tot() { return phi_win_tot_; }
  Matrix& a_phi_window_acc() { return a_phi_win_acc_; }
  Matrix& a_phi_window_tot() { return a_phi_win_tot_; }

  std::uint64_t master_seed = 0;

 private:
  double channel_K(int i, int k) const;
  Vector factor_vector(int t) const;              // (x_t, ..., x_{t-r+1})
  double var_offset(int i, int t) const;          // (A_t y_{t-1})_i, 0 for Model M
  double loading_fit(int i, int t) const;         // sum_k b_ikt x_{t-k+1}

  ModelConfig cfg_;
  ResolvedPriors prior_;
  Matrix y_;  // T x m
  int T_ = 0;
  LatentStateSet st_;
  SweepPlan plan_;

  std::vector<AcceptCounts> counts_;    // per channel 2..m
  std::vector<AcceptCounts> a_counts_;  // per row 1..m (M+)
  Matrix phi_scale_, a_phi_scale_;
  Matrix phi_win_acc_, phi_win_tot_, a_phi_win_acc_, a_phi_win_tot_;
};

struct RunOptions {
  std::optional<LatentStateSet> init;
  SweepPlan plan;
  bool keep_records = true;
  std::function<void(const DrawRecord&)> on_record;
  // checkpoint hook, called every config.mcmc.checkpoint_every sweeps
  std::function<void(const Sampler&, int sweep, int records_written)> on_checkpoint;
  int start_sweep = 0;        // resume: sweeps already completed
  int records_written = 0;    // resume: thinned records already emitted
  int stop_after_sweeps = 0;  // testing/checkpointing: stop early, 0 = off
  const Sampler* resume_from = nullptr;  // restored sampler (adaptation state)
};

// Executes burn_in + draws*thin sweeps and collects thinned draws with their
// conditional log-likelihoods; fully reproducible from config.mcmc.rng_seed.
PosteriorDraws run_mcmc(const ModelInputs& inputs, const ObservationMatrix& data,
                        const RunOptions& options = {});

}  // namespace ltdfm

// Acceptance suite: one criterion per function, one pass/fail line each.
// Run all: ./acceptance        Run selected: ./acceptance 3 5 9
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "ltdfm/csv.hpp"
#include "ltdfm/decomposition.hpp"
#include "ltdfm/discount.hpp"
#include "ltdfm/draws_io.hpp"
#include "ltdfm/impulse.hpp"
#include "ltdfm/latent_threshold.hpp"
#include "ltdfm/sampler.hpp"
#include "ltdfm/simulate.hpp"
#include "ltdfm/summaries.hpp"
#include "oracles.hpp"

using namespace ltdfm;
namespace fs = std::filesystem;

namespace {

struct Checker {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// criterion 1: sparsity-probability formula

bool criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  c.expect(std::abs(sparsity_probability(3.2) - 0.25) < 0.01, "value at K=3.2");
  c.expect(std::abs(sparsity_probability(4.0) - 0.20) < 0.01, "value at K=4");
  c.expect(std::abs(sparsity_probability(5.3) - 0.15) < 0.01, "value at K=5.3");

  // large-K approximation: absolute gap < 0.01 from K = 2 on (the relative
  // gap is 2.1% at exactly K=2 and falls below 1% near K=2.3)
  const double a = std::sqrt(2.0 / 3.14159265358979323846);
  for (double K = 2.0; K <= 12.0; K += 0.25) {
    c.expect(std::abs(sparsity_probability(K) - a / K) < 0.01,
             "large-K absolute gap at K=" + std::to_string(K));
    if (K >= 2.5)
      c.expect(std::abs(sparsity_probability(K) - a / K) / (a / K) < 0.01,
               "large-K relative gap at K=" + std::to_string(K));
  }

  // 1e6-draw Monte Carlo prior simulation (mean-zero process, several scales)
  Rng rng(314);
  for (double u : {0.7, 1.8}) {
    for (double K : {2.0, 3.0, 5.0}) {
      const int n = 1000000;
      int active = 0;
      for (int i = 0; i < n; ++i) {
        double beta = rng.normal(0.0, u);
        double d = rng.uniform(0.0, K * u);
        if (std::abs(beta) >= d) ++active;
      }
      double p_hat = static_cast<double>(active) / n;
      double p = sparsity_probability(K);
      double se = std::sqrt(p * (1.0 - p) / n);
      c.expect(std::abs(p_hat - p) < 3.0 * se,
               "MC check u=" + std::to_string(u) + " K=" + std::to_string(K));
    }
  }
  double dt = elapsed_s(t0);
  c.expect(dt < 60.0, "runtime " + std::to_string(dt) + "s exceeds 1 min");
  std::printf("[%s] criterion 1: sparsity-probability formula (values, large-K, 1e6-draw MC) "
              "[%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", dt, c.detail.empty() ? "" : " -- ", c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 2: kernel oracle equivalence

bool criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  Rng rng(2718);
  int tested = 0;
  for (int rep = 0; rep < 120; ++rep) {
    auto [spec, obs] = oracle::random_spec(rng);
    SmoothedMoments sm = kalman_smooth_moments(spec, obs);
    oracle::JointMoments jm = oracle::joint_gaussian_smoother(spec, obs);
    for (int t = 0; t <= spec.T; ++t) {
      c.expect((sm.mean[t] - jm.mean[t]).cwiseAbs().maxCoeff() < 1e-8,
               "smoothed mean off at spec " + std::to_string(rep));
      c.expect((sm.cov[t] - jm.cov[t]).cwiseAbs().maxCoeff() < 1e-8,
               "smoothed cov off at spec " + std::to_string(rep));
      if (!c.ok) break;
    }
    ++tested;
    if (!c.ok) break;
  }
  c.expect(tested >= 100, "fewer than 100 specs tested");

  // FFBS draw moments vs the smoother, 50,000 draws
  oracle::RandomSpecOptions opt;
  opt.max_T = 3;
  opt.max_state = 2;
  opt.max_obs = 2;
  opt.allow_missing = false;
  Rng rng2(2719);
  auto [spec, obs] = oracle::random_spec(rng2, opt);
  SmoothedMoments sm = kalman_smooth_moments(spec, obs);
  const int N = 50000;
  const int n = spec.state_dim();
  std::vector<Vector> mean(spec.T + 1, Vector::Zero(n));
  std::vector<Matrix> sq(spec.T + 1, Matrix::Zero(n, n));
  Rng draw_rng(2720);
  for (int i = 0; i < N; ++i) {
    auto draw = ffbs_sample(spec, obs, draw_rng);
    for (int t = 0; t <= spec.T; ++t) {
      mean[t] += draw[t];
      sq[t] += draw[t] * draw[t].transpose();
    }
  }
  for (int t = 0; t <= spec.T; ++t) {
    mean[t] /= N;
    Matrix cov = sq[t] / N - mean[t] * mean[t].transpose();
    for (int i = 0; i < n; ++i) {
      double se = std::sqrt(sm.cov[t](i, i) / N);
      c.expect(std::abs(mean[t](i) - sm.mean[t](i)) < 4.0 * se, "ffbs mean off");
      for (int j = 0; j < n; ++j) {
        double se_cov = std::sqrt(
            (sm.cov[t](i, i) * sm.cov[t](j, j) + sm.cov[t](i, j) * sm.cov[t](i, j)) / N);
        c.expect(std::abs(cov(i, j) - sm.cov[t](i, j)) < 4.0 * se_cov, "ffbs cov off");
      }
    }
  }
  double dt = elapsed_s(t0);
  c.expect(dt < 300.0, "runtime exceeds 5 min");
  std::printf("[%s] criterion 2: kernel oracle equivalence (120 random specs, 50k FFBS draws) "
              "[%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", dt, c.detail.empty() ? "" : " -- ", c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 3: discount-volatility degeneracy at lambda = 1

bool criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  Rng gen(31);
  const int T = 40;
  Vector e(T);
  for (int t = 0; t < T; ++t) e(t) = 0.8 * gen.normal();
  const double n0 = 3.0, s0 = 0.5;
  double shape = 0.5 * (n0 + T);
  double rate = 0.5 * (n0 * s0 + e.squaredNorm());
  std::vector<double> precisions;
  Rng rng(32);
  for (int i = 0; i < 20000; ++i) {
    VolatilityPath p = discount_variance_ffbs(e, 1.0, n0, s0, rng);
    for (int t = 1; t < T; ++t)
      if (p.variances(t) != p.variances(0)) {
        c.expect(false, "path not constant at lambda=1");
        break;
      }
    precisions.push_back(1.0 / p.variances(0));
  }
  double pval = oracle::ks_one_sample_pvalue(
      precisions, [&](double x) { return oracle::gamma_cdf(x, shape, rate); });
  c.expect(pval > 0.01, "KS p = " + std::to_string(pval));
  double dt = elapsed_s(t0);
  std::printf("[%s] criterion 3: lambda=1 path equals the static conjugate posterior "
              "(KS p = %.3f over 20k draws) [%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", pval, dt, c.detail.empty() ? "" : " -- ",
              c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// shared: desk-scale constant-AR(2) fit used by criterion 4

ModelInputs ar2_inputs(int T) {
  ModelConfig cfg;
  cfg.m = 3;
  cfg.p = 2;
  cfg.r = 1;
  cfg.s = 1;
  cfg.lambda_w = 0.99;
  cfg.lambda_sigma = 0.99;
  cfg.mcmc.burn_in = 400;
  cfg.mcmc.draws = 800;
  cfg.mcmc.thin = 2;
  cfg.mcmc.rng_seed = 404;
  PriorSpec prior = default_priors(cfg);
  prior.sigma1_prec = {2.0, 0.2};
  prior.x0_variance = 400.0;
  prior.w_init = {4.0, 4.0};
  prior.sigma_init = {4.0, 0.25};
  // constant-coefficient target: keep the random-walk increments tight
  prior.psi_prec.dof = 200.0;
  prior.psi_prec.scale = 2.5e4 * Matrix::Identity(2, 2);
  prior.delta0_cov = 0.25 * Matrix::Identity(2, 2);
  ObservationMatrix dummy;
  dummy.values = Matrix::Zero(T, 3);
  return validate_config(cfg, prior, dummy);
}

bool criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  const int T = 1500;  // long enough that the realization's own AR estimate
                       // sits within the stated tolerance of the truth
  const double rho = 0.95, freq = 0.1;
  ModelInputs inputs = ar2_inputs(T);
  GenerationSpec gen;
  Matrix dp(2, T + 1);
  dp.row(0).setConstant(2.0 * rho * std::cos(6.283185307179586 * freq));
  dp.row(1).setConstant(-rho * rho);
  gen.delta_path = dp;
  gen.w_path = Vector::Constant(T, 4.0);
  gen.sigma1_sq = 0.09;
  gen.sigma_path = Matrix::Constant(2, T, 0.25);
  gen.x_init = Vector::Zero(2);
  gen.loadings.assign(2, std::vector<LtProcessSpec>(1));
  gen.loadings[0][0] = LtProcessSpec{0.7, 0.97, 0.02, 0.1, {}};
  gen.loadings[1][0] = LtProcessSpec{-0.5, 0.97, 0.02, 0.1, {}};
  Rng grng = Rng::stream(41, 1);
  TruthRecord rec = simulate_dataset(inputs, T, gen, grng);

  PosteriorDraws draws = run_mcmc(inputs, rec.data);

  // identities on every stored draw
  int degenerate = 0;
  for (int i = 0; i < draws.n_draws(); ++i) {
    LatentStateSet st = draws.state(i);
    ComponentSet comps;
    try {
      comps = eigen_components(st.x, st.n_state, st.delta);
    } catch (const numerical_error&) {
      ++degenerate;
      continue;
    }
    for (int t = 1; t <= T; ++t) {
      int qp = static_cast<int>(comps.at(t).qp.size());
      int re = static_cast<int>(comps.at(t).real_roots.size());
      if (2 * qp + re != 2) {
        c.expect(false, "count conservation failed");
        break;
      }
      double x = st.x_at(t);
      if (std::abs(comps.reconstruction(t) - x) > 1e-8 * std::max(1.0, std::abs(x))) {
        c.expect(false, "reconstruction identity failed at draw " + std::to_string(i));
        break;
      }
    }
    if (!c.ok) break;
  }
  c.expect(degenerate <= draws.n_draws() / 100,
           "degenerate draws: " + std::to_string(degenerate));

  // analytic recovery of (modulus, frequency)
  ComponentPosterior cp = component_posterior(draws);
  c.expect(cp.target_qp == 1, "expected one quasi-periodic component");
  if (cp.target_qp == 1) {
    double mf = 0.0, mm = 0.0;
    for (int t = 1; t <= T; ++t) {
      mf += cp.qp[0].frequency(0, t - 1);
      mm += cp.qp[0].modulus(0, t - 1);
    }
    mf /= T;
    mm /= T;
    c.expect(std::abs(mf - freq) < 0.005,
             "frequency " + std::to_string(mf) + " vs " + std::to_string(freq));
    c.expect(std::abs(mm - rho) < 0.02,
             "modulus " + std::to_string(mm) + " vs " + std::to_string(rho));
  }
  double dt = elapsed_s(t0);
  std::printf("[%s] criterion 4: decomposition identities on every draw + constant-AR(2) "
              "(modulus, frequency) recovery [%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", dt, c.detail.empty() ? "" : " -- ", c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 5: Model M recovery study

bool criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  const int T = 400, m = 5, p = 2, r = 2;
  ModelConfig cfg;
  cfg.m = m;
  cfg.p = p;
  cfg.r = r;
  cfg.s = 1;
  cfg.lambda_w = 0.95;
  cfg.lambda_sigma = 0.95;
  cfg.mcmc.burn_in = 1000;
  cfg.mcmc.draws = 2000;
  cfg.mcmc.thin = 2;
  cfg.mcmc.rng_seed = 505;
  PriorSpec prior = default_priors(cfg);
  prior.sigma1_prec = {2.0, 0.2};
  prior.x0_variance = 1000.0;
  prior.w_init = {4.0, 25.0};
  prior.sigma_init = {4.0, 0.25};
  prior.psi_prec.dof = 20.0;
  prior.psi_prec.scale = 2500.0 * Matrix::Identity(p, p);
  prior.delta0_cov = 0.25 * Matrix::Identity(p, p);
  ObservationMatrix dummy;
  dummy.values = Matrix::Zero(T, m);
  ModelInputs inputs = validate_config(cfg, prior, dummy);

  // truth: drifting quasi-periodic TVAR(2); two strong and two truly-zero
  // loading processes
  GenerationSpec gen;
  Matrix dp(p, T + 1);
  for (int t = 0; t <= T; ++t) {
    double f = 0.10 + 0.05 * t / T;
    dp(0, t) = 2.0 * 0.9 * std::cos(6.283185307179586 * f);
    dp(1, t) = -0.81;
  }
  gen.delta_path = dp;
  gen.w_path = Vector::Constant(T, 25.0);
  gen.sigma1_sq = 0.09;
  gen.sigma_path = Matrix::Constant(m - 1, T, 0.25);
  gen.x_init = Vector::Zero(p);
  gen.loadings.assign(m - 1, std::vector<LtProcessSpec>(r));
  gen.loadings[0][0] = LtProcessSpec{0.9, 0.97, 0.02, 0.15, {}};   // strong (2,1)
  gen.loadings[0][1] = LtProcessSpec{0.4, 0.9, 0.01, 0.05, {}};
  gen.loadings[1][0] = LtProcessSpec{-0.5, 0.9, 0.01, 0.05, {}};
  gen.loadings[1][1] = LtProcessSpec{-0.8, 0.97, 0.02, 0.15, {}};  // strong (3,2)
  gen.loadings[2][0] = LtProcessSpec{0.0, 0.5, 0.0, 0.4, {}};      // zero (4,1)
  gen.loadings[2][1] = LtProcessSpec{0.5, 0.9, 0.01, 0.05, {}};
  gen.loadings[3][0] = LtProcessSpec{0.45, 0.9, 0.01, 0.05, {}};
  gen.loadings[3][1] = LtProcessSpec{0.0, 0.5, 0.0, 0.4, {}};      // zero (5,2)
  Rng grng = Rng::stream(51, 1);
  TruthRecord rec = simulate_dataset(inputs, T, gen, grng);

  PosteriorDraws draws = run_mcmc(inputs, rec.data);
  double dt_fit = elapsed_s(t0);
  c.expect(dt_fit < 600.0, "fit runtime " + std::to_string(dt_fit) + "s exceeds 10 min");

  // standardized posterior-mean x correlates with truth > 0.95
  auto x_summary = summarize_trajectories(draws, "x", 0.95);
  Vector xm(T), xt(T);
  for (int t = 1; t <= T; ++t) {
    xm(t - 1) = x_summary[0].stats(0, t - 1);
    xt(t - 1) = rec.truth.x_at(t);
  }
  auto corr = [](const Vector& a, const Vector& b) {
    double ma = a.mean(), mb = b.mean();
    double num = ((a.array() - ma) * (b.array() - mb)).sum();
    double den = std::sqrt((a.array() - ma).square().sum() * (b.array() - mb).square().sum());
    return num / den;
  };
  double xcorr = corr(xm, xt);
  c.expect(xcorr > 0.95, "x correlation " + std::to_string(xcorr));

  // shrinkage probabilities: zero processes < 0.2, strong ones > 0.9
  Matrix pr = shrinkage_probabilities(draws).loadings;
  auto row = [&](int i, int k) { return (i - 2) * r + (k - 1); };
  double zero1 = pr.row(row(4, 1)).mean(), zero2 = pr.row(row(5, 2)).mean();
  double strong1 = pr.row(row(2, 1)).mean(), strong2 = pr.row(row(3, 2)).mean();
  c.expect(zero1 < 0.2, "Pr for zero (4,1) = " + std::to_string(zero1));
  c.expect(zero2 < 0.2, "Pr for zero (5,2) = " + std::to_string(zero2));
  c.expect(strong1 > 0.9, "Pr for strong (2,1) = " + std::to_string(strong1));
  c.expect(strong2 > 0.9, "Pr for strong (3,2) = " + std::to_string(strong2));

  // coverage: truth inside the 95% bands at >= 85% of time points for x and delta
  int x_cov = 0;
  for (int t = 1; t <= T; ++t)
    if (rec.truth.x_at(t) >= x_summary[0].stats(1, t - 1) &&
        rec.truth.x_at(t) <= x_summary[0].stats(2, t - 1))
      ++x_cov;
  c.expect(x_cov >= static_cast<int>(0.85 * T),
           "x coverage " + std::to_string(double(x_cov) / T));
  auto d_summary = summarize_trajectories(draws, "delta", 0.95);
  for (int j = 0; j < p; ++j) {
    int cov = 0;
    for (int t = 1; t <= T; ++t)
      if (dp(j, t) >= d_summary[j].stats(1, t - 1) && dp(j, t) <= d_summary[j].stats(2, t - 1))
        ++cov;
    c.expect(cov >= static_cast<int>(0.85 * T),
             "delta" + std::to_string(j + 1) + " coverage " + std::to_string(double(cov) / T));
  }
  double dt = elapsed_s(t0);
  std::printf("[%s] criterion 5: recovery study m=5 T=400 (x corr %.4f, zero Pr %.2f/%.2f, "
              "strong Pr %.2f/%.2f, coverage ok) [%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", xcorr, zero1, zero2, strong1, strong2, dt,
              c.detail.empty() ? "" : " -- ", c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 6: nesting and DIC model comparison

ModelInputs spill_inputs(int T, ModelVariant variant, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.m = 3;
  cfg.p = 1;
  cfg.r = 1;
  cfg.s = 1;
  cfg.variant = variant;
  cfg.lambda_w = 0.95;
  cfg.lambda_sigma = 0.95;
  cfg.mcmc.burn_in = 300;
  cfg.mcmc.draws = 500;
  cfg.mcmc.thin = 2;
  cfg.mcmc.rng_seed = seed;
  PriorSpec prior = default_priors(cfg);
  prior.sigma1_prec = {2.0, 0.08};
  prior.x0_variance = 100.0;
  prior.w_init = {4.0, 9.0};
  prior.sigma_init = {4.0, 0.5};
  prior.psi_prec.dof = 20.0;
  prior.psi_prec.scale = 50.0 * Matrix::Identity(1, 1);
  prior.delta0_cov = 0.25 * Matrix::Identity(1, 1);
  prior.y0_variance = 100.0;
  ObservationMatrix dummy;
  dummy.values = Matrix::Zero(T, 3);
  return validate_config(cfg, prior, dummy);
}

bool criterion6() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;

  // nesting: M+ with the A block frozen at zero is bit-for-bit Model M
  {
    const int T = 40;
    ModelInputs m = spill_inputs(T, ModelVariant::M, 61);
    ModelInputs mp = spill_inputs(T, ModelVariant::MPlus, 61);
    m.config.mcmc.burn_in = 10;
    m.config.mcmc.draws = 30;
    mp.config.mcmc.burn_in = 10;
    mp.config.mcmc.draws = 30;
    GenerationSpec gen;
    gen.delta_path = Matrix::Constant(1, T + 1, 0.5);
    gen.w_path = Vector::Constant(T, 9.0);
    gen.sigma1_sq = 0.04;
    gen.sigma_path = Matrix::Constant(2, T, 0.25);
    gen.x_init = Vector::Zero(1);
    Rng grng = Rng::stream(62, 1);
    TruthRecord rec = simulate_dataset(m, T, gen, grng);
    RunOptions opts_mp;
    opts_mp.plan.a_block = false;
    opts_mp.plan.y0 = false;
    PosteriorDraws dm = run_mcmc(m, rec.data);
    PosteriorDraws dmp = run_mcmc(mp, rec.data, opts_mp);
    bool same = dm.n_draws() == dmp.n_draws();
    for (int i = 0; same && i < dm.n_draws(); ++i) {
      same = dm.records[i].loglik == dmp.records[i].loglik &&
             dm.records[i].x == dmp.records[i].x && dm.records[i].beta == dmp.records[i].beta;
    }
    c.expect(same, "nesting not bit-for-bit");
  }

  // 10 datasets simulated from M+ with strong spill-over; DIC must prefer M+
  // in at least 9
  const int T = 160;
  int wins = 0;
  for (int exp_i = 0; exp_i < 10; ++exp_i) {
    ModelInputs gen_inputs = spill_inputs(T, ModelVariant::MPlus, 600 + exp_i);
    GenerationSpec gen;
    gen.delta_path = Matrix::Constant(1, T + 1, 0.3);
    gen.w_path = Vector::Constant(T, 9.0);
    gen.sigma1_sq = 0.04;
    Matrix sp(2, T);
    sp.row(0).setConstant(1.0);
    sp.row(1).setConstant(0.0225);
    gen.sigma_path = sp;
    gen.x_init = Vector::Zero(1);
    gen.loadings.assign(2, std::vector<LtProcessSpec>(1));
    gen.loadings[0][0] = LtProcessSpec{0.0, 0.5, 0.0, 0.5, {}};
    gen.loadings[1][0] = LtProcessSpec{0.0, 0.5, 0.0, 0.5, {}};
    gen.var_coeffs.assign(3, std::vector<LtProcessSpec>(3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gen.var_coeffs[i][j] = LtProcessSpec{0.0, 0.5, 0.0, 0.5, {}};
    gen.var_coeffs[2][1] = LtProcessSpec{0.5, 0.98, 0.01, 0.05, {}};
    gen.y0 = Vector::Zero(3);
    Rng grng = Rng::stream(63, static_cast<std::uint64_t>(exp_i));
    TruthRecord rec = simulate_dataset(gen_inputs, T, gen, grng);

    ModelInputs fit_m = spill_inputs(T, ModelVariant::M, 700 + exp_i);
    ModelInputs fit_mp = spill_inputs(T, ModelVariant::MPlus, 800 + exp_i);
    PosteriorDraws dm = run_mcmc(fit_m, rec.data);
    PosteriorDraws dmp = run_mcmc(fit_mp, rec.data);
    double dic_m = compute_dic(dm, rec.data).dic;
    double dic_mp = compute_dic(dmp, rec.data).dic;
    if (dic_mp < dic_m) ++wins;
  }
  c.expect(wins >= 9, "DIC(M+) < DIC(M) in only " + std::to_string(wins) + "/10");
  double dt = elapsed_s(t0);
  std::printf("[%s] criterion 6: nesting bit-for-bit; DIC prefers M+ on %d/10 spill-over "
              "datasets [%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", wins, dt, c.detail.empty() ? "" : " -- ",
              c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 7: impulse-response linear oracle

PosteriorDraws frozen_draws(int T, int n_draws, const Vector& delta, const Matrix& beta_vals,
                            int r, int s) {
  const int m = static_cast<int>(beta_vals.rows()) + 1;
  const int p = static_cast<int>(delta.size());
  ModelConfig cfg;
  cfg.m = m;
  cfg.p = p;
  cfg.r = r;
  cfg.s = s;
  cfg.mcmc.rng_seed = 71;
  PriorSpec prior = default_priors(cfg);
  prior.x0_variance = 1.0;
  prior.w_init = {4.0, 1.0};
  prior.sigma_init = {4.0, 0.5};
  PosteriorDraws draws;
  draws.config = cfg;
  static_cast<PriorSpec&>(draws.prior) = prior;
  draws.T = T;
  draws.seed = 71;
  Rng rng(72);
  for (int i = 0; i < n_draws; ++i) {
    LatentStateSet st;
    st.n_state = cfg.state_dim();
    st.x.resize(T + st.n_state);
    for (int j = 0; j < static_cast<int>(st.x.size()); ++j) st.x(j) = rng.normal();
    st.delta.resize(p, T + 1);
    for (int t = 0; t <= T; ++t) st.delta.col(t) = delta;
    st.w = Vector::Constant(T, 1.0);
    st.sigma1_sq = 0.01;
    st.sigma_sq = Matrix::Constant(m - 1, T, 0.01);
    st.beta.assign(m - 1, Matrix());
    for (int ch = 0; ch < m - 1; ++ch) {
      st.beta[ch].resize(r, T + 1);
      for (int k = 0; k < r; ++k) st.beta[ch].row(k).setConstant(beta_vals(ch, k));
    }
    st.thresholds = Matrix::Zero(m - 1, r);
    st.hyper.mu = beta_vals;
    st.hyper.phi = Matrix::Constant(m - 1, r, 0.9);
    st.hyper.v_sq = Matrix::Zero(m - 1, r);
    st.psi = Matrix::Zero(p, p);
    draws.records.push_back(pack_record(st, cfg, T, 0.0));
  }
  return draws;
}

bool criterion7() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  // constant-parameter AR(2), no thresholds: responses equal the analytic
  // impulse-weight convolution to 1e-6
  {
    const int T = 50, r = 2, horizon = 30;
    Vector delta(2);
    delta << 1.2, -0.5;
    Matrix beta_vals(2, 2);
    beta_vals << 0.8, -0.4, 0.3, 0.6;
    PosteriorDraws draws = frozen_draws(T, 10, delta, beta_vals, r, 1);
    ImpulseRequest req;
    req.origins = {10, 25, 40};
    req.horizon = horizon;
    req.shock = 2.5;
    ImpulseSurface surf = impulse_response(draws, req);
    Vector psi = oracle::ar_impulse_weights(delta, horizon);
    for (size_t oi = 0; oi < req.origins.size(); ++oi) {
      for (int h = 1; h <= horizon; ++h) {
        double want1 = 2.5 * psi(h - 1);
        if (std::abs(surf.responses[oi](0, h - 1) - want1) > 1e-6 * std::max(1.0, std::abs(want1)))
          c.expect(false, "anchor mismatch at h=" + std::to_string(h));
        for (int ch = 0; ch < 2; ++ch) {
          double want = 0.0;
          for (int k = 1; k <= r; ++k)
            if (h - k >= 0) want += beta_vals(ch, k - 1) * psi(h - k);
          want *= 2.5;
          if (std::abs(surf.responses[oi](ch + 1, h - 1) - want) >
              1e-6 * std::max(1.0, std::abs(want)))
            c.expect(false, "channel mismatch at h=" + std::to_string(h));
        }
      }
    }
  }
  // anchor delay property: delta = 0, response exactly e at horizon s
  {
    const int s = 3, r = 3;
    Vector delta = Vector::Zero(3);
    Matrix beta_vals = Matrix::Zero(1, r);
    PosteriorDraws draws = frozen_draws(30, 4, delta, beta_vals, r, s);
    ImpulseRequest req;
    req.origins = {12};
    req.horizon = 8;
    req.shock = 1.7;
    ImpulseSurface surf = impulse_response(draws, req);
    for (int h = 1; h <= 8; ++h) {
      double want = (h == s) ? 1.7 : 0.0;
      c.expect(surf.responses[0](0, h - 1) == want,
               "delay property at h=" + std::to_string(h));
    }
  }
  double dt = elapsed_s(t0);
  std::printf("[%s] criterion 7: impulse responses match the analytic AR impulse-weight "
              "convolution (1e-6) and the exact anchor delay [%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", dt, c.detail.empty() ? "" : " -- ", c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 8: Geweke successive-conditional test

bool criterion8() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  const int T = 20;
  ModelConfig cfg;
  cfg.m = 2;
  cfg.p = 1;
  cfg.r = 1;
  cfg.s = 1;
  cfg.lambda_w = 0.9;
  cfg.lambda_sigma = 0.9;
  cfg.K = 3.0;
  cfg.mcmc.rng_seed = 81;
  cfg.mcmc.adapt_window = 0;  // fixed kernel
  // proper priors that keep the tiny instance comfortably stationary: a
  // successive-conditional chain wanders into quasi-absorbing explosive-TVAR
  // regimes when the prior puts real mass on |delta| > 1 at short T
  PriorSpec prior;
  prior.sigma1_prec = {3.0, 0.6};
  prior.v_prec = {5.0, 0.5};
  prior.phi_beta = {5.0, 2.0};
  prior.mu_normal = {0.0, 1.0};
  prior.psi_prec.dof = 30.0;
  prior.psi_prec.scale = Matrix::Constant(1, 1, 333.0);
  prior.x0_variance = 1.0;
  prior.delta0_mean = Vector::Zero(1);
  prior.delta0_cov = 0.01 * Matrix::Identity(1, 1);
  prior.w_init = {4.0, 1.0};
  prior.sigma_init = {4.0, 0.5};
  ObservationMatrix dummy;
  dummy.values = Matrix::Zero(T, 2);
  ModelInputs inputs = validate_config(cfg, prior, dummy);

  auto functionals = [&](const LatentStateSet& st, double* out) {
    out[0] = st.hyper.mu(0, 0);
    out[1] = st.hyper.phi(0, 0);
    out[2] = st.thresholds(0, 0);
    out[3] = std::log(st.w(9));
    out[4] = st.beta[0](0, 5);
  };

  // direct prior simulation
  const int n_prior = 5000;
  std::vector<std::vector<double>> prior_samples(5);
  {
    Rng rng = Rng::stream(82, 1);
    GenerationSpec gen;
    double f[5];
    for (int i = 0; i < n_prior; ++i) {
      TruthRecord rec = simulate_dataset(inputs, T, gen, rng);
      functionals(rec.truth, f);
      for (int k = 0; k < 5; ++k) prior_samples[k].push_back(f[k]);
    }
  }

  // successive-conditional chain: one sweep, then redraw the data. The
  // coupled (beta, hyper, threshold) block has an integrated autocorrelation
  // time of roughly 50-100 sweeps; the KS test assumes independent samples,
  // so thin well past that
  const int thin = 200, n_chain = 5000, sweeps = thin * n_chain;
  std::vector<std::vector<double>> chain_samples(5);
  {
    Rng init_rng = Rng::stream(83, 1);
    GenerationSpec gen;
    TruthRecord rec = simulate_dataset(inputs, T, gen, init_rng);
    Sampler smp(inputs, rec.data);
    smp.set_state(rec.truth);
    smp.master_seed = 84;
    Rng data_rng = Rng::stream(85, 1);
    Matrix y = rec.data.values;
    double f[5];
    for (int s = 1; s <= sweeps; ++s) {
      smp.set_data(y);
      smp.sweep(static_cast<std::uint64_t>(s));
      // y ~ p(y | latents)
      const LatentStateSet& st = smp.state();
      Matrix fit = fitted_means(st, cfg, y);
      for (int t = 1; t <= T; ++t) {
        y(t - 1, 0) = fit(t - 1, 0) + std::sqrt(st.sigma1_sq) * data_rng.normal();
        y(t - 1, 1) = fit(t - 1, 1) + std::sqrt(st.sigma_sq(0, t - 1)) * data_rng.normal();
      }
      if (s % thin == 0) {
        functionals(st, f);
        for (int k = 0; k < 5; ++k) chain_samples[k].push_back(f[k]);
      }
    }
  }

  const char* names[5] = {"mu", "phi", "d", "log w_10", "beta_5"};
  double min_p = 1.0;
  for (int k = 0; k < 5; ++k) {
    double p = oracle::ks_two_sample_pvalue(prior_samples[k], chain_samples[k]);
    min_p = std::min(min_p, p);
    c.expect(p > 0.01, std::string(names[k]) + " KS p = " + std::to_string(p));
  }
  double dt = elapsed_s(t0);
  std::printf("[%s] criterion 8: Geweke successive-conditional test, 5 functionals "
              "(min KS p = %.3f) [%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", min_p, dt, c.detail.empty() ? "" : " -- ",
              c.detail.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 9: end-to-end determinism through the CLI

bool criterion9() {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  const char* cli = LTDFM_CLI_PATH;
  fs::path dir = fs::temp_directory_path() / "ltdfm_acceptance_c9";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::string config = R"({
  "model": {"m": 3, "p": 2, "r": 2, "s": 2, "variant": "M",
    "lambda_w": 0.95, "lambda_sigma": 0.95,
    "mcmc": {"burn_in": 30, "draws": 60, "thin": 2, "rng_seed": 91}},
  "priors": {
    "sigma1_prec": {"shape": 2.0, "rate": 0.2},
    "x0_variance": 25.0,
    "w_init": {"n0": 4.0, "s0": 1.0},
    "sigma_init": {"n0": 4.0, "s0": 0.25},
    "psi_prec": {"dof": 20.0, "scale": 50.0},
    "delta0": {"cov": 0.25}
  },
  "simulate": {"T": 80, "mode": "fixed", "truth": {
    "delta_constant": [1.2, -0.5],
    "w_constant": 1.0,
    "sigma1_sq": 0.09,
    "sigma_constant": 0.25,
    "x_init": [0.0, 0.0],
    "loadings": [
      {"i": 2, "k": 1, "mu": 0.7, "phi": 0.95, "v": 0.03, "d": 0.1},
      {"i": 2, "k": 2, "mu": 0.0, "phi": 0.5, "v": 0.0, "d": 0.5},
      {"i": 3, "k": 1, "mu": -0.5, "phi": 0.95, "v": 0.03, "d": 0.1},
      {"i": 3, "k": 2, "mu": 0.3, "phi": 0.9, "v": 0.02, "d": 0.05}
    ]
  }}
})";
  std::ofstream(dir / "cfg.json") << config;

  auto run = [&](const std::string& args) {
    std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  for (const char* round : {"a", "b"}) {
    fs::path out = dir / round;
    std::string cfgp = (dir / "cfg.json").string();
    c.expect(run("simulate --config " + cfgp + " --out " + (out / "sim").string()) == 0,
             "simulate failed");
    c.expect(run("fit --config " + cfgp + " --data " + (out / "sim" / "data.csv").string() +
                 " --out " + (out / "fit").string()) == 0,
             "fit failed");
    std::string draws = (out / "fit" / "draws.bin").string();
    c.expect(run("postprocess --draws " + draws + " --request summaries --out " +
                 (out / "post").string()) == 0,
             "summaries failed");
    c.expect(run("postprocess --draws " + draws + " --request components --out " +
                 (out / "post").string()) == 0,
             "components failed");
    c.expect(run("postprocess --draws " + draws +
                 " --request impulse --origins 20,60 --horizon 15 --out " +
                 (out / "post").string()) == 0,
             "impulse failed");
    c.expect(run("postprocess --draws " + draws + " --request dic --data " +
                 (out / "sim" / "data.csv").string() + " --out " + (out / "post").string()) == 0,
             "dic failed");
  }
  const char* files[] = {"sim/data.csv",          "sim/truth.bin",
                         "sim/manifest.json",     "fit/draws.bin",
                         "post/trajectories.csv", "post/shrinkage.csv",
                         "post/loadings.csv",     "post/components.csv",
                         "post/channel_components.csv", "post/impulse.csv",
                         "post/dic.json"};
  for (const char* f : files) {
    std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    c.expect(!a.empty() && a == b, std::string(f) + " differs between identical-seed runs");
  }
  fs::remove_all(dir);
  double dt = elapsed_s(t0);
  std::printf("[%s] criterion 9: identical seeds give byte-identical draw files and exports "
              "[%.1fs]%s%s\n",
              c.ok ? "PASS" : "FAIL", dt, c.detail.empty() ? "" : " -- ", c.detail.c_str());
  return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  bool (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                          criterion6, criterion7, criterion8, criterion9};
  bool all_ok = true;
  for (int w : which) {
    if (w < 1 || w > 9) {
      std::fprintf(stderr, "unknown criterion %d\n", w);
      return 2;
    }
    all_ok = criteria[w - 1]() && all_ok;
  }
  return all_ok ? 0 : 1;
}

#include <doctest.h>

#include <numeric>

#include "ltdfm/latent_threshold.hpp"
#include "ltdfm/simulate.hpp"
#include "oracles.hpp"

using namespace ltdfm;

namespace {

ModelInputs small_inputs(int m, int p, int r, int s, int T, ModelVariant variant = ModelVariant::M) {
  ModelConfig cfg;
  cfg.m = m;
  cfg.p = p;
  cfg.r = r;
  cfg.s = s;
  cfg.variant = variant;
  cfg.lambda_w = 0.95;
  cfg.lambda_sigma = 0.95;
  PriorSpec prior = default_priors(cfg);
  prior.x0_variance = 1.0;
  prior.w_init = {4.0, 1.0};
  prior.sigma_init = {4.0, 0.5};
  prior.psi_prec.dof = 20.0;
  prior.psi_prec.scale = 50.0 * Matrix::Identity(p, p);
  prior.delta0_cov = 0.25 * Matrix::Identity(p, p);
  prior.y0_variance = 4.0;
  return validate_config_for_simulation(cfg, prior, T);
}

}  // namespace

TEST_CASE("noiseless generative limit is an exact deterministic recursion") {
  const int T = 40, m = 3, p = 2, r = 2, s = 1;
  ModelInputs inputs = small_inputs(m, p, r, s, T);
  GenerationSpec gen;
  Matrix dp(p, T + 1);
  dp.row(0).setConstant(1.2);
  dp.row(1).setConstant(-0.5);
  gen.delta_path = dp;
  gen.w_path = Vector::Zero(T);
  gen.sigma1_sq = 0.0;
  gen.sigma_path = Matrix::Zero(m - 1, T);
  Vector x0(inputs.config.state_dim());
  x0 << 0.5, 1.0;  // oldest first: x_{-1}, x_0
  gen.x_init = x0;
  gen.loadings.assign(m - 1, std::vector<LtProcessSpec>(r));
  double b[2][2] = {{0.7, -0.3}, {0.0, 0.9}};
  for (int i = 0; i < m - 1; ++i)
    for (int k = 0; k < r; ++k) {
      gen.loadings[i][k].mu = b[i][k];
      gen.loadings[i][k].phi = 0.5;
      gen.loadings[i][k].v = 0.0;
      gen.loadings[i][k].d = 0.0;
    }
  Rng rng(1);
  TruthRecord rec = simulate_dataset(inputs, T, gen, rng);

  // independent recursion
  std::vector<double> x(T + 2);
  x[0] = 0.5;  // x_{-1}
  x[1] = 1.0;  // x_0
  for (int t = 1; t <= T; ++t) x[t + 1] = 1.2 * x[t] - 0.5 * x[t - 1];
  for (int t = 1; t <= T; ++t) {
    CHECK(rec.truth.x_at(t) == doctest::Approx(x[t + 1]).epsilon(1e-12));
    CHECK(rec.data.values(t - 1, 0) == doctest::Approx(x[t + 1]).epsilon(1e-12));  // anchor s=1
    for (int i = 2; i <= m; ++i) {
      double expect = b[i - 2][0] * x[t + 1] + b[i - 2][1] * x[t];
      CHECK(rec.data.values(t - 1, i - 1) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("stationary variance of simulated x matches Yule-Walker within 5%") {
  const int T = 200000, p = 2;
  ModelInputs inputs = small_inputs(2, p, 1, 1, T);
  GenerationSpec gen;
  Matrix dp(p, T + 1);
  dp.row(0).setConstant(0.9);
  dp.row(1).setConstant(-0.4);
  gen.delta_path = dp;
  gen.w_path = Vector::Constant(T, 1.3);
  gen.sigma1_sq = 0.01;
  gen.sigma_path = Matrix::Constant(1, T, 0.01);
  gen.x_init = Vector::Zero(inputs.config.state_dim());
  gen.loadings.assign(1, std::vector<LtProcessSpec>(1));
  gen.loadings[0][0] = LtProcessSpec{0.0, 0.5, 0.0, 0.5, {}};
  Rng rng(2);
  TruthRecord rec = simulate_dataset(inputs, T, gen, rng);
  Vector coeffs(2);
  coeffs << 0.9, -0.4;
  double gamma0 = oracle::yule_walker_autocov(coeffs, 1.3)(0);
  // discard the transient from the zero start
  double sum = 0.0, ss = 0.0;
  int n = 0;
  for (int t = 2000; t <= T; ++t) {
    double v = rec.truth.x_at(t);
    sum += v;
    ss += v * v;
    ++n;
  }
  double var = ss / n - (sum / n) * (sum / n);
  CHECK(std::abs(var - gamma0) / gamma0 < 0.05);
}

TEST_CASE("active fraction under hyper-prior draws matches the sparsity formula (mu = 0)") {
  const double K = 3.0;
  const int T = 25, datasets = 2500;
  ModelInputs inputs = small_inputs(2, 1, 1, 1, T);
  GenerationSpec gen;
  gen.delta_path = Matrix::Constant(1, T + 1, 0.5);
  gen.w_path = Vector::Constant(T, 1.0);
  gen.sigma1_sq = 0.04;
  gen.sigma_path = Matrix::Constant(1, T, 0.04);
  gen.x_init = Vector::Zero(1);
  gen.loadings.assign(1, std::vector<LtProcessSpec>(1));
  gen.loadings[0][0].mu = 0.0;  // formula is exact in the mean-zero case
  Rng rng(3);
  std::vector<double> fractions;
  for (int dset = 0; dset < datasets; ++dset) {
    TruthRecord rec = simulate_dataset(inputs, T, gen, rng);
    int active = 0;
    for (int t = 1; t <= T; ++t)
      if (std::abs(rec.truth.beta[0](0, t)) >= rec.truth.thresholds(0, 0)) ++active;
    fractions.push_back(static_cast<double>(active) / T);
  }
  double mean = std::accumulate(fractions.begin(), fractions.end(), 0.0) / datasets;
  double sd = 0.0;
  for (double f : fractions) sd += (f - mean) * (f - mean);
  sd = std::sqrt(sd / (datasets - 1) / datasets);
  CHECK(std::abs(mean - sparsity_probability(K)) < 3.0 * sd);
}

TEST_CASE("seed determinism and basic contracts") {
  const int T = 60;
  ModelInputs inputs = small_inputs(3, 2, 2, 2, T, ModelVariant::MPlus);
  GenerationSpec gen;
  Rng r1 = Rng::stream(99, 1), r2 = Rng::stream(99, 1);
  TruthRecord a = simulate_dataset(inputs, T, gen, r1);
  TruthRecord b = simulate_dataset(inputs, T, gen, r2);
  CHECK(a.data.values == b.data.values);
  CHECK(a.truth.x == b.truth.x);
  CHECK(a.truth.delta == b.truth.delta);
  CHECK(a.truth.y0 == b.truth.y0);
  CHECK(a.data.T() == T);
  CHECK(a.data.m() == 3);
  CHECK((a.truth.w.array() > 0.0).all());
  CHECK((a.truth.sigma_sq.array() > 0.0).all());
  CHECK(a.truth.sigma1_sq > 0.0);
  CHECK(a.truth.x.allFinite());
}

TEST_CASE("explosive generation retries then reports a numerical error") {
  const int T = 120;
  ModelInputs inputs = small_inputs(2, 1, 1, 1, T);
  GenerationSpec gen;
  gen.delta_path = Matrix::Constant(1, T + 1, 1.5);  // fixed explosive AR(1)
  gen.w_path = Vector::Constant(T, 1.0);
  gen.x_init = Vector::Constant(1, 10.0);
  gen.explosion_guard = 1e6;
  gen.max_regenerations = 3;
  Rng rng(4);
  CHECK_THROWS_AS(simulate_dataset(inputs, T, gen, rng), numerical_error);
}

TEST_CASE("volatility path generation matches the discount filter construction in law") {
  // lambda = 1 degenerates to a constant path equal to the initial draw
  Rng rng(5);
  Vector v = simulate_volatility_path(20, 1.0, 4.0, 2.0, rng);
  for (int t = 1; t < 20; ++t) CHECK(v(t) == v(0));
  // moments: E[1/v_t] is constant in t under the martingale beta-gamma law
  const int reps = 200000;
  double sum1 = 0.0, sum10 = 0.0;
  Rng rng2(6);
  for (int i = 0; i < reps; ++i) {
    Vector path = simulate_volatility_path(10, 0.9, 6.0, 1.5, rng2);
    sum1 += 1.0 / path(0);
    sum10 += 1.0 / path(9);
  }
  double expect = 1.0 / 1.5;  // E[phi_0] = n0/(n0 s0)
  CHECK(sum1 / reps == doctest::Approx(expect).epsilon(0.02));
  CHECK(sum10 / reps == doctest::Approx(expect).epsilon(0.02));
}

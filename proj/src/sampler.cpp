#include "ltdfm/sampler.hpp"

#include "ltdfm/discount.hpp"
#include "ltdfm/dlm.hpp"
#include "ltdfm/latent_threshold.hpp"
#include "ltdfm/parallel.hpp"

namespace ltdfm {

namespace {
// rng stream families; ids are stable across variants so that shared blocks
// consume identical streams when M+ steps are disabled
enum StreamFamily : std::uint64_t {
  FAM_X = 1,
  FAM_DELTA = 2,
  FAM_W = 3,
  FAM_SIGMA1 = 4,
  FAM_SIGMA = 5,
  FAM_LOADINGS = 6,
  FAM_PSI = 7,
  FAM_A = 8,
  FAM_Y0 = 9,
};
}  // namespace

Sampler::Sampler(const ModelInputs& inputs, const ObservationMatrix& data)
    : cfg_(inputs.config), prior_(inputs.prior), y_(data.values), T_(data.T()) {
  master_seed = cfg_.mcmc.rng_seed;
  counts_.assign(std::max(0, cfg_.m - 1), AcceptCounts{});
  a_counts_.assign(cfg_.m, AcceptCounts{});
  phi_scale_ = Matrix::Ones(cfg_.m - 1, cfg_.r);
  a_phi_scale_ = Matrix::Ones(cfg_.m, cfg_.m);
  phi_win_acc_ = Matrix::Zero(cfg_.m - 1, cfg_.r);
  phi_win_tot_ = Matrix::Zero(cfg_.m - 1, cfg_.r);
  a_phi_win_acc_ = Matrix::Zero(cfg_.m, cfg_.m);
  a_phi_win_tot_ = Matrix::Zero(cfg_.m, cfg_.m);
  init_default();
}

void Sampler::set_state(const LatentStateSet& st) { st_ = st; }

void Sampler::set_data(const Matrix& values) {
  if (values.rows() != T_ || values.cols() != cfg_.m)
    throw config_error("set_data: dimension mismatch");
  y_ = values;
}

void Sampler::init_default() {
  const int m = cfg_.m, p = cfg_.p, r = cfg_.r, n = cfg_.state_dim(), T = T_;
  st_ = LatentStateSet{};
  st_.n_state = n;
  st_.x = Vector::Zero(T + n);
  // the anchor channel reads x_{t-s+1} directly; seed x from it
  for (int t = -(n - 1); t <= T; ++t) {
    int src = t + cfg_.s - 1;
    if (src >= 1 && src <= T) st_.x_at(t) = y_(src - 1, 0);
  }
  st_.delta = Matrix::Zero(p, T + 1);
  st_.psi = sym_pinv(prior_.psi_prec.dof * prior_.psi_prec.scale, "prior Psi precision mean", 0);
  st_.w = Vector::Constant(T, prior_.w_s0);
  st_.sigma1_sq = prior_.sigma1_prec.rate / prior_.sigma1_prec.shape / 10.0;
  st_.sigma_sq.resize(m - 1, T);
  for (int i = 2; i <= m; ++i) st_.sigma_sq.row(i - 2).setConstant(prior_.sigma_s0(i - 2));
  double phi0 = 2.0 * prior_.phi_beta.a / (prior_.phi_beta.a + prior_.phi_beta.b) - 1.0;
  double v0 = prior_.v_prec.rate / prior_.v_prec.shape;
  st_.hyper.phi = Matrix::Constant(m - 1, r, phi0);
  st_.hyper.v_sq = Matrix::Constant(m - 1, r, v0);

  // data-informed loadings start: per-channel ridge regression on the seeded
  // factor lags; coefficient paths creep slowly under the AR(1) prior, so a
  // cold zero start can take many sweeps to reach the mass
  Matrix F(T, r);
  for (int t = 1; t <= T; ++t)
    for (int k = 1; k <= r; ++k) F(t - 1, k - 1) = st_.x_at(t - k + 1);
  Matrix gram = F.transpose() * F;
  gram.diagonal().array() += 1e-3 * gram.trace() / r + 1e-12;
  Eigen::LLT<Matrix> gram_llt(gram);
  st_.hyper.mu = Matrix::Zero(m - 1, r);
  st_.beta.assign(m - 1, Matrix::Zero(r, T + 1));
  st_.thresholds.resize(m - 1, r);
  for (int i = 2; i <= m; ++i) {
    Vector bhat = gram_llt.solve(F.transpose() * y_.col(i - 1));
    for (int k = 1; k <= r; ++k) {
      double b = std::isfinite(bhat(k - 1)) ? bhat(k - 1) : 0.0;
      st_.hyper.mu(i - 2, k - 1) = b;
      st_.beta[i - 2].row(k - 1).setConstant(b);
      double range = lt_range(b, phi0, v0, channel_K(i, k));
      st_.thresholds(i - 2, k - 1) = std::min(0.5 * range, 0.5 * std::abs(b) + 1e-8);
    }
  }
  if (cfg_.variant == ModelVariant::MPlus) {
    st_.alpha.assign(m, Matrix::Zero(m, T + 1));
    st_.a_hyper.mu = Matrix::Zero(m, m);
    st_.a_hyper.phi = Matrix::Constant(m, m, phi0);
    st_.a_hyper.v_sq = Matrix::Constant(m, m, v0);
    st_.a_thresholds = Matrix::Constant(m, m, 0.5 * lt_range(0.0, phi0, v0, cfg_.K));
    st_.y0 = y_.row(0).transpose();
  }
}

double Sampler::channel_K(int i, int k) const {
  if (prior_.K_matrix.size() != 0) return prior_.K_matrix(i - 2, k - 1);
  return cfg_.K;
}

Vector Sampler::factor_vector(int t) const {
  Vector f(cfg_.r);
  for (int k = 1; k <= cfg_.r; ++k) f(k - 1) = st_.x_at(t - k + 1);
  return f;
}

double Sampler::var_offset(int i, int t) const {
  if (cfg_.variant != ModelVariant::MPlus) return 0.0;
  double o = 0.0;
  for (int j = 1; j <= cfg_.m; ++j) {
    double yprev = (t == 1) ? st_.y0(j - 1) : y_(t - 2, j - 1);
    o += st_.var_coeff(i, j, t) * yprev;
  }
  return o;
}

double Sampler::loading_fit(int i, int t) const {
  double s = 0.0;
  for (int k = 1; k <= cfg_.r; ++k) s += st_.loading(i, k, t, cfg_.s) * st_.x_at(t - k + 1);
  return s;
}

void Sampler::sample_latent_x(Rng& rng) {
  const int m = cfg_.m, p = cfg_.p, r = cfg_.r, n = cfg_.state_dim(), T = T_;
  DlmSpec spec;
  spec.T = T;
  spec.m0 = Vector::Zero(n);
  spec.C0 = prior_.x0_var * Matrix::Identity(n, n);
  spec.F.resize(T);
  spec.v_diag.resize(T);
  spec.G.resize(T);
  spec.W.resize(T);
  const bool mplus = cfg_.variant == ModelVariant::MPlus;
  if (mplus) spec.offset.resize(T);
  for (int t = 1; t <= T; ++t) {
    Matrix F = Matrix::Zero(m, n);
    F(0, cfg_.s - 1) = 1.0;
    for (int i = 2; i <= m; ++i)
      for (int k = 1; k <= r; ++k) F(i - 1, k - 1) = st_.loading(i, k, t, cfg_.s);
    spec.F[t - 1] = std::move(F);
    Vector v(m);
    v(0) = st_.sigma1_sq;
    for (int i = 2; i <= m; ++i) v(i - 1) = st_.sigma_sq(i - 2, t - 1);
    spec.v_diag[t - 1] = std::move(v);
    Matrix G = Matrix::Zero(n, n);
    for (int j = 1; j <= p; ++j) G(0, j - 1) = st_.delta(j - 1, t);
    for (int jj = 1; jj < n; ++jj) G(jj, jj - 1) = 1.0;
    spec.G[t - 1] = std::move(G);
    Matrix W = Matrix::Zero(n, n);
    W(0, 0) = st_.w(t - 1);
    spec.W[t - 1] = std::move(W);
    if (mplus) {
      Vector o(m);
      for (int i = 1; i <= m; ++i) o(i - 1) = var_offset(i, t);
      spec.offset[t - 1] = std::move(o);
    }
  }
  std::vector<Vector> theta = ffbs_sample(spec, y_, rng);
  for (int t = 1; t <= T; ++t) st_.x_at(t) = theta[t](0);
  for (int j = 0; j < n; ++j) st_.x_at(-j) = theta[0](j);
}

void Sampler::sample_tvar_coefficients(Rng& rng) {
  const int p = cfg_.p, T = T_;
  DlmSpec spec;
  spec.T = T;
  spec.m0 = prior_.delta0_mean;
  spec.C0 = prior_.delta0_cov;
  spec.G.assign(1, Matrix::Identity(p, p));
  spec.W.assign(1, st_.psi);
  spec.F.resize(T);
  spec.v_diag.resize(T);
  Matrix obs(T, 1);
  for (int t = 1; t <= T; ++t) {
    Matrix F(1, p);
    for (int j = 1; j <= p; ++j) F(0, j - 1) = st_.x_at(t - j);
    spec.F[t - 1] = std::move(F);
    spec.v_diag[t - 1] = Vector::Constant(1, st_.w(t - 1));
    obs(t - 1, 0) = st_.x_at(t);
  }
  std::vector<Vector> theta = ffbs_sample(spec, obs, rng);
  for (int t = 0; t <= T; ++t) st_.delta.col(t) = theta[t];
}

void Sampler::sample_w(Rng& rng) {
  Vector eps(T_);
  for (int t = 1; t <= T_; ++t) {
    double mean = 0.0;
    for (int j = 1; j <= cfg_.p; ++j) mean += st_.delta(j - 1, t) * st_.x_at(t - j);
    eps(t - 1) = st_.x_at(t) - mean;
  }
  st_.w = discount_variance_ffbs(eps, cfg_.lambda_w, prior_.w_init.n0, prior_.w_s0, rng)
              .variances;
}

GammaPrior Sampler::sigma1_posterior_params() const {
  double ss = 0.0;
  for (int t = 1; t <= T_; ++t) {
    double e = y_(t - 1, 0) - var_offset(1, t) - st_.x_at(t - cfg_.s + 1);
    ss += e * e;
  }
  return {prior_.sigma1_prec.shape + 0.5 * T_, prior_.sigma1_prec.rate + 0.5 * ss};
}

void Sampler::sample_sigma1(Rng& rng) {
  GammaPrior post = sigma1_posterior_params();
  st_.sigma1_sq = 1.0 / rng.gamma(post.shape, post.rate);
}

void Sampler::sample_sigma_channel(int i, Rng& rng) {
  Vector e(T_);
  for (int t = 1; t <= T_; ++t)
    e(t - 1) = y_(t - 1, i - 1) - var_offset(i, t) - loading_fit(i, t);
  st_.sigma_sq.row(i - 2) = discount_variance_ffbs(e, cfg_.lambda_sigma, prior_.sigma_init.n0,
                                                   prior_.sigma_s0(i - 2), rng)
                                .variances.transpose();
}

void Sampler::sample_loadings_channel(int i, Rng& rng, AcceptCounts& counts) {
  const int r = cfg_.r, T = T_, ii = i - 2;
  Matrix& B = st_.beta[ii];
  Vector mu = st_.hyper.mu.row(ii).transpose();
  Vector phi = st_.hyper.phi.row(ii).transpose();
  Vector v_sq = st_.hyper.v_sq.row(ii).transpose();
  Vector d = st_.thresholds.row(ii).transpose();

  Vector resid(T);
  for (int t = 1; t <= T; ++t) resid(t - 1) = y_(t - 1, i - 1) - var_offset(i, t);

  // per-time Metropolis-within-Gibbs scan of the r-vector beta_{i.t}
  Vector cur(r), prev(r), next(r);
  for (int t = 0; t <= T; ++t) {
    cur = B.col(t);
    const Vector* pp = nullptr;
    const Vector* pn = nullptr;
    if (t > 0) {
      prev = B.col(t - 1);
      pp = &prev;
    }
    if (t < T) {
      next = B.col(t + 1);
      pn = &next;
    }
    if (t == 0) {
      sample_lt_point(cur, pp, pn, mu, phi, v_sq, d, nullptr, rng);
    } else {
      LtObs obs;
      obs.y = resid(t - 1);
      obs.f = factor_vector(t);
      obs.sigma_sq = (i == 1) ? st_.sigma1_sq : st_.sigma_sq(ii, t - 1);
      bool acc = sample_lt_point(cur, pp, pn, mu, phi, v_sq, d, &obs, rng);
      counts.beta_tot++;
      if (acc) counts.beta_acc++;
    }
    B.col(t) = cur;
  }

  // hyper-parameters, then thresholds, per coefficient process
  LtHyperPriors hp{prior_.mu_normal, prior_.v_prec, prior_.phi_beta};
  for (int k = 1; k <= r; ++k) {
    Vector traj = B.row(k - 1).transpose();
    LtHyperState h{st_.hyper.mu(ii, k - 1), st_.hyper.phi(ii, k - 1),
                   st_.hyper.v_sq(ii, k - 1)};
    double dk = st_.thresholds(ii, k - 1);
    LtHyperAccept acc = sample_lt_hyperparams(&traj, h, hp, &dk, channel_K(i, k),
                                              phi_scale_(ii, k - 1), rng);
    st_.hyper.mu(ii, k - 1) = h.mu;
    st_.hyper.phi(ii, k - 1) = h.phi;
    st_.hyper.v_sq(ii, k - 1) = h.v_sq;
    counts.mu_tot++;
    counts.v_tot++;
    counts.phi_tot++;
    if (acc.mu) counts.mu_acc++;
    if (acc.v) counts.v_acc++;
    if (acc.phi) counts.phi_acc++;
    phi_win_tot_(ii, k - 1) += 1.0;
    if (acc.phi) phi_win_acc_(ii, k - 1) += 1.0;
  }

  for (int k = 1; k <= r; ++k) {
    Vector fit_other = Vector::Zero(T);
    for (int t = 1; t <= T; ++t)
      for (int kk = 1; kk <= r; ++kk)
        if (kk != k) fit_other(t - 1) += st_.loading(i, kk, t, cfg_.s) * st_.x_at(t - kk + 1);
    auto loglik = [&](double dk) {
      double ll = 0.0;
      for (int t = 1; t <= T; ++t) {
        double bk = B(k - 1, t);
        double b = std::abs(bk) >= dk ? bk : 0.0;
        double e = resid(t - 1) - fit_other(t - 1) - b * st_.x_at(t - k + 1);
        double s2 = (i == 1) ? st_.sigma1_sq : st_.sigma_sq(ii, t - 1);
        ll -= 0.5 * e * e / s2;
      }
      return ll;
    };
    ThresholdStep stp = sample_threshold(st_.thresholds(ii, k - 1), st_.hyper.mu(ii, k - 1),
                                         st_.hyper.phi(ii, k - 1), st_.hyper.v_sq(ii, k - 1),
                                         channel_K(i, k), loglik, rng);
    st_.thresholds(ii, k - 1) = stp.d;
    counts.thr_tot++;
    if (stp.accepted) counts.thr_acc++;
  }
}

std::pair<double, Matrix> Sampler::psi_posterior_params() const {
  const int p = cfg_.p;
  Matrix S = Matrix::Zero(p, p);
  for (int t = 1; t <= T_; ++t) {
    Vector dd = st_.delta.col(t) - st_.delta.col(t - 1);
    S.noalias() += dd * dd.transpose();
  }
  Eigen::LLT<Matrix> prior_llt(prior_.psi_prec.scale);
  if (prior_llt.info() != Eigen::Success)
    throw numerical_error("psi prior scale not positive definite");
  Matrix scale_inv = prior_llt.solve(Matrix::Identity(p, p));
  Matrix accum = scale_inv + S;
  Eigen::LLT<Matrix> post_llt(accum);
  if (post_llt.info() != Eigen::Success)
    throw numerical_error("psi posterior scale accumulation singular");
  Matrix post_scale = post_llt.solve(Matrix::Identity(p, p));
  post_scale = 0.5 * (post_scale + post_scale.transpose()).eval();
  return {prior_.psi_prec.dof + T_, post_scale};
}

void Sampler::sample_psi(Rng& rng) {
  auto [dof, scale] = psi_posterior_params();
  Matrix prec = rng.wishart(dof, scale);
  Eigen::LLT<Matrix> llt(prec);
  if (llt.info() != Eigen::Success)
    throw numerical_error("sampled Psi precision not positive definite");
  Matrix psi = llt.solve(Matrix::Identity(cfg_.p, cfg_.p));
  st_.psi = 0.5 * (psi + psi.transpose()).eval();
}

void Sampler::sample_a_row(int i, Rng& rng, AcceptCounts& counts) {
  const int m = cfg_.m, T = T_, ii = i - 1;
  Matrix& A = st_.alpha[ii];
  Vector mu = st_.a_hyper.mu.row(ii).transpose();
  Vector phi = st_.a_hyper.phi.row(ii).transpose();
  Vector v_sq = st_.a_hyper.v_sq.row(ii).transpose();
  Vector d = st_.a_thresholds.row(ii).transpose();

  Vector resid(T);
  for (int t = 1; t <= T; ++t) resid(t - 1) = y_(t - 1, i - 1) - loading_fit(i, t);
  auto regressor = [&](int t) {
    Vector z(m);
    for (int j = 1; j <= m; ++j) z(j - 1) = (t == 1) ? st_.y0(j - 1) : y_(t - 2, j - 1);
    return z;
  };

  Vector cur(m), prev(m), next(m);
  for (int t = 0; t <= T; ++t) {
    cur = A.col(t);
    const Vector* pp = nullptr;
    const Vector* pn = nullptr;
    if (t > 0) {
      prev = A.col(t - 1);
      pp = &prev;
    }
    if (t < T) {
      next = A.col(t + 1);
      pn = &next;
    }
    if (t == 0) {
      sample_lt_point(cur, pp, pn, mu, phi, v_sq, d, nullptr, rng);
    } else {
      LtObs obs;
      obs.y = resid(t - 1);
      obs.f = regressor(t);
      obs.sigma_sq = (i == 1) ? st_.sigma1_sq : st_.sigma_sq(i - 2, t - 1);
      bool acc = sample_lt_point(cur, pp, pn, mu, phi, v_sq, d, &obs, rng);
      counts.beta_tot++;
      if (acc) counts.beta_acc++;
    }
    A.col(t) = cur;
  }

  LtHyperPriors hp{prior_.mu_normal, prior_.v_prec, prior_.phi_beta};
  for (int j = 1; j <= m; ++j) {
    Vector traj = A.row(j - 1).transpose();
    LtHyperState h{st_.a_hyper.mu(ii, j - 1), st_.a_hyper.phi(ii, j - 1),
                   st_.a_hyper.v_sq(ii, j - 1)};
    double dj = st_.a_thresholds(ii, j - 1);
    LtHyperAccept acc =
        sample_lt_hyperparams(&traj, h, hp, &dj, cfg_.K, a_phi_scale_(ii, j - 1), rng);
    st_.a_hyper.mu(ii, j - 1) = h.mu;
    st_.a_hyper.phi(ii, j - 1) = h.phi;
    st_.a_hyper.v_sq(ii, j - 1) = h.v_sq;
    counts.mu_tot++;
    counts.v_tot++;
    counts.phi_tot++;
    if (acc.mu) counts.mu_acc++;
    if (acc.v) counts.v_acc++;
    if (acc.phi) counts.phi_acc++;
    a_phi_win_tot_(ii, j - 1) += 1.0;
    if (acc.phi) a_phi_win_acc_(ii, j - 1) += 1.0;
  }

  for (int j = 1; j <= m; ++j) {
    Vector fit_other = Vector::Zero(T);
    for (int t = 1; t <= T; ++t) {
      for (int jj = 1; jj <= m; ++jj) {
        if (jj == j) continue;
        double yprev = (t == 1) ? st_.y0(jj - 1) : y_(t - 2, jj - 1);
        fit_other(t - 1) += st_.var_coeff(i, jj, t) * yprev;
      }
    }
    auto loglik = [&](double dj) {
      double ll = 0.0;
      for (int t = 1; t <= T; ++t) {
        double aj = A(j - 1, t);
        double a = std::abs(aj) >= dj ? aj : 0.0;
        double yprev = (t == 1) ? st_.y0(j - 1) : y_(t - 2, j - 1);
        double e = resid(t - 1) - fit_other(t - 1) - a * yprev;
        double s2 = (i == 1) ? st_.sigma1_sq : st_.sigma_sq(i - 2, t - 1);
        ll -= 0.5 * e * e / s2;
      }
      return ll;
    };
    ThresholdStep stp =
        sample_threshold(st_.a_thresholds(ii, j - 1), st_.a_hyper.mu(ii, j - 1),
                         st_.a_hyper.phi(ii, j - 1), st_.a_hyper.v_sq(ii, j - 1), cfg_.K,
                         loglik, rng);
    st_.a_thresholds(ii, j - 1) = stp.d;
    counts.thr_tot++;
    if (stp.accepted) counts.thr_acc++;
  }
}

std::pair<Vector, Matrix> Sampler::y0_posterior_params() const {
  const int m = cfg_.m;
  Matrix A1(m, m);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) A1(i - 1, j - 1) = st_.var_coeff(i, j, 1);
  Vector res1(m);
  for (int i = 1; i <= m; ++i) res1(i - 1) = y_(0, i - 1) - loading_fit(i, 1);
  Vector sig_inv(m);
  sig_inv(0) = 1.0 / st_.sigma1_sq;
  for (int i = 2; i <= m; ++i) sig_inv(i - 1) = 1.0 / st_.sigma_sq(i - 2, 0);
  Matrix prec = Matrix::Identity(m, m) / prior_.y0_variance;
  prec.noalias() += A1.transpose() * sig_inv.asDiagonal() * A1;
  Vector lin = A1.transpose() * (sig_inv.asDiagonal() * res1);
  Eigen::LLT<Matrix> llt(prec);
  if (llt.info() != Eigen::Success)
    throw numerical_error("y0 posterior precision not positive definite");
  Vector mean = llt.solve(lin);
  Matrix cov = llt.solve(Matrix::Identity(m, m));
  return {mean, 0.5 * (cov + cov.transpose())};
}

void Sampler::sample_y0(Rng& rng) {
  auto [mean, cov] = y0_posterior_params();
  st_.y0 = mean + sym_sqrt(cov) * rng.normal_vector(cfg_.m);
}

void Sampler::sweep(std::uint64_t s) {
  const bool mplus = cfg_.variant == ModelVariant::MPlus;
  if (plan_.x_states) {
    Rng r = Rng::stream(master_seed, s, FAM_X);
    sample_latent_x(r);
  }
  if (plan_.delta) {
    Rng r = Rng::stream(master_seed, s, FAM_DELTA);
    sample_tvar_coefficients(r);
  }
  if (plan_.w_vol) {
    Rng r = Rng::stream(master_seed, s, FAM_W);
    sample_w(r);
  }
  if (plan_.sigma) {
    Rng r = Rng::stream(master_seed, s, FAM_SIGMA1);
    sample_sigma1(r);
    parallel_for(cfg_.m - 1, [&](int idx) {
      Rng ri = Rng::stream(master_seed, s, FAM_SIGMA, static_cast<std::uint64_t>(idx));
      sample_sigma_channel(idx + 2, ri);
    });
  }
  if (plan_.loadings) {
    parallel_for(cfg_.m - 1, [&](int idx) {
      Rng ri = Rng::stream(master_seed, s, FAM_LOADINGS, static_cast<std::uint64_t>(idx));
      sample_loadings_channel(idx + 2, ri, counts_[idx]);
    });
  }
  if (plan_.psi) {
    Rng r = Rng::stream(master_seed, s, FAM_PSI);
    sample_psi(r);
  }
  if (mplus && plan_.a_block) {
    parallel_for(cfg_.m, [&](int idx) {
      Rng ri = Rng::stream(master_seed, s, FAM_A, static_cast<std::uint64_t>(idx));
      sample_a_row(idx + 1, ri, a_counts_[idx]);
    });
  }
  if (mplus && plan_.y0) {
    Rng r = Rng::stream(master_seed, s, FAM_Y0);
    sample_y0(r);
  }
}

void Sampler::adapt_proposals() {
  auto tune = [](Matrix& scale, Matrix& acc, Matrix& tot) {
    for (int i = 0; i < scale.rows(); ++i) {
      for (int k = 0; k < scale.cols(); ++k) {
        if (tot(i, k) < 1.0) continue;
        double rate = acc(i, k) / tot(i, k);
        if (rate < 0.2)
          scale(i, k) *= 0.7;
        else if (rate > 0.6)
          scale(i, k) *= 1.4;
        scale(i, k) = std::min(1e3, std::max(1e-3, scale(i, k)));
      }
    }
    acc.setZero();
    tot.setZero();
  };
  tune(phi_scale_, phi_win_acc_, phi_win_tot_);
  tune(a_phi_scale_, a_phi_win_acc_, a_phi_win_tot_);
}

void Sampler::reset_adapt_window() {
  phi_win_acc_.setZero();
  phi_win_tot_.setZero();
  a_phi_win_acc_.setZero();
  a_phi_win_tot_.setZero();
}

void Sampler::restore_from(const Sampler& other) {
  st_ = other.st_;
  counts_ = other.counts_;
  a_counts_ = other.a_counts_;
  phi_scale_ = other.phi_scale_;
  a_phi_scale_ = other.a_phi_scale_;
  phi_win_acc_ = other.phi_win_acc_;
  phi_win_tot_ = other.phi_win_tot_;
  a_phi_win_acc_ = other.a_phi_win_acc_;
  a_phi_win_tot_ = other.a_phi_win_tot_;
}

AcceptanceRates Sampler::acceptance_rates() const {
  AcceptCounts b;
  for (const auto& c : counts_) b.add(c);
  AcceptCounts a;
  for (const auto& c : a_counts_) a.add(c);
  auto rate = [](long long acc, long long tot) { return tot > 0 ? double(acc) / double(tot) : 1.0; };
  AcceptanceRates r;
  r.beta_points = rate(b.beta_acc, b.beta_tot);
  r.thresholds = rate(b.thr_acc, b.thr_tot);
  r.mu = rate(b.mu_acc, b.mu_tot);
  r.v = rate(b.v_acc, b.v_tot);
  r.phi = rate(b.phi_acc, b.phi_tot);
  r.a_points = rate(a.beta_acc, a.beta_tot);
  r.a_thresholds = rate(a.thr_acc, a.thr_tot);
  r.a_mu = rate(a.mu_acc, a.mu_tot);
  r.a_v = rate(a.v_acc, a.v_tot);
  r.a_phi = rate(a.phi_acc, a.phi_tot);
  return r;
}

double conditional_loglik(const LatentStateSet& st, const ModelConfig& cfg, const Matrix& y) {
  const int T = static_cast<int>(y.rows());
  const int m = cfg.m;
  const bool mplus = cfg.variant == ModelVariant::MPlus;
  double ll = 0.0;
  for (int t = 1; t <= T; ++t) {
    for (int i = 1; i <= m; ++i) {
      double mean = 0.0;
      for (int k = 1; k <= cfg.r; ++k) mean += st.loading(i, k, t, cfg.s) * st.x_at(t - k + 1);
      if (mplus) {
        for (int j = 1; j <= m; ++j) {
          double yprev = (t == 1) ? st.y0(j - 1) : y(t - 2, j - 1);
          mean += st.var_coeff(i, j, t) * yprev;
        }
      }
      double var = (i == 1) ? st.sigma1_sq : st.sigma_sq(i - 2, t - 1);
      ll += normal_logpdf(y(t - 1, i - 1), mean, var);
    }
  }
  return ll;
}

DrawRecord pack_record(const LatentStateSet& st, const ModelConfig& cfg, int T, double loglik) {
  const int m = cfg.m, p = cfg.p, r = cfg.r, n = cfg.state_dim();
  DrawRecord rec;
  rec.loglik = loglik;
  rec.sigma1_sq = st.sigma1_sq;
  rec.psi.resize(p * p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) rec.psi[i * p + j] = st.psi(i, j);
  rec.thresholds.resize((m - 1) * r);
  rec.hyper.resize(3 * (m - 1) * r);
  const int blk = (m - 1) * r;
  for (int i = 0; i < m - 1; ++i) {
    for (int k = 0; k < r; ++k) {
      int idx = i * r + k;
      rec.thresholds[idx] = st.thresholds(i, k);
      rec.hyper[idx] = st.hyper.mu(i, k);
      rec.hyper[blk + idx] = st.hyper.phi(i, k);
      rec.hyper[2 * blk + idx] = st.hyper.v_sq(i, k);
    }
  }
  rec.x.resize(T + n);
  for (int i = 0; i < T + n; ++i) rec.x[i] = static_cast<float>(st.x(i));
  rec.delta.resize(p * (T + 1));
  for (int j = 0; j < p; ++j)
    for (int t = 0; t <= T; ++t) rec.delta[j * (T + 1) + t] = static_cast<float>(st.delta(j, t));
  rec.w.resize(T);
  for (int t = 0; t < T; ++t) rec.w[t] = static_cast<float>(st.w(t));
  rec.sigma.resize((m - 1) * T);
  for (int i = 0; i < m - 1; ++i)
    for (int t = 0; t < T; ++t) rec.sigma[i * T + t] = static_cast<float>(st.sigma_sq(i, t));
  rec.beta.resize((m - 1) * r * (T + 1));
  for (int i = 0; i < m - 1; ++i)
    for (int k = 0; k < r; ++k)
      for (int t = 0; t <= T; ++t)
        rec.beta[(i * r + k) * (T + 1) + t] = static_cast<float>(st.beta[i](k, t));
  if (cfg.variant == ModelVariant::MPlus) {
    rec.a_thresholds.resize(m * m);
    rec.a_hyper.resize(3 * m * m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        int idx = i * m + j;
        rec.a_thresholds[idx] = st.a_thresholds(i, j);
        rec.a_hyper[idx] = st.a_hyper.mu(i, j);
        rec.a_hyper[m * m + idx] = st.a_hyper.phi(i, j);
        rec.a_hyper[2 * m * m + idx] = st.a_hyper.v_sq(i, j);
      }
    }
    rec.y0.resize(m);
    for (int i = 0; i < m; ++i) rec.y0[i] = st.y0(i);
    rec.alpha.resize(m * m * (T + 1));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int t = 0; t <= T; ++t)
          rec.alpha[(i * m + j) * (T + 1) + t] = static_cast<float>(st.alpha[i](j, t));
  }
  return rec;
}

LatentStateSet PosteriorDraws::state(int draw) const {
  const DrawRecord& rec = records.at(draw);
  const int m = config.m, p = config.p, r = config.r, n = config.state_dim();
  LatentStateSet st;
  st.n_state = n;
  st.sigma1_sq = rec.sigma1_sq;
  st.psi.resize(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) st.psi(i, j) = rec.psi[i * p + j];
  st.thresholds.resize(m - 1, r);
  st.hyper.mu.resize(m - 1, r);
  st.hyper.phi.resize(m - 1, r);
  st.hyper.v_sq.resize(m - 1, r);
  const int blk = (m - 1) * r;
  for (int i = 0; i < m - 1; ++i) {
    for (int k = 0; k < r; ++k) {
      int idx = i * r + k;
      st.thresholds(i, k) = rec.thresholds[idx];
      st.hyper.mu(i, k) = rec.hyper[idx];
      st.hyper.phi(i, k) = rec.hyper[blk + idx];
      st.hyper.v_sq(i, k) = rec.hyper[2 * blk + idx];
    }
  }
  st.x.resize(T + n);
  for (int i = 0; i < T + n; ++i) st.x(i) = rec.x[i];
  st.delta.resize(p, T + 1);
  for (int j = 0; j < p; ++j)
    for (int t = 0; t <= T; ++t) st.delta(j, t) = rec.delta[j * (T + 1) + t];
  st.w.resize(T);
  for (int t = 0; t < T; ++t) st.w(t) = rec.w[t];
  st.sigma_sq.resize(m - 1, T);
  for (int i = 0; i < m - 1; ++i)
    for (int t = 0; t < T; ++t) st.sigma_sq(i, t) = rec.sigma[i * T + t];
  st.beta.assign(m - 1, Matrix(r, T + 1));
  for (int i = 0; i < m - 1; ++i)
    for (int k = 0; k < r; ++k)
      for (int t = 0; t <= T; ++t) st.beta[i](k, t) = rec.beta[(i * r + k) * (T + 1) + t];
  if (config.variant == ModelVariant::MPlus) {
    st.a_thresholds.resize(m, m);
    st.a_hyper.mu.resize(m, m);
    st.a_hyper.phi.resize(m, m);
    st.a_hyper.v_sq.resize(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        int idx = i * m + j;
        st.a_thresholds(i, j) = rec.a_thresholds[idx];
        st.a_hyper.mu(i, j) = rec.a_hyper[idx];
        st.a_hyper.phi(i, j) = rec.a_hyper[m * m + idx];
        st.a_hyper.v_sq(i, j) = rec.a_hyper[2 * m * m + idx];
      }
    }
    st.y0.resize(m);
    for (int i = 0; i < m; ++i) st.y0(i) = rec.y0[i];
    st.alpha.assign(m, Matrix(m, T + 1));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int t = 0; t <= T; ++t) st.alpha[i](j, t) = rec.alpha[(i * m + j) * (T + 1) + t];
  }
  return st;
}

PosteriorDraws run_mcmc(const ModelInputs& inputs, const ObservationMatrix& data,
                        const RunOptions& options) {
  Sampler smp(inputs, data);
  smp.plan() = options.plan;
  if (options.resume_from) {
    smp.restore_from(*options.resume_from);
  } else if (options.init) {
    smp.set_state(*options.init);
  }
  const McmcOptions& mc = inputs.config.mcmc;
  const int total = mc.burn_in + mc.draws;
  int records_written = options.records_written;

  PosteriorDraws out;
  out.config = inputs.config;
  out.prior = inputs.prior;
  out.T = data.T();
  out.seed = mc.rng_seed;

  for (int sweep = options.start_sweep + 1; sweep <= total; ++sweep) {
    smp.sweep(static_cast<std::uint64_t>(sweep));
    if (sweep <= mc.burn_in && mc.adapt_window > 0 && sweep % mc.adapt_window == 0)
      smp.adapt_proposals();
    if (sweep > mc.burn_in && (sweep - mc.burn_in) % mc.thin == 0) {
      DrawRecord rec = pack_record(smp.state(), inputs.config, data.T(), smp.loglik());
      if (options.on_record) options.on_record(rec);
      if (options.keep_records) out.records.push_back(std::move(rec));
      ++records_written;
    }
    if (mc.checkpoint_every > 0 && options.on_checkpoint && sweep % mc.checkpoint_every == 0)
      options.on_checkpoint(smp, sweep, records_written);
    if (options.stop_after_sweeps > 0 && sweep >= options.stop_after_sweeps) break;
  }
  out.acceptance = smp.acceptance_rates();
  return out;
}

}  // namespace ltdfm

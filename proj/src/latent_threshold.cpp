#include "ltdfm/latent_threshold.hpp"

namespace ltdfm {

double sparsity_probability(double K) {
  if (!(K > 0.0)) throw config_error("sparsity_probability: K must be positive");
  const double sqrt_2_over_pi = 0.7978845608028653558798921;
  return 2.0 - 2.0 * normal_cdf(K) - 2.0 * normal_pdf(K) / K + sqrt_2_over_pi / K;
}

LtTrajectory apply_threshold(const Vector& beta, double d) {
  if (!(d >= 0.0)) throw config_error("apply_threshold: d must be nonnegative");
  const int T = static_cast<int>(beta.size()) - 1;
  LtTrajectory traj;
  traj.beta = beta;
  traj.s.resize(T);
  traj.b.resize(T);
  for (int t = 1; t <= T; ++t) {
    bool active = std::abs(beta(t)) >= d;
    traj.s(t - 1) = active ? 1 : 0;
    traj.b(t - 1) = active ? beta(t) : 0.0;
  }
  return traj;
}

NormalMoments lt_conditional_prior(bool has_prev, bool has_next, double prev, double next,
                                   double mu, double phi, double v_sq) {
  if (has_prev && has_next) {
    double denom = 1.0 + phi * phi;
    double mean = (mu * (1.0 - phi) * (1.0 - phi) + phi * (prev + next)) / denom;
    return {mean, v_sq / denom};
  }
  if (has_prev) return {mu + phi * (prev - mu), v_sq};
  if (has_next) {
    // stationary prior combined with the forward transition; by reversibility
    // this is N(mu + phi (next - mu), v_sq)
    return {mu + phi * (next - mu), v_sq};
  }
  return {mu, v_sq / (1.0 - phi * phi)};
}

namespace {

double thresholded_obs_loglik(const Vector& beta_t, const Vector& d, const LtObs& obs) {
  double fit = 0.0;
  for (int k = 0; k < beta_t.size(); ++k)
    if (std::abs(beta_t(k)) >= d(k)) fit += obs.f(k) * beta_t(k);
  double e = obs.y - fit;
  return -0.5 * e * e / obs.sigma_sq;
}

double plain_obs_loglik(const Vector& beta_t, const LtObs& obs) {
  double e = obs.y - obs.f.dot(beta_t);
  return -0.5 * e * e / obs.sigma_sq;
}

}  // namespace

bool sample_lt_point(Vector& beta_t, const Vector* prev, const Vector* next, const Vector& mu,
                     const Vector& phi, const Vector& v_sq, const Vector& d, const LtObs* obs,
                     Rng& rng) {
  const int r = static_cast<int>(beta_t.size());
  Vector prior_mean(r), prior_var(r);
  for (int k = 0; k < r; ++k) {
    NormalMoments nm =
        lt_conditional_prior(prev != nullptr, next != nullptr, prev ? (*prev)(k) : 0.0,
                             next ? (*next)(k) : 0.0, mu(k), phi(k), v_sq(k));
    prior_mean(k) = nm.mean;
    prior_var(k) = nm.var;
  }

  Vector cand(r);
  if (!obs) {
    for (int k = 0; k < r; ++k) cand(k) = rng.normal(prior_mean(k), std::sqrt(prior_var(k)));
    beta_t = cand;
    return true;
  }

  if (r == 1) {
    double prec = 1.0 / prior_var(0) + obs->f(0) * obs->f(0) / obs->sigma_sq;
    double lin = prior_mean(0) / prior_var(0) + obs->f(0) * obs->y / obs->sigma_sq;
    cand(0) = rng.normal(lin / prec, std::sqrt(1.0 / prec));
  } else {
    Matrix prec = (1.0 / prior_var.array()).matrix().asDiagonal();
    prec.noalias() += obs->f * obs->f.transpose() / obs->sigma_sq;
    Vector lin = (prior_mean.array() / prior_var.array()).matrix() +
                 obs->f * (obs->y / obs->sigma_sq);
    Eigen::LLT<Matrix> llt(prec);
    if (llt.info() != Eigen::Success)
      throw numerical_error("lt point step: proposal precision not positive definite");
    Vector mean = llt.solve(lin);
    Vector z = rng.normal_vector(r);
    cand = mean + llt.matrixU().solve(z);
  }

  double log_ratio = thresholded_obs_loglik(cand, d, *obs) - thresholded_obs_loglik(beta_t, d, *obs) +
                     plain_obs_loglik(beta_t, *obs) - plain_obs_loglik(cand, *obs);
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    beta_t = cand;
    return true;
  }
  return false;
}

ThresholdStep sample_threshold(double d_current, double mu, double phi, double v_sq, double K,
                               const std::function<double(double)>& loglik, Rng& rng) {
  double range = lt_range(mu, phi, v_sq, K);
  double cand = rng.uniform(0.0, range);
  double log_ratio = loglik(cand) - loglik(d_current);
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) return {cand, true};
  return {d_current, false};
}

NormalMoments lt_mu_conditional(const Vector& beta, double phi, double v_sq,
                                const NormalPrior& prior) {
  const int T = static_cast<int>(beta.size()) - 1;
  double prec = 1.0 / prior.variance;
  double lin = prior.mean / prior.variance;
  prec += (1.0 - phi * phi) / v_sq;
  lin += (1.0 - phi * phi) * beta(0) / v_sq;
  double om = 1.0 - phi;
  for (int t = 1; t <= T; ++t) {
    prec += om * om / v_sq;
    lin += om * (beta(t) - phi * beta(t - 1)) / v_sq;
  }
  return {lin / prec, 1.0 / prec};
}

GammaPrior lt_vprec_conditional(const Vector& beta, double mu, double phi,
                                const GammaPrior& prior) {
  const int T = static_cast<int>(beta.size()) - 1;
  double ss = (1.0 - phi * phi) * (beta(0) - mu) * (beta(0) - mu);
  for (int t = 1; t <= T; ++t) {
    double e = beta(t) - mu - phi * (beta(t - 1) - mu);
    ss += e * e;
  }
  return {prior.shape + 0.5 * (T + 1), prior.rate + 0.5 * ss};
}

namespace {

// log p(phi | beta, mu, v_sq) up to a constant, with the shifted-beta prior,
// the stationary t=0 term, and (when a threshold is attached) the conditional
// uniform prior normalization for d
double phi_logtarget(double phi, const Vector* beta, double mu, double v_sq,
                     const BetaPrior& prior, const double* d, double K) {
  if (!(phi > -1.0 && phi < 1.0)) return -std::numeric_limits<double>::infinity();
  double lp = (prior.a - 1.0) * std::log(0.5 * (phi + 1.0)) +
              (prior.b - 1.0) * std::log(0.5 * (1.0 - phi));
  if (beta) {
    const int T = static_cast<int>(beta->size()) - 1;
    double b0 = (*beta)(0) - mu;
    lp += 0.5 * std::log(1.0 - phi * phi) - 0.5 * (1.0 - phi * phi) * b0 * b0 / v_sq;
    for (int t = 1; t <= T; ++t) {
      double e = (*beta)(t) - mu - phi * ((*beta)(t - 1) - mu);
      lp -= 0.5 * e * e / v_sq;
    }
  }
  if (d) {
    double range = lt_range(mu, phi, v_sq, K);
    if (*d > range) return -std::numeric_limits<double>::infinity();
    lp -= std::log(range);
  }
  return lp;
}

}  // namespace

bool lt_mu_step(const Vector* beta, LtHyperState& h, const NormalPrior& prior, const double* d,
                double K, Rng& rng) {
  NormalMoments mu_cond = beta ? lt_mu_conditional(*beta, h.phi, h.v_sq, prior)
                               : NormalMoments{prior.mean, prior.variance};
  double mu_cand = rng.normal(mu_cond.mean, std::sqrt(mu_cond.var));
  if (!d) {
    h.mu = mu_cand;
    return true;
  }
  double r_cur = lt_range(h.mu, h.phi, h.v_sq, K);
  double r_new = lt_range(mu_cand, h.phi, h.v_sq, K);
  if (*d > r_new) return false;
  double log_ratio = std::log(r_cur) - std::log(r_new);
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    h.mu = mu_cand;
    return true;
  }
  return false;
}

bool lt_v_step(const Vector* beta, LtHyperState& h, const GammaPrior& prior, const double* d,
               double K, Rng& rng) {
  GammaPrior v_cond = beta ? lt_vprec_conditional(*beta, h.mu, h.phi, prior) : prior;
  double v_sq_cand = 1.0 / rng.gamma(v_cond.shape, v_cond.rate);
  if (!d) {
    h.v_sq = v_sq_cand;
    return true;
  }
  double r_cur = lt_range(h.mu, h.phi, h.v_sq, K);
  double r_new = lt_range(h.mu, h.phi, v_sq_cand, K);
  if (*d > r_new) return false;
  double log_ratio = std::log(r_cur) - std::log(r_new);
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    h.v_sq = v_sq_cand;
    return true;
  }
  return false;
}

bool lt_phi_step(const Vector* beta, LtHyperState& h, const BetaPrior& prior, const double* d,
                 double K, double prop_scale, Rng& rng) {
  double center = 0.0, scale = 0.5;
  if (beta) {
    const int T = static_cast<int>(beta->size()) - 1;
    double s_prev = 0.0, s_cross = 0.0;
    for (int t = 1; t <= T; ++t) {
      double bp = (*beta)(t - 1) - h.mu;
      s_prev += bp * bp;
      s_cross += ((*beta)(t)-h.mu) * bp;
    }
    if (s_prev > 1e-300) {
      center = s_cross / s_prev;
      scale = std::sqrt(h.v_sq / s_prev);
    }
  }
  scale *= prop_scale;
  center = std::min(0.999, std::max(-0.999, center));
  double phi_cand = rng.truncated_normal(center, scale, -1.0, 1.0);
  double log_ratio = phi_logtarget(phi_cand, beta, h.mu, h.v_sq, prior, d, K) -
                     phi_logtarget(h.phi, beta, h.mu, h.v_sq, prior, d, K) +
                     truncated_normal_logpdf(h.phi, center, scale, -1.0, 1.0) -
                     truncated_normal_logpdf(phi_cand, center, scale, -1.0, 1.0);
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    h.phi = phi_cand;
    return true;
  }
  return false;
}

LtHyperAccept sample_lt_hyperparams(const Vector* beta, LtHyperState& h,
                                    const LtHyperPriors& priors, const double* d, double K,
                                    double phi_prop_scale, Rng& rng) {
  LtHyperAccept acc;
  acc.mu = lt_mu_step(beta, h, priors.mu, d, K, rng);
  acc.v = lt_v_step(beta, h, priors.v_prec, d, K, rng);
  acc.phi = lt_phi_step(beta, h, priors.phi_beta, d, K, phi_prop_scale, rng);
  return acc;
}

}  // namespace ltdfm

#include "ltdfm/impulse.hpp"

#include "ltdfm/discount.hpp"
#include "ltdfm/dlm.hpp"
#include "ltdfm/parallel.hpp"

namespace ltdfm {

double default_shock(const PosteriorDraws& draws) {
  if (draws.records.empty()) throw config_error("default_shock: no draws");
  double sum = 0.0;
  for (const DrawRecord& rec : draws.records)
    for (float w : rec.w) sum += std::sqrt(static_cast<double>(w));
  return sum / (static_cast<double>(draws.records.size()) * draws.T);
}

namespace {

enum ImpulseStream : std::uint64_t {
  IMP_DELTA = 1,
  IMP_BETA = 2,
  IMP_ALPHA = 3,
  IMP_EPS_SHOCKED = 4,
  IMP_EPS_BASE = 5,
  IMP_NU_SHOCKED = 6,
  IMP_NU_BASE = 7,
  IMP_WVOL = 8,
  IMP_SIGVOL = 9,
};

struct ForwardPaths {
  std::vector<Matrix> b;      // per horizon step: m x r thresholded loadings
  std::vector<Matrix> a;      // per horizon step: m x m (M+; empty otherwise)
  std::vector<Matrix> delta;  // per horizon step: p x 1
};

// evolve coefficient processes forward from their time-t0 values
ForwardPaths simulate_coefficient_paths(const LatentStateSet& st, const ModelConfig& cfg,
                                        int t0, int h, bool freeze_indicators,
                                        std::uint64_t seed, std::uint64_t draw_idx,
                                        std::uint64_t rep) {
  const int m = cfg.m, p = cfg.p, r = cfg.r;
  const bool mplus = cfg.variant == ModelVariant::MPlus;
  ForwardPaths out;
  out.delta.resize(h);
  out.b.resize(h);
  if (mplus) out.a.resize(h);

  Rng rng_delta = Rng::stream(seed, draw_idx, IMP_DELTA, rep);
  Matrix psi_sqrt = sym_sqrt(st.psi);
  Vector d = st.delta.col(t0);
  for (int j = 0; j < h; ++j) {
    d += psi_sqrt * rng_delta.normal_vector(p);
    out.delta[j] = d;
  }

  Rng rng_beta = Rng::stream(seed, draw_idx, IMP_BETA, rep);
  Matrix beta(m - 1, r);
  Eigen::MatrixXi s0(m - 1, r);
  for (int i = 2; i <= m; ++i)
    for (int k = 1; k <= r; ++k) {
      beta(i - 2, k - 1) = st.beta[i - 2](k - 1, t0);
      s0(i - 2, k - 1) =
          std::abs(beta(i - 2, k - 1)) >= st.thresholds(i - 2, k - 1) ? 1 : 0;
    }
  for (int j = 0; j < h; ++j) {
    Matrix B = Matrix::Zero(m, r);
    B(0, cfg.s - 1) = 1.0;
    for (int i = 2; i <= m; ++i) {
      for (int k = 1; k <= r; ++k) {
        double mu = st.hyper.mu(i - 2, k - 1);
        double phi = st.hyper.phi(i - 2, k - 1);
        double v = std::sqrt(st.hyper.v_sq(i - 2, k - 1));
        beta(i - 2, k - 1) = mu + phi * (beta(i - 2, k - 1) - mu) + v * rng_beta.normal();
        bool active = freeze_indicators
                          ? s0(i - 2, k - 1) == 1
                          : std::abs(beta(i - 2, k - 1)) >= st.thresholds(i - 2, k - 1);
        B(i - 1, k - 1) = active ? beta(i - 2, k - 1) : 0.0;
      }
    }
    out.b[j] = std::move(B);
  }

  if (mplus) {
    Rng rng_alpha = Rng::stream(seed, draw_idx, IMP_ALPHA, rep);
    Matrix alpha(m, m);
    Eigen::MatrixXi sa0(m, m);
    for (int i = 1; i <= m; ++i)
      for (int k = 1; k <= m; ++k) {
        alpha(i - 1, k - 1) = st.alpha[i - 1](k - 1, t0);
        sa0(i - 1, k - 1) =
            std::abs(alpha(i - 1, k - 1)) >= st.a_thresholds(i - 1, k - 1) ? 1 : 0;
      }
    for (int j = 0; j < h; ++j) {
      Matrix A = Matrix::Zero(m, m);
      for (int i = 1; i <= m; ++i) {
        for (int k = 1; k <= m; ++k) {
          double mu = st.a_hyper.mu(i - 1, k - 1);
          double phi = st.a_hyper.phi(i - 1, k - 1);
          double v = std::sqrt(st.a_hyper.v_sq(i - 1, k - 1));
          alpha(i - 1, k - 1) = mu + phi * (alpha(i - 1, k - 1) - mu) + v * rng_alpha.normal();
          bool active = freeze_indicators
                            ? sa0(i - 1, k - 1) == 1
                            : std::abs(alpha(i - 1, k - 1)) >= st.a_thresholds(i - 1, k - 1);
          A(i - 1, k - 1) = active ? alpha(i - 1, k - 1) : 0.0;
        }
      }
      out.a[j] = std::move(A);
    }
  }
  return out;
}

Vector forward_volatility(double v_t0, double lambda, double n0, int t0, int h, bool freeze,
                          Rng& rng) {
  Vector out(h);
  if (freeze || lambda == 1.0) {
    out.setConstant(v_t0);
    return out;
  }
  double prec = 1.0 / v_t0;
  double n = discount_dof_at(n0, lambda, t0);
  for (int j = 0; j < h; ++j) {
    double eta = rng.beta(0.5 * lambda * n, 0.5 * (1.0 - lambda) * n);
    prec = prec * eta / lambda;
    n = lambda * n + 1.0;
    out(j) = 1.0 / prec;
  }
  return out;
}

// exact common-random-number estimator: additive innovations cancel, so the
// path difference follows the linear recursion along the simulated
// coefficient paths
void crn_difference(const ForwardPaths& paths, const ModelConfig& cfg, double shock, int h,
                    Matrix& response) {
  const int m = cfg.m, p = cfg.p, r = cfg.r, n = cfg.state_dim();
  const bool mplus = cfg.variant == ModelVariant::MPlus;
  Vector dx_hist = Vector::Zero(n);  // dx at t0+j-1, ..., t0+j-n
  Vector dy_prev = Vector::Zero(m);
  for (int j = 1; j <= h; ++j) {
    double dx = (j == 1) ? shock : 0.0;
    for (int l = 1; l <= p; ++l) dx += paths.delta[j - 1](l - 1) * dx_hist(l - 1);
    Vector dy(m);
    for (int i = 0; i < m; ++i) {
      double v = paths.b[j - 1](i, 0) * dx;
      for (int k = 2; k <= r; ++k) v += paths.b[j - 1](i, k - 1) * dx_hist(k - 2);
      if (mplus) v += paths.a[j - 1].row(i).dot(dy_prev);
      dy(i) = v;
    }
    response.col(j - 1) += dy;
    for (int l = n - 1; l >= 1; --l) dx_hist(l) = dx_hist(l - 1);
    dx_hist(0) = dx;
    dy_prev = dy;
  }
}

// two full projections with independent innovations (variance benchmark)
void independent_difference(const LatentStateSet& st, const ForwardPaths& paths,
                            const ModelConfig& cfg, double shock, int t0, int h,
                            bool freeze_vol, std::uint64_t seed, std::uint64_t draw_idx,
                            std::uint64_t rep, Matrix& response) {
  const int m = cfg.m, p = cfg.p, r = cfg.r, n = cfg.state_dim();
  Rng rng_w = Rng::stream(seed, draw_idx, IMP_WVOL, rep);
  Vector w_path = forward_volatility(st.w(t0 - 1), cfg.lambda_w, 1.0, t0, h, freeze_vol, rng_w);
  Rng rng_sig = Rng::stream(seed, draw_idx, IMP_SIGVOL, rep);
  Matrix sig_path(m, h);
  sig_path.row(0).setConstant(st.sigma1_sq);
  for (int i = 2; i <= m; ++i)
    sig_path.row(i - 1) = forward_volatility(st.sigma_sq(i - 2, t0 - 1), cfg.lambda_sigma, 1.0,
                                             t0, h, freeze_vol, rng_sig)
                              .transpose();

  auto project = [&](double extra, std::uint64_t eps_stream, std::uint64_t nu_stream) {
    Rng rng_eps = Rng::stream(seed, draw_idx, eps_stream, rep);
    Rng rng_nu = Rng::stream(seed, draw_idx, nu_stream, rep);
    Vector x_hist(n);
    for (int l = 0; l < n; ++l) x_hist(l) = st.x_at(t0 - l);  // x at t0, t0-1, ...
    Matrix y(m, h);
    for (int j = 1; j <= h; ++j) {
      double x = (j == 1) ? extra : 0.0;
      for (int l = 1; l <= p; ++l) x += paths.delta[j - 1](l - 1) * x_hist(l - 1);
      x += std::sqrt(w_path(j - 1)) * rng_eps.normal();
      for (int l = n - 1; l >= 1; --l) x_hist(l) = x_hist(l - 1);
      x_hist(0) = x;
      for (int i = 0; i < m; ++i) {
        double v = 0.0;
        for (int k = 1; k <= r; ++k) v += paths.b[j - 1](i, k - 1) * x_hist(k - 1);
        v += std::sqrt(sig_path(i, j - 1)) * rng_nu.normal();
        y(i, j - 1) = v;
      }
    }
    return y;
  };
  Matrix shocked = project(shock, IMP_EPS_SHOCKED, IMP_NU_SHOCKED);
  Matrix base = project(0.0, IMP_EPS_BASE, IMP_NU_BASE);
  response += shocked - base;
}

}  // namespace

ImpulseSurface impulse_response(const PosteriorDraws& draws, const ImpulseRequest& request) {
  const ModelConfig& cfg = draws.config;
  const int m = cfg.m;
  const int h = request.horizon;
  if (draws.records.empty()) throw config_error("impulse_response: no draws");
  if (h < 1) throw config_error("impulse request: horizon must be at least 1");
  if (request.replicates < 1) throw config_error("impulse request: replicates must be >= 1");
  if (request.origins.empty()) throw config_error("impulse request: no origin times");
  for (int t0 : request.origins)
    if (t0 < 1 || t0 > draws.T)
      throw config_error("impulse request: origin " + std::to_string(t0) +
                         " outside forecastable range 1.." + std::to_string(draws.T));
  if (!request.common_random_numbers && cfg.variant == ModelVariant::MPlus)
    throw config_error("independent-path impulse differencing is implemented for Model M only");
  double shock = request.shock;
  if (std::isnan(shock)) shock = default_shock(draws);
  if (!std::isfinite(shock)) throw config_error("impulse request: shock must be finite");
  std::uint64_t seed = request.seed != 0 ? request.seed : (draws.seed ^ 0x696d70756c736575ULL);

  const int n_draws = draws.n_draws();
  ImpulseSurface out;
  out.origins = request.origins;
  out.horizon = h;
  out.shock = shock;
  out.responses.assign(request.origins.size(), Matrix::Zero(m, h));
  out.divergent.assign(request.origins.size(), std::vector<char>(m, 0));

  // per-draw accumulation, reduced in fixed order
  std::vector<std::vector<Matrix>> partial(
      n_draws, std::vector<Matrix>(request.origins.size(), Matrix::Zero(m, h)));
  parallel_for(n_draws, [&](int di) {
    LatentStateSet st = draws.state(di);
    for (size_t oi = 0; oi < request.origins.size(); ++oi) {
      int t0 = request.origins[oi];
      for (int rep = 0; rep < request.replicates; ++rep) {
        std::uint64_t rep_key =
            static_cast<std::uint64_t>(rep) * 131071ULL + static_cast<std::uint64_t>(t0);
        ForwardPaths paths =
            simulate_coefficient_paths(st, cfg, t0, h, request.freeze_indicators, seed,
                                       static_cast<std::uint64_t>(di), rep_key);
        if (request.common_random_numbers) {
          crn_difference(paths, cfg, shock, h, partial[di][oi]);
        } else {
          independent_difference(st, paths, cfg, shock, t0, h, request.freeze_volatilities,
                                 seed, static_cast<std::uint64_t>(di), rep_key,
                                 partial[di][oi]);
        }
      }
    }
  });
  const double denom = static_cast<double>(n_draws) * request.replicates;
  for (int di = 0; di < n_draws; ++di)
    for (size_t oi = 0; oi < request.origins.size(); ++oi)
      out.responses[oi] += partial[di][oi];
  for (size_t oi = 0; oi < request.origins.size(); ++oi) out.responses[oi] /= denom;

  for (size_t oi = 0; oi < request.origins.size(); ++oi)
    for (int i = 0; i < m; ++i)
      if (!out.responses[oi].row(i).allFinite() ||
          out.responses[oi].row(i).cwiseAbs().maxCoeff() > 1e12)
        out.divergent[oi][i] = 1;
  return out;
}

}  // namespace ltdfm

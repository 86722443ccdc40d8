#include "ltdfm/simulate.hpp"

#include <json.hpp>

#include "ltdfm/dlm.hpp"

namespace ltdfm {

Vector simulate_volatility_path(int T, double lambda, double n0, double s0, Rng& rng) {
  Vector v(T);
  double prec = rng.gamma(0.5 * n0, 0.5 * n0 * s0);
  double n = n0;
  for (int t = 1; t <= T; ++t) {
    double eta = rng.beta(0.5 * lambda * n, 0.5 * (1.0 - lambda) * n);
    prec = prec * eta / lambda;
    n = lambda * n + 1.0;
    v(t - 1) = 1.0 / prec;
  }
  return v;
}

namespace {

double pick_K(const ModelConfig& c, const PriorSpec& p, int i_minus2, int k) {
  if (p.K_matrix.size() != 0) return p.K_matrix(i_minus2, k);
  return c.K;
}

// one thresholded AR(1) process from spec or prior
void draw_lt_process(const LtProcessSpec& spec, const ModelConfig& cfg,
                     const ResolvedPriors& prior, double K, int T, Rng& rng, double& mu,
                     double& phi, double& v_sq, double& d, Vector& beta) {
  mu = spec.mu ? *spec.mu : rng.normal(prior.mu_normal.mean, std::sqrt(prior.mu_normal.variance));
  phi = spec.phi ? *spec.phi
                 : 2.0 * rng.beta(prior.phi_beta.a, prior.phi_beta.b) - 1.0;
  if (!(phi > -1.0 && phi < 1.0)) phi = std::min(0.999999, std::max(-0.999999, phi));
  if (spec.v) {
    v_sq = (*spec.v) * (*spec.v);
  } else {
    v_sq = 1.0 / rng.gamma(prior.v_prec.shape, prior.v_prec.rate);
  }
  double u = std::sqrt(v_sq / (1.0 - phi * phi));
  d = spec.d ? *spec.d : rng.uniform(0.0, std::abs(mu) + K * u);
  if (spec.beta_path) {
    if (static_cast<int>(spec.beta_path->size()) != T + 1)
      throw config_error("generation spec: beta_path length must be T+1");
    beta = *spec.beta_path;
  } else {
    beta.resize(T + 1);
    beta(0) = rng.normal(mu, u);
    for (int t = 1; t <= T; ++t)
      beta(t) = mu + phi * (beta(t - 1) - mu) + rng.normal(0.0, std::sqrt(v_sq));
  }
  (void)cfg;
}

}  // namespace

TruthRecord simulate_dataset(const ModelInputs& inputs, int T, const GenerationSpec& gen,
                             Rng& rng) {
  const ModelConfig& cfg = inputs.config;
  const ResolvedPriors& prior = inputs.prior;
  const int m = cfg.m, p = cfg.p, r = cfg.r, n = cfg.state_dim();
  const bool mplus = cfg.variant == ModelVariant::MPlus;

  if (gen.delta_path && (gen.delta_path->rows() != p || gen.delta_path->cols() != T + 1))
    throw config_error("generation spec: delta_path must be p x (T+1)");
  if (gen.w_path && static_cast<int>(gen.w_path->size()) != T)
    throw config_error("generation spec: w_path length must be T");
  if (gen.sigma_path && (gen.sigma_path->rows() != m - 1 || gen.sigma_path->cols() != T))
    throw config_error("generation spec: sigma_path must be (m-1) x T");
  if (gen.x_init && static_cast<int>(gen.x_init->size()) != n)
    throw config_error("generation spec: x_init length must be max(p, r)");
  if (!gen.loadings.empty() &&
      (static_cast<int>(gen.loadings.size()) != m - 1 ||
       static_cast<int>(gen.loadings[0].size()) != r))
    throw config_error("generation spec: loadings must be (m-1) x r");
  if (mplus && !gen.var_coeffs.empty() &&
      (static_cast<int>(gen.var_coeffs.size()) != m ||
       static_cast<int>(gen.var_coeffs[0].size()) != m))
    throw config_error("generation spec: var_coeffs must be m x m");

  int regen = 0;
  for (;;) {
    LatentStateSet st;
    st.n_state = n;

    st.psi = gen.psi ? *gen.psi
                     : sym_pinv(rng.wishart(prior.psi_prec.dof, prior.psi_prec.scale),
                                "simulated Psi precision", 0);

    if (gen.delta_path) {
      st.delta = *gen.delta_path;
    } else {
      st.delta.resize(p, T + 1);
      Matrix psi_sqrt = sym_sqrt(st.psi);
      Matrix c0_sqrt = sym_sqrt(prior.delta0_cov);
      st.delta.col(0) = prior.delta0_mean + c0_sqrt * rng.normal_vector(p);
      for (int t = 1; t <= T; ++t)
        st.delta.col(t) = st.delta.col(t - 1) + psi_sqrt * rng.normal_vector(p);
    }

    st.w = gen.w_path ? *gen.w_path
                      : simulate_volatility_path(T, cfg.lambda_w, prior.w_init.n0, prior.w_s0, rng);

    st.sigma1_sq = gen.sigma1_sq
                       ? *gen.sigma1_sq
                       : 1.0 / rng.gamma(prior.sigma1_prec.shape, prior.sigma1_prec.rate);

    if (gen.sigma_path) {
      st.sigma_sq = *gen.sigma_path;
    } else {
      st.sigma_sq.resize(m - 1, T);
      for (int i = 2; i <= m; ++i)
        st.sigma_sq.row(i - 2) = simulate_volatility_path(T, cfg.lambda_sigma,
                                                          prior.sigma_init.n0,
                                                          prior.sigma_s0(i - 2), rng)
                                     .transpose();
    }

    st.beta.resize(m - 1);
    st.thresholds.resize(m - 1, r);
    st.hyper.mu.resize(m - 1, r);
    st.hyper.phi.resize(m - 1, r);
    st.hyper.v_sq.resize(m - 1, r);
    for (int i = 2; i <= m; ++i) {
      st.beta[i - 2].resize(r, T + 1);
      for (int k = 1; k <= r; ++k) {
        LtProcessSpec ps;
        if (!gen.loadings.empty()) ps = gen.loadings[i - 2][k - 1];
        double mu, phi, v_sq, d;
        Vector traj;
        draw_lt_process(ps, cfg, prior, pick_K(cfg, prior, i - 2, k - 1), T, rng, mu, phi, v_sq,
                        d, traj);
        st.hyper.mu(i - 2, k - 1) = mu;
        st.hyper.phi(i - 2, k - 1) = phi;
        st.hyper.v_sq(i - 2, k - 1) = v_sq;
        st.thresholds(i - 2, k - 1) = d;
        st.beta[i - 2].row(k - 1) = traj.transpose();
      }
    }

    if (mplus) {
      st.alpha.resize(m);
      st.a_thresholds.resize(m, m);
      st.a_hyper.mu.resize(m, m);
      st.a_hyper.phi.resize(m, m);
      st.a_hyper.v_sq.resize(m, m);
      for (int i = 1; i <= m; ++i) {
        st.alpha[i - 1].resize(m, T + 1);
        for (int j = 1; j <= m; ++j) {
          LtProcessSpec ps;
          if (!gen.var_coeffs.empty()) ps = gen.var_coeffs[i - 1][j - 1];
          double mu, phi, v_sq, d;
          Vector traj;
          draw_lt_process(ps, cfg, prior, cfg.K, T, rng, mu, phi, v_sq, d, traj);
          st.a_hyper.mu(i - 1, j - 1) = mu;
          st.a_hyper.phi(i - 1, j - 1) = phi;
          st.a_hyper.v_sq(i - 1, j - 1) = v_sq;
          st.a_thresholds(i - 1, j - 1) = d;
          st.alpha[i - 1].row(j - 1) = traj.transpose();
        }
      }
      if (gen.y0) {
        st.y0 = *gen.y0;
      } else {
        st.y0 = std::sqrt(prior.y0_variance) * rng.normal_vector(m);
      }
    }

    st.x.resize(T + n);
    if (gen.x_init) {
      for (int j = 0; j < n; ++j) st.x(j) = (*gen.x_init)(j);
    } else {
      for (int j = 0; j < n; ++j) st.x(j) = rng.normal(0.0, std::sqrt(prior.x0_var));
    }
    bool exploded = false;
    for (int t = 1; t <= T; ++t) {
      double mean = 0.0;
      for (int j = 1; j <= p; ++j) mean += st.delta(j - 1, t) * st.x_at(t - j);
      st.x_at(t) = mean + rng.normal(0.0, std::sqrt(st.w(t - 1)));
      if (std::abs(st.x_at(t)) > gen.explosion_guard) {
        exploded = true;
        break;
      }
    }
    if (exploded) {
      if (++regen > gen.max_regenerations)
        throw numerical_error("simulate_dataset: latent process exploded " +
                              std::to_string(regen) + " times");
      continue;
    }

    ObservationMatrix data;
    data.values.resize(T, m);
    data.channel_names.resize(m);
    for (int i = 0; i < m; ++i) data.channel_names[i] = "ch" + std::to_string(i + 1);
    for (int t = 1; t <= T; ++t) {
      for (int i = 1; i <= m; ++i) {
        double mean = 0.0;
        for (int k = 1; k <= r; ++k) mean += st.loading(i, k, t, cfg.s) * st.x_at(t - k + 1);
        if (mplus) {
          for (int j = 1; j <= m; ++j) {
            double yprev = (t == 1) ? st.y0(j - 1) : data.values(t - 2, j - 1);
            mean += st.var_coeff(i, j, t) * yprev;
          }
        }
        double sd = std::sqrt(i == 1 ? st.sigma1_sq : st.sigma_sq(i - 2, t - 1));
        data.values(t - 1, i - 1) = mean + rng.normal(0.0, sd);
      }
    }

    TruthRecord rec;
    rec.truth = std::move(st);
    rec.data = std::move(data);
    rec.regeneration_count = regen;
    return rec;
  }
}

GenerationSpec parse_generation_spec(const std::string& json_text, const ModelConfig& config,
                                     int T) {
  using json = nlohmann::ordered_json;
  GenerationSpec g;
  if (json_text.empty()) return g;
  json j = json::parse(json_text);

  auto get_vector = [](const json& a) {
    Vector v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
    return v;
  };
  auto get_matrix = [&](const json& a) {
    Matrix m(a.size(), a.empty() ? 0 : a[0].size());
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t jj = 0; jj < a[i].size(); ++jj)
        m(static_cast<int>(i), static_cast<int>(jj)) = a[i][jj].get<double>();
    return m;
  };

  if (j.contains("psi")) g.psi = get_matrix(j["psi"]);
  if (j.contains("delta_constant")) {
    Vector d0 = get_vector(j["delta_constant"]);
    Matrix dp(config.p, T + 1);
    for (int t = 0; t <= T; ++t) dp.col(t) = d0;
    g.delta_path = dp;
  }
  if (j.contains("delta_path")) g.delta_path = get_matrix(j["delta_path"]);
  if (j.contains("w_constant")) g.w_path = Vector::Constant(T, j["w_constant"].get<double>());
  if (j.contains("sigma1_sq")) g.sigma1_sq = j["sigma1_sq"].get<double>();
  if (j.contains("sigma_constant")) {
    double s = j["sigma_constant"].get<double>();
    g.sigma_path = Matrix::Constant(config.m - 1, T, s);
  }
  if (j.contains("x_init")) g.x_init = get_vector(j["x_init"]);
  if (j.contains("y0")) g.y0 = get_vector(j["y0"]);
  if (j.contains("loadings")) {
    g.loadings.assign(config.m - 1, std::vector<LtProcessSpec>(config.r));
    for (const auto& e : j["loadings"]) {
      int i = e.at("i").get<int>(), k = e.at("k").get<int>();
      if (i < 2 || i > config.m || k < 1 || k > config.r)
        throw config_error("generation spec: loading index out of range");
      LtProcessSpec& ps = g.loadings[i - 2][k - 1];
      if (e.contains("mu")) ps.mu = e["mu"].get<double>();
      if (e.contains("phi")) ps.phi = e["phi"].get<double>();
      if (e.contains("v")) ps.v = e["v"].get<double>();
      if (e.contains("d")) ps.d = e["d"].get<double>();
      if (e.contains("beta_constant"))
        ps.beta_path = Vector::Constant(T + 1, e["beta_constant"].get<double>());
    }
  }
  if (j.contains("var_coeffs")) {
    g.var_coeffs.assign(config.m, std::vector<LtProcessSpec>(config.m));
    for (const auto& e : j["var_coeffs"]) {
      int i = e.at("i").get<int>(), k = e.at("j").get<int>();
      if (i < 1 || i > config.m || k < 1 || k > config.m)
        throw config_error("generation spec: var_coeff index out of range");
      LtProcessSpec& ps = g.var_coeffs[i - 1][k - 1];
      if (e.contains("mu")) ps.mu = e["mu"].get<double>();
      if (e.contains("phi")) ps.phi = e["phi"].get<double>();
      if (e.contains("v")) ps.v = e["v"].get<double>();
      if (e.contains("d")) ps.d = e["d"].get<double>();
      if (e.contains("alpha_constant"))
        ps.beta_path = Vector::Constant(T + 1, e["alpha_constant"].get<double>());
    }
  }
  if (j.contains("max_regenerations")) g.max_regenerations = j["max_regenerations"].get<int>();
  return g;
}

}  // namespace ltdfm

#include "ltdfm/summaries.hpp"

#include <algorithm>

namespace ltdfm {

double interpolated_quantile(std::vector<double>& values, double q) {
  if (values.empty()) throw config_error("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  if (n == 1) return values[0];
  double h = (n - 1) * q;
  int lo = static_cast<int>(std::floor(h));
  if (lo >= n - 1) return values[n - 1];
  if (lo < 0) return values[0];
  double frac = h - lo;
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

struct SeriesView {
  std::string name;
  // value of this series at time t (1..T) in the given record
  std::function<double(const DrawRecord&, int)> value;
};

std::vector<SeriesView> select_series(const PosteriorDraws& draws, const std::string& which) {
  const ModelConfig& c = draws.config;
  const int T = draws.T;
  const int n = c.state_dim();
  std::vector<SeriesView> out;
  if (which == "x") {
    out.push_back({"x", [n](const DrawRecord& r, int t) {
                     return static_cast<double>(r.x[t + n - 1]);
                   }});
  } else if (which == "delta") {
    for (int j = 1; j <= c.p; ++j)
      out.push_back({"delta" + std::to_string(j), [j, T](const DrawRecord& r, int t) {
                       return static_cast<double>(r.delta[(j - 1) * (T + 1) + t]);
                     }});
  } else if (which == "w") {
    out.push_back(
        {"w", [](const DrawRecord& r, int t) { return static_cast<double>(r.w[t - 1]); }});
  } else if (which == "sqrt_w") {
    out.push_back({"sqrt_w", [](const DrawRecord& r, int t) {
                     return std::sqrt(static_cast<double>(r.w[t - 1]));
                   }});
  } else if (which == "sigma" || which == "sigma_sq") {
    bool sd = which == "sigma";
    out.push_back({sd ? "sigma1" : "sigma1_sq", [sd](const DrawRecord& r, int) {
                     return sd ? std::sqrt(r.sigma1_sq) : r.sigma1_sq;
                   }});
    for (int i = 2; i <= c.m; ++i) {
      out.push_back({(sd ? "sigma" : "sigma_sq") + std::to_string(i),
                     [i, T, sd](const DrawRecord& r, int t) {
                       double v = static_cast<double>(r.sigma[(i - 2) * T + (t - 1)]);
                       return sd ? std::sqrt(v) : v;
                     }});
    }
  } else {
    throw config_error("unknown trajectory selector: " + which);
  }
  return out;
}

}  // namespace

std::vector<TrajectorySummary> summarize_trajectories(const PosteriorDraws& draws,
                                                      const std::string& which, double level) {
  if (draws.records.empty()) throw config_error("summarize_trajectories: no draws");
  if (!(level > 0.0 && level < 1.0)) throw config_error("credibility level outside (0,1)");
  const int T = draws.T;
  std::vector<SeriesView> series = select_series(draws, which);
  std::vector<TrajectorySummary> out;
  std::vector<double> buf(draws.records.size());
  for (const SeriesView& sv : series) {
    TrajectorySummary ts;
    ts.series = sv.name;
    ts.stats.resize(3, T);
    for (int t = 1; t <= T; ++t) {
      double sum = 0.0;
      for (size_t i = 0; i < draws.records.size(); ++i) {
        buf[i] = sv.value(draws.records[i], t);
        sum += buf[i];
      }
      ts.stats(0, t - 1) = sum / buf.size();
      ts.stats(1, t - 1) = interpolated_quantile(buf, 0.5 * (1.0 - level));
      ts.stats(2, t - 1) = interpolated_quantile(buf, 1.0 - 0.5 * (1.0 - level));
    }
    out.push_back(std::move(ts));
  }
  return out;
}

ShrinkageProbabilities shrinkage_probabilities(const PosteriorDraws& draws) {
  if (draws.records.empty()) throw config_error("shrinkage_probabilities: no draws");
  const ModelConfig& c = draws.config;
  const int T = draws.T, r = c.r, m = c.m;
  ShrinkageProbabilities out;
  out.loadings = Matrix::Zero((m - 1) * r, T);
  for (const DrawRecord& rec : draws.records) {
    for (int i = 0; i < m - 1; ++i) {
      for (int k = 0; k < r; ++k) {
        double d = rec.thresholds[i * r + k];
        const float* series = &rec.beta[(i * r + k) * (T + 1)];
        for (int t = 1; t <= T; ++t)
          if (std::abs(static_cast<double>(series[t])) >= d) out.loadings(i * r + k, t - 1) += 1.0;
      }
    }
  }
  out.loadings /= static_cast<double>(draws.records.size());
  if (c.variant == ModelVariant::MPlus) {
    out.var_coeffs = Matrix::Zero(m * m, T);
    for (const DrawRecord& rec : draws.records) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          double d = rec.a_thresholds[i * m + j];
          const float* series = &rec.alpha[(i * m + j) * (T + 1)];
          for (int t = 1; t <= T; ++t)
            if (std::abs(static_cast<double>(series[t])) >= d)
              out.var_coeffs(i * m + j, t - 1) += 1.0;
        }
      }
    }
    out.var_coeffs /= static_cast<double>(draws.records.size());
  }
  return out;
}

Matrix estimated_loadings(const PosteriorDraws& draws) {
  if (draws.records.empty()) throw config_error("estimated_loadings: no draws");
  const ModelConfig& c = draws.config;
  const int T = draws.T, r = c.r, m = c.m;
  Matrix mean = Matrix::Zero((m - 1) * r, T);
  for (const DrawRecord& rec : draws.records)
    for (int i = 0; i < m - 1; ++i)
      for (int k = 0; k < r; ++k) {
        const float* series = &rec.beta[(i * r + k) * (T + 1)];
        for (int t = 1; t <= T; ++t)
          mean(i * r + k, t - 1) += static_cast<double>(series[t]);
      }
  mean /= static_cast<double>(draws.records.size());
  Matrix prob = shrinkage_probabilities(draws).loadings;
  for (int row = 0; row < mean.rows(); ++row)
    for (int t = 0; t < T; ++t)
      if (!(prob(row, t) > 0.5)) mean(row, t) = 0.0;
  return mean;
}

Matrix fitted_means(const LatentStateSet& st, const ModelConfig& cfg, const Matrix& y) {
  const int T = static_cast<int>(y.rows());
  const bool mplus = cfg.variant == ModelVariant::MPlus;
  Matrix fit(T, cfg.m);
  for (int t = 1; t <= T; ++t) {
    for (int i = 1; i <= cfg.m; ++i) {
      double mean = 0.0;
      for (int k = 1; k <= cfg.r; ++k) mean += st.loading(i, k, t, cfg.s) * st.x_at(t - k + 1);
      if (mplus)
        for (int j = 1; j <= cfg.m; ++j) {
          double yprev = (t == 1) ? st.y0(j - 1) : y(t - 2, j - 1);
          mean += st.var_coeff(i, j, t) * yprev;
        }
      fit(t - 1, i - 1) = mean;
    }
  }
  return fit;
}

DicResult compute_dic(const PosteriorDraws& draws, const ObservationMatrix& data) {
  if (draws.records.empty())
    throw config_error("compute_dic: no per-draw likelihood records available");
  const ModelConfig& c = draws.config;
  const int T = draws.T;
  if (data.T() != T || data.m() != c.m) throw config_error("compute_dic: data dimension mismatch");

  double dbar = 0.0;
  Matrix mean_fit = Matrix::Zero(T, c.m);
  Matrix mean_var = Matrix::Zero(T, c.m);
  for (int idx = 0; idx < draws.n_draws(); ++idx) {
    const DrawRecord& rec = draws.records[idx];
    dbar += -2.0 * rec.loglik;
    LatentStateSet st = draws.state(idx);
    mean_fit += fitted_means(st, c, data.values);
    for (int t = 0; t < T; ++t) {
      mean_var(t, 0) += st.sigma1_sq;
      for (int i = 2; i <= c.m; ++i) mean_var(t, i - 1) += st.sigma_sq(i - 2, t);
    }
  }
  const double n = draws.n_draws();
  dbar /= n;
  mean_fit /= n;
  mean_var /= n;

  double plugin = 0.0;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < c.m; ++i)
      plugin += -2.0 * normal_logpdf(data.values(t, i), mean_fit(t, i), mean_var(t, i));

  DicResult out;
  out.mean_deviance = dbar;
  out.plugin_deviance = plugin;
  out.dic = 2.0 * dbar - plugin;
  out.effective_parameters = dbar - plugin;
  return out;
}

}  // namespace ltdfm

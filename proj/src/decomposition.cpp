#include "ltdfm/decomposition.hpp"

#include <algorithm>
#include <complex>
#include <numeric>

#include "ltdfm/parallel.hpp"
#include "ltdfm/summaries.hpp"

namespace ltdfm {

Matrix companion_matrix(const Vector& delta_t) {
  const int p = static_cast<int>(delta_t.size());
  Matrix G = Matrix::Zero(p, p);
  G.row(0) = delta_t.transpose();
  for (int j = 1; j < p; ++j) G(j, j - 1) = 1.0;
  return G;
}

double ComponentSet::reconstruction(int t) const {
  const ComponentSlice& s = at(t);
  double sum = 0.0;
  for (const auto& c : s.qp) sum += c.value;
  for (const auto& c : s.real_roots) sum += c.value;
  return sum;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

ComponentSlice decompose_at(const Matrix& G, const Vector& z, int t) {
  using Complex = std::complex<double>;
  const int p = static_cast<int>(G.rows());
  ComponentSlice slice;
  if (p == 1) {
    slice.real_roots.push_back({std::abs(G(0, 0)), z(0)});
    return slice;
  }
  Eigen::EigenSolver<Matrix> es(G);
  if (es.info() != Eigen::Success)
    throw numerical_error("eigendecomposition failed at t=" + std::to_string(t));
  Eigen::VectorXcd lambda = es.eigenvalues();
  Eigen::MatrixXcd E = es.eigenvectors();

  // pair conjugates; representatives live in the closed upper half plane
  const double imag_tol = 1e-10;
  std::vector<int> reps_complex, reps_real;
  for (int j = 0; j < p; ++j) {
    if (lambda(j).imag() > imag_tol)
      reps_complex.push_back(j);
    else if (std::abs(lambda(j).imag()) <= imag_tol)
      reps_real.push_back(j);
  }
  if (2 * static_cast<int>(reps_complex.size()) + static_cast<int>(reps_real.size()) != p)
    throw numerical_error("eigenvalue conjugate pairing failed at t=" + std::to_string(t));

  // near-repeated eigenvalues make the eigenbasis ill-conditioned
  std::vector<int> reps = reps_complex;
  reps.insert(reps.end(), reps_real.begin(), reps_real.end());
  for (size_t a = 0; a < reps.size(); ++a) {
    for (size_t b = a + 1; b < reps.size(); ++b) {
      double mod_a = std::abs(lambda(reps[a])), mod_b = std::abs(lambda(reps[b]));
      double ang_a = std::abs(std::arg(lambda(reps[a])));
      double ang_b = std::abs(std::arg(lambda(reps[b])));
      if (std::abs(mod_a - mod_b) < 1e-8 && std::abs(ang_a - ang_b) < 1e-8)
        throw numerical_error("degenerate decomposition (near-repeated eigenvalues) at t=" +
                              std::to_string(t));
    }
  }

  Eigen::VectorXcd zc = z.cast<Complex>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(E);
  Eigen::VectorXcd a = lu.solve(zc);

  for (int j : reps_complex) {
    Complex c = E(0, j) * a(j);
    QuasiPeriodicComponent comp;
    comp.frequency = std::arg(lambda(j)) / kTwoPi;
    comp.modulus = std::abs(lambda(j));
    comp.amplitude = 2.0 * std::abs(c);
    comp.value = 2.0 * c.real();
    slice.qp.push_back(comp);
  }
  for (int j : reps_real) {
    Complex c = E(0, j) * a(j);
    slice.real_roots.push_back({std::abs(lambda(j)), c.real()});
  }
  std::sort(slice.qp.begin(), slice.qp.end(),
            [](const auto& x, const auto& y) { return x.frequency < y.frequency; });
  std::sort(slice.real_roots.begin(), slice.real_roots.end(),
            [](const auto& x, const auto& y) { return x.modulus > y.modulus; });
  return slice;
}

}  // namespace

ComponentSet eigen_components(const Vector& x, int n_state, const Matrix& delta) {
  const int p = static_cast<int>(delta.rows());
  const int T = static_cast<int>(delta.cols()) - 1;
  if (static_cast<int>(x.size()) != T + n_state)
    throw config_error("eigen_components: x length does not match delta");
  ComponentSet out;
  out.p = p;
  out.slices.resize(T);
  auto x_at = [&](int t) { return x(t + n_state - 1); };
  for (int t = 1; t <= T; ++t) {
    Matrix G = companion_matrix(delta.col(t));
    Vector z(p);
    for (int j = 0; j < p; ++j) z(j) = x_at(t - j);
    out.slices[t - 1] = decompose_at(G, z, t);
  }
  return out;
}

namespace {

int modal_qp_count(const ComponentSet& comps) {
  std::vector<int> hist;
  for (const auto& s : comps.slices) {
    int c = static_cast<int>(s.qp.size());
    if (c >= static_cast<int>(hist.size())) hist.resize(c + 1, 0);
    hist[c]++;
  }
  int best = 0;
  for (size_t i = 1; i < hist.size(); ++i)
    if (hist[i] > hist[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace

ChannelComponents channel_components(const ComponentSet& comps,
                                     const std::vector<Matrix>& loadings, int r) {
  const int T = comps.T();
  const int m = static_cast<int>(loadings.size());
  ChannelComponents out;
  out.first_t = r;
  out.target_qp = modal_qp_count(comps);
  out.target_real = comps.p - 2 * out.target_qp;
  const double nan = std::nan("");
  out.qp.assign(m, Matrix::Constant(out.target_qp, T, nan));
  out.real_roots.assign(m, Matrix::Constant(out.target_real, T, nan));
  for (int t = r; t <= T; ++t) {
    bool stable = true;
    for (int k = 0; k < r; ++k)
      if (static_cast<int>(comps.at(t - k).qp.size()) != out.target_qp) stable = false;
    if (!stable) continue;
    for (int i = 0; i < m; ++i) {
      for (int g = 0; g < out.target_qp; ++g) {
        double sum = 0.0;
        for (int k = 0; k < r; ++k) sum += loadings[i](k, t - 1) * comps.at(t - k).qp[g].value;
        out.qp[i](g, t - 1) = sum;
      }
      for (int h = 0; h < out.target_real; ++h) {
        double sum = 0.0;
        for (int k = 0; k < r; ++k)
          sum += loadings[i](k, t - 1) * comps.at(t - k).real_roots[h].value;
        out.real_roots[i](h, t - 1) = sum;
      }
    }
  }
  return out;
}

ComponentPosterior component_posterior(const PosteriorDraws& draws, double level) {
  const int T = draws.T;
  const int n = draws.n_draws();
  ComponentPosterior out;
  std::vector<ComponentSet> sets(n);
  std::vector<char> ok(n, 0);
  parallel_for(n, [&](int i) {
    try {
      LatentStateSet st = draws.state(i);
      sets[i] = eigen_components(st.x, st.n_state, st.delta);
      ok[i] = 1;
    } catch (const numerical_error&) {
      ok[i] = 0;
    }
  });
  for (int i = 0; i < n; ++i)
    if (!ok[i]) out.skipped_draws++;

  // modal quasi-periodic count across draws and times
  std::vector<int> hist;
  for (int i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    for (const auto& s : sets[i].slices) {
      int c = static_cast<int>(s.qp.size());
      if (c >= static_cast<int>(hist.size())) hist.resize(c + 1, 0);
      hist[c]++;
    }
  }
  if (hist.empty()) throw numerical_error("component_posterior: no usable draws");
  int best = 0;
  for (size_t i = 1; i < hist.size(); ++i)
    if (hist[i] > hist[best]) best = static_cast<int>(i);
  out.target_qp = best;
  out.target_real = draws.config.p - 2 * best;

  out.qp.resize(out.target_qp);
  out.real_roots.resize(out.target_real);
  for (auto& tr : out.qp) {
    tr.frequency = Matrix::Zero(3, T);
    tr.modulus = Matrix::Zero(3, T);
    tr.value = Matrix::Zero(3, T);
  }
  for (auto& tr : out.real_roots) {
    tr.frequency = Matrix::Zero(3, T);
    tr.modulus = Matrix::Zero(3, T);
    tr.value = Matrix::Zero(3, T);
  }
  out.used.assign(T, 0);

  std::vector<double> buf;
  buf.reserve(n);
  auto fill_track = [&](Matrix& track, int t, std::vector<double>& values) {
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    track(0, t - 1) = mean;
    track(1, t - 1) = interpolated_quantile(values, 0.5 * (1.0 - level));
    track(2, t - 1) = interpolated_quantile(values, 1.0 - 0.5 * (1.0 - level));
  };
  for (int t = 1; t <= T; ++t) {
    std::vector<int> conforming;
    for (int i = 0; i < n; ++i)
      if (ok[i] && static_cast<int>(sets[i].at(t).qp.size()) == out.target_qp)
        conforming.push_back(i);
    out.used[t - 1] = static_cast<int>(conforming.size());
    if (conforming.empty()) continue;
    for (int g = 0; g < out.target_qp; ++g) {
      for (int what = 0; what < 3; ++what) {
        buf.clear();
        for (int i : conforming) {
          const auto& c = sets[i].at(t).qp[g];
          buf.push_back(what == 0 ? c.frequency : (what == 1 ? c.modulus : c.value));
        }
        fill_track(what == 0 ? out.qp[g].frequency
                             : (what == 1 ? out.qp[g].modulus : out.qp[g].value),
                   t, buf);
      }
    }
    for (int h = 0; h < out.target_real; ++h) {
      for (int what = 1; what < 3; ++what) {
        buf.clear();
        for (int i : conforming) {
          const auto& c = sets[i].at(t).real_roots[h];
          buf.push_back(what == 1 ? c.modulus : c.value);
        }
        fill_track(what == 1 ? out.real_roots[h].modulus : out.real_roots[h].value, t, buf);
      }
    }
  }
  return out;
}

ChannelComponentPosterior channel_component_posterior(const PosteriorDraws& draws) {
  const int T = draws.T;
  const int m = draws.config.m;
  const int r = draws.config.r;
  const int n = draws.n_draws();
  ChannelComponentPosterior out;
  std::vector<ChannelComponents> per_draw(n);
  std::vector<char> ok(n, 0);
  parallel_for(n, [&](int i) {
    try {
      LatentStateSet st = draws.state(i);
      ComponentSet comps = eigen_components(st.x, st.n_state, st.delta);
      std::vector<Matrix> loadings(m);
      for (int ch = 1; ch <= m; ++ch) {
        loadings[ch - 1].resize(r, T);
        for (int k = 1; k <= r; ++k)
          for (int t = 1; t <= T; ++t)
            loadings[ch - 1](k - 1, t - 1) = st.loading(ch, k, t, draws.config.s);
      }
      per_draw[i] = channel_components(comps, loadings, r);
      ok[i] = 1;
    } catch (const numerical_error&) {
      ok[i] = 0;
    }
  });

  // align on the modal structure
  std::vector<int> hist;
  for (int i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    int c = per_draw[i].target_qp;
    if (c >= static_cast<int>(hist.size())) hist.resize(c + 1, 0);
    hist[c]++;
  }
  if (hist.empty()) throw numerical_error("channel_component_posterior: no usable draws");
  int best = 0;
  for (size_t i = 1; i < hist.size(); ++i)
    if (hist[i] > hist[best]) best = static_cast<int>(i);
  out.target_qp = best;
  out.target_real = draws.config.p - 2 * best;

  const double nan = std::nan("");
  out.qp_mean.assign(m, Matrix::Constant(out.target_qp, T, nan));
  out.real_mean.assign(m, Matrix::Constant(out.target_real, T, nan));
  for (int ch = 0; ch < m; ++ch) {
    for (int g = 0; g < out.target_qp; ++g) {
      for (int t = 0; t < T; ++t) {
        double sum = 0.0;
        int cnt = 0;
        for (int i = 0; i < n; ++i) {
          if (!ok[i] || per_draw[i].target_qp != best) continue;
          double v = per_draw[i].qp[ch](g, t);
          if (std::isfinite(v)) {
            sum += v;
            ++cnt;
          }
        }
        if (cnt > 0) out.qp_mean[ch](g, t) = sum / cnt;
      }
    }
    for (int h = 0; h < out.target_real; ++h) {
      for (int t = 0; t < T; ++t) {
        double sum = 0.0;
        int cnt = 0;
        for (int i = 0; i < n; ++i) {
          if (!ok[i] || per_draw[i].target_qp != best) continue;
          double v = per_draw[i].real_roots[ch](h, t);
          if (std::isfinite(v)) {
            sum += v;
            ++cnt;
          }
        }
        if (cnt > 0) out.real_mean[ch](h, t) = sum / cnt;
      }
    }
  }
  return out;
}

}  // namespace ltdfm

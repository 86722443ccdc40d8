#include "ltdfm/dlm.hpp"

#include <string>

namespace ltdfm {

namespace {

// scale_hint carries the magnitude of the matrices the update was computed
// from; cancellation can leave roundoff asymmetry on that scale even when
// the result itself is small
void enforce_symmetry(Matrix& C, int t, const char* where, double scale_hint = 0.0) {
  double scale = std::max({1.0, scale_hint, C.cwiseAbs().maxCoeff()});
  double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw numerical_error(std::string(where) + ": covariance asymmetry " + std::to_string(asym) +
                          " at t=" + std::to_string(t));
  C = 0.5 * (C + C.transpose()).eval();
}

struct ObservedSlice {
  Matrix F;
  Vector v;
  Vector y;  // offset already removed
  int count = 0;
};

ObservedSlice observed_slice(const DlmSpec& spec, const Matrix& observations, int t) {
  ObservedSlice s;
  const Matrix& F = spec.F_at(t);
  const Vector& v = spec.v_at(t);
  const int obs_dim = static_cast<int>(F.rows());
  std::vector<int> idx;
  idx.reserve(obs_dim);
  for (int i = 0; i < obs_dim; ++i)
    if (std::isfinite(observations(t - 1, i))) idx.push_back(i);
  s.count = static_cast<int>(idx.size());
  if (s.count == 0) return s;
  s.F.resize(s.count, F.cols());
  s.v.resize(s.count);
  s.y.resize(s.count);
  for (int k = 0; k < s.count; ++k) {
    s.F.row(k) = F.row(idx[k]);
    s.v(k) = v(idx[k]);
    s.y(k) = observations(t - 1, idx[k]);
    if (spec.has_offset()) s.y(k) -= spec.offset_at(t)(idx[k]);
  }
  return s;
}

}  // namespace

Matrix sym_pinv(const Matrix& S, const char* context, int t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Vector& ev = es.eigenvalues();
  double max_ev = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -1e-8 * std::max(1.0, max_ev))
    throw numerical_error(std::string(context) + " not positive semidefinite at t=" +
                          std::to_string(t));
  double tol = 1e-13 * std::max(1.0, max_ev);
  Vector inv = ev;
  for (int i = 0; i < inv.size(); ++i) inv(i) = ev(i) > tol ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Matrix sym_sqrt(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  Vector ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

KalmanFilterResult kalman_filter(const DlmSpec& spec, const Matrix& observations) {
  const int T = spec.T;
  const int n = spec.state_dim();
  if (static_cast<int>(observations.rows()) != T)
    throw config_error("dlm: observation rows do not match spec T");
  KalmanFilterResult out;
  out.m.resize(T + 1);
  out.C.resize(T + 1);
  out.a.resize(T);
  out.R.resize(T);
  out.m[0] = spec.m0;
  out.C[0] = spec.C0;
  enforce_symmetry(out.C[0], 0, "kalman_filter C0");

  for (int t = 1; t <= T; ++t) {
    const Matrix& G = spec.G_at(t);
    Vector a = G * out.m[t - 1];
    Matrix R = G * out.C[t - 1] * G.transpose() + spec.W_at(t);
    enforce_symmetry(R, t, "kalman_filter R");

    ObservedSlice obs = observed_slice(spec, observations, t);
    if (obs.count == 0) {
      out.m[t] = a;
      out.C[t] = R;
    } else {
      Vector e = obs.y - obs.F * a;
      Matrix Q = obs.F * R * obs.F.transpose();
      Q.diagonal() += obs.v;
      enforce_symmetry(Q, t, "kalman_filter Q");
      Matrix Qinv = sym_pinv(Q, "innovation covariance", t);
      Matrix K = R * obs.F.transpose() * Qinv;
      out.m[t] = a + K * e;
      Matrix IKF = Matrix::Identity(n, n) - K * obs.F;
      Matrix C = IKF * R * IKF.transpose() + K * obs.v.asDiagonal() * K.transpose();
      enforce_symmetry(C, t, "kalman_filter C", R.cwiseAbs().maxCoeff());
      out.C[t] = C;
    }
    out.a[t - 1] = std::move(a);
    out.R[t - 1] = std::move(R);
  }
  return out;
}

SmoothedMoments kalman_smooth_moments(const DlmSpec& spec, const Matrix& observations) {
  KalmanFilterResult f = kalman_filter(spec, observations);
  const int T = spec.T;
  SmoothedMoments out;
  out.mean.resize(T + 1);
  out.cov.resize(T + 1);
  out.mean[T] = f.m[T];
  out.cov[T] = f.C[T];
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& G = spec.G_at(t + 1);
    const Matrix& R = f.R[t];
    Matrix J = f.C[t] * G.transpose() * sym_pinv(R, "prediction covariance", t + 1);
    out.mean[t] = f.m[t] + J * (out.mean[t + 1] - f.a[t]);
    Matrix C = f.C[t] + J * (out.cov[t + 1] - R) * J.transpose();
    enforce_symmetry(C, t, "kalman_smooth C",
                     std::max(f.C[t].cwiseAbs().maxCoeff(), R.cwiseAbs().maxCoeff()));
    out.cov[t] = C;
  }
  return out;
}

std::vector<Vector> ffbs_sample(const DlmSpec& spec, const Matrix& observations, Rng& rng) {
  KalmanFilterResult f = kalman_filter(spec, observations);
  const int T = spec.T;
  const int n = spec.state_dim();
  std::vector<Vector> draw(T + 1);
  draw[T] = f.m[T] + sym_sqrt(f.C[T]) * rng.normal_vector(n);
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& G = spec.G_at(t + 1);
    const Matrix& R = f.R[t];
    Matrix B = f.C[t] * G.transpose() * sym_pinv(R, "prediction covariance", t + 1);
    Vector h = f.m[t] + B * (draw[t + 1] - f.a[t]);
    // Joseph form: H = (I - BG) C (I - BG)' + B W B'; equal to C - B G C in
    // exact arithmetic but stable under a diffuse C
    Matrix IBG = Matrix::Identity(n, n) - B * G;
    Matrix H = IBG * f.C[t] * IBG.transpose() + B * spec.W_at(t + 1) * B.transpose();
    enforce_symmetry(H, t, "ffbs H", f.C[t].cwiseAbs().maxCoeff());
    draw[t] = h + sym_sqrt(H) * rng.normal_vector(n);
  }
  return draw;
}

}  // namespace ltdfm

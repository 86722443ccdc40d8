#pragma once

#include <vector>

#include "ltdfm/rng.hpp"
#include "ltdfm/types.hpp"

namespace ltdfm {

// Conditionally linear-Gaussian state-space model over t = 1..T:
//   y_t = offset_t + F_t theta_t + nu_t,   nu_t ~ N(0, diag(v_diag_t))
//   theta_t = G_t theta_{t-1} + omega_t,   omega_t ~ N(0, W_t)
//   theta_0 ~ N(m0, C0)
// Per-time arrays of size 1 broadcast to all t. W_t may be singular
// (companion-form states evolve their lower rows deterministically).
// Observation entries that are NaN are treated as missing and skipped.
struct DlmSpec {
  std::vector<Matrix> F;
  std::vector<Vector> v_diag;
  std::vector<Matrix> G;
  std::vector<Matrix> W;
  std::vector<Vector> offset;  // optional known additive terms; empty = zero
  Vector m0;
  Matrix C0;
  int T = 0;

  int state_dim() const { return static_cast<int>(m0.size()); }
  const Matrix& F_at(int t) const { return F[F.size() == 1 ? 0 : t - 1]; }
  const Vector& v_at(int t) const { return v_diag[v_diag.size() == 1 ? 0 : t - 1]; }
  const Matrix& G_at(int t) const { return G[G.size() == 1 ? 0 : t - 1]; }
  const Matrix& W_at(int t) const { return W[W.size() == 1 ? 0 : t - 1]; }
  bool has_offset() const { return !offset.empty(); }
  const Vector& offset_at(int t) const { return offset[offset.size() == 1 ? 0 : t - 1]; }
};

struct KalmanFilterResult {
  std::vector<Vector> m;  // filtered means, index t = 0..T
  std::vector<Matrix> C;  // filtered covariances
  std::vector<Vector> a;  // predicted means, index t = 1..T (stored at t-1)
  std::vector<Matrix> R;  // predicted covariances
};

struct SmoothedMoments {
  std::vector<Vector> mean;  // t = 0..T
  std::vector<Matrix> cov;
};

KalmanFilterResult kalman_filter(const DlmSpec& spec, const Matrix& observations);

// E[theta_t | y_{1:T}] and Cov[theta_t | y_{1:T}] for t = 0..T.
SmoothedMoments kalman_smooth_moments(const DlmSpec& spec, const Matrix& observations);

// One joint draw of theta_{0:T} from the smoothing distribution.
std::vector<Vector> ffbs_sample(const DlmSpec& spec, const Matrix& observations, Rng& rng);

// Symmetric pseudo-inverse with PSD check; throws numerical_error naming
// `context` if the matrix has a significantly negative eigenvalue.
Matrix sym_pinv(const Matrix& S, const char* context, int t);

// Symmetric square root with small negative eigenvalues clamped to zero.
Matrix sym_sqrt(const Matrix& S);

}  // namespace ltdfm

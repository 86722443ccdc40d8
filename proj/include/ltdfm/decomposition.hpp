#pragma once

#include <vector>

#include "ltdfm/sampler.hpp"
#include "ltdfm/types.hpp"

namespace ltdfm {

// p x p companion form: coefficients in the first row, identity subdiagonal.
Matrix companion_matrix(const Vector& delta_t);

// One quasi-periodic component at one time: a stochastic sine wave with
// characteristic frequency (cycles/step, in (0, 0.5)) and modulus from a
// complex-conjugate eigenvalue pair of the companion matrix.
struct QuasiPeriodicComponent {
  double frequency = 0.0;
  double modulus = 0.0;
  double amplitude = 0.0;
  double value = 0.0;
};

struct RealComponent {
  double modulus = 0.0;
  double value = 0.0;
};

struct ComponentSlice {
  std::vector<QuasiPeriodicComponent> qp;  // sorted by frequency, lowest first
  std::vector<RealComponent> real_roots;   // sorted by modulus, largest first
};

struct ComponentSet {
  int p = 0;
  std::vector<ComponentSlice> slices;  // t = 1..T

  int T() const { return static_cast<int>(slices.size()); }
  const ComponentSlice& at(int t) const { return slices[t - 1]; }
  double reconstruction(int t) const;  // sum of all components at t
};

// Eigendecomposes G_t at every t and projects the companion state onto the
// eigenbasis; conjugate pairs recombine into real quasi-periodic series.
// x is indexed as in LatentStateSet (length T + n_state); delta is p x (T+1).
// Near-repeated eigenvalues raise a numerical error naming t.
ComponentSet eigen_components(const Vector& x, int n_state, const Matrix& delta);

// Lagged components weighted by the thresholded loadings:
//   y~_igt = sum_{k=0:r-1} b_{i,k+1,t} x~_{g,t-k}
// Values exist from t = r onward and only where the component counts are
// stable across the lag window; other cells are NaN.
struct ChannelComponents {
  int first_t = 1;
  int target_qp = 0;
  int target_real = 0;
  std::vector<Matrix> qp;          // per channel: target_qp x T
  std::vector<Matrix> real_roots;  // per channel: target_real x T
};

ChannelComponents channel_components(const ComponentSet& comps,
                                     const std::vector<Matrix>& loadings, int r);

// Per-draw decomposition summarized pointwise; components are matched across
// draws by frequency ordering. Draws with degenerate decompositions are
// skipped and counted.
struct ComponentTrack {
  Matrix frequency;  // 3 x T: mean, lower, upper
  Matrix modulus;
  Matrix value;
};

struct ComponentPosterior {
  int target_qp = 0;
  int target_real = 0;
  std::vector<ComponentTrack> qp;
  std::vector<ComponentTrack> real_roots;  // frequency rows unused (zero)
  int skipped_draws = 0;
  std::vector<int> used;  // per t: number of contributing draws
};

ComponentPosterior component_posterior(const PosteriorDraws& draws, double level = 0.95);

// Posterior means of per-channel component contributions.
struct ChannelComponentPosterior {
  int target_qp = 0;
  int target_real = 0;
  std::vector<Matrix> qp_mean;    // per channel: target_qp x T (NaN where undefined)
  std::vector<Matrix> real_mean;  // per channel: target_real x T
};

ChannelComponentPosterior channel_component_posterior(const PosteriorDraws& draws);

}  // namespace ltdfm

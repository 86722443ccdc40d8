#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "ltdfm/errors.hpp"

namespace ltdfm {

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

// splitmix64 stream. Substreams are derived by hashing (seed, sweep, block),
// so every sampler block draws from its own stream regardless of thread
// scheduling; results are bit-identical for any thread count.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

  static Rng stream(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = mix64(seed + 0x9e3779b97f4a7c15ULL);
    s = mix64(s ^ (a + 0xbf58476d1ce4e5b9ULL));
    s = mix64(s ^ (b + 0x94d049bb133111ebULL));
    s = mix64(s ^ (c + 0x2545f4914f6cdd1dULL));
    Rng r(0);
    r.state_ = s;
    return r;
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // strictly inside (0,1)
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // shape-rate; shape 0 returns 0 exactly (degenerate gamma)
  double gamma(double shape, double rate) {
    if (shape < 0.0 || rate <= 0.0) throw numerical_error("gamma draw: invalid parameters");
    if (shape == 0.0) return 0.0;
    if (shape < 1.0) {
      double g = gamma(shape + 1.0, rate);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    // Marsaglia-Tsang
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }

  double beta(double a, double b) {
    if (a == 0.0) return 0.0;  // degenerate at 0
    if (b == 0.0) return 1.0;  // degenerate at 1
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    return x / (x + y);
  }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = normal();
    return z;
  }

  // exact inverse-cdf sampler, no rejection
  double truncated_normal(double mean, double sd, double lo, double hi);

  // W(dof, scale) with E[X] = dof * scale; Bartlett decomposition
  Eigen::MatrixXd wishart(double dof, const Eigen::MatrixXd& scale) {
    const int p = static_cast<int>(scale.rows());
    if (dof <= p - 1) throw numerical_error("wishart draw: dof must exceed dim-1");
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success)
      throw numerical_error("wishart draw: scale matrix not positive definite");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      A(i, i) = std::sqrt(chi_squared(dof - i));
      for (int j = 0; j < i; ++j) A(i, j) = normal();
    }
    Eigen::MatrixXd X = llt.matrixL() * A;
    return X * X.transpose();
  }

 private:
  uint64_t state_;
};

inline double normal_pdf(double z) {
  return 0.3989422804014326779399461 * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244008444); }

inline double normal_logpdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (std::log(6.283185307179586476925287 * var) + d * d / var);
}

// inverse standard normal cdf: Acklam's rational approximation plus one
// Halley refinement, accurate to ~1e-15 over (0,1)
inline double normal_ppf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw numerical_error("normal_ppf: p outside (0,1)");
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(6.283185307179586476925287) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

inline double Rng::truncated_normal(double mean, double sd, double lo, double hi) {
  double plo = normal_cdf((lo - mean) / sd);
  double phi = normal_cdf((hi - mean) / sd);
  if (phi - plo < 1e-300) {
    // interval mass underflows; clamp to the nearer bound
    return (lo - mean > 0.0) ? lo : hi;
  }
  double u = uniform(plo, phi);
  u = std::min(std::max(u, 1e-300), 1.0 - 1e-16);
  return mean + sd * normal_ppf(u);
}

inline double truncated_normal_logpdf(double x, double mean, double sd, double lo, double hi) {
  if (x < lo || x > hi) return -std::numeric_limits<double>::infinity();
  double z = normal_cdf((hi - mean) / sd) - normal_cdf((lo - mean) / sd);
  return normal_logpdf(x, mean, sd * sd) - std::log(z);
}

}  // namespace ltdfm

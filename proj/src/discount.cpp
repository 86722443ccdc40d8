#include "ltdfm/discount.hpp"

namespace ltdfm {

DiscountFilterResult discount_filter(const Vector& residuals, double lambda, double n0,
                                     double s0) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw config_error("discount factor outside (0, 1]");
  if (!(n0 > 0.0) || !(s0 > 0.0)) throw config_error("volatility init (n0, s0) must be positive");
  const int T = static_cast<int>(residuals.size());
  DiscountFilterResult out;
  out.n.resize(T + 1);
  out.d.resize(T + 1);
  out.n(0) = n0;
  out.d(0) = n0 * s0;
  for (int t = 1; t <= T; ++t) {
    double e = residuals(t - 1);
    if (!std::isfinite(e)) throw numerical_error("discount filter: non-finite residual");
    out.n(t) = lambda * out.n(t - 1) + 1.0;
    out.d(t) = lambda * out.d(t - 1) + e * e;
  }
  return out;
}

VolatilityPath discount_variance_ffbs(const Vector& residuals, double lambda, double n0,
                                      double s0, Rng& rng) {
  if (residuals.size() == 0) throw config_error("discount ffbs: no residuals");
  DiscountFilterResult f = discount_filter(residuals, lambda, n0, s0);
  const int T = static_cast<int>(residuals.size());
  VolatilityPath path;
  path.discount = lambda;
  path.n0 = n0;
  path.s0 = s0;
  path.variances.resize(T);
  double prec = rng.gamma(0.5 * f.n(T), 0.5 * f.d(T));
  path.variances(T - 1) = 1.0 / prec;
  for (int t = T - 1; t >= 1; --t) {
    prec = lambda * prec + rng.gamma(0.5 * (1.0 - lambda) * f.n(t), 0.5 * f.d(t));
    path.variances(t - 1) = 1.0 / prec;
  }
  return path;
}

double discount_dof_at(double n0, double lambda, int t) {
  if (lambda == 1.0) return n0 + t;
  double lt = std::pow(lambda, t);
  return lt * n0 + (1.0 - lt) / (1.0 - lambda);
}

}  // namespace ltdfm

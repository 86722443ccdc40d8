#pragma once

#include "ltdfm/rng.hpp"
#include "ltdfm/types.hpp"

namespace ltdfm {

// Inverse-gamma/beta discount model for a slowly changing variance v_t:
// precision phi_t = phi_{t-1} * eta_t / lambda with
// eta_t ~ Beta(lambda n_{t-1}/2, (1-lambda) n_{t-1}/2), observed residuals
// e_t ~ N(0, v_t).
struct VolatilityPath {
  Vector variances;  // t = 1..T
  double discount = 0.99;
  double n0 = 1.0;
  double s0 = 1.0;
};

// Forward recursions: n_t = lambda n_{t-1} + 1, d_t = lambda d_{t-1} + e_t^2,
// with d_0 = n_0 s_0. Point estimate of v_t is d_t / n_t.
struct DiscountFilterResult {
  Vector n;  // t = 0..T
  Vector d;
};

DiscountFilterResult discount_filter(const Vector& residuals, double lambda, double n0,
                                     double s0);

// Retrospective joint draw of v_{1:T}: phi_T ~ G(n_T/2, d_T/2), then
// phi_t = lambda phi_{t+1} + G((1-lambda) n_t / 2, d_t / 2). At lambda = 1 the
// trajectory is constant and equal in law to the pooled conjugate posterior.
VolatilityPath discount_variance_ffbs(const Vector& residuals, double lambda, double n0,
                                      double s0, Rng& rng);

// Degrees of freedom after t observations (deterministic in the data).
double discount_dof_at(double n0, double lambda, int t);

}  // namespace ltdfm

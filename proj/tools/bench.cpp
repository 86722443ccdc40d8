// serial vs OpenMP benchmark for the channel-parallel sampler blocks and the
// draw-parallel postprocessing kernels
#include <chrono>
#include <cstdio>

#include "ltdfm/decomposition.hpp"
#include "ltdfm/impulse.hpp"
#include "ltdfm/parallel.hpp"
#include "ltdfm/sampler.hpp"
#include "ltdfm/simulate.hpp"

using namespace ltdfm;

namespace {

double time_seconds(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelInputs bench_inputs(int m, int T) {
  ModelConfig cfg;
  cfg.m = m;
  cfg.p = 4;
  cfg.r = 3;
  cfg.s = 2;
  cfg.variant = ModelVariant::M;
  cfg.mcmc.rng_seed = 42;
  PriorSpec prior = default_priors(cfg);
  prior.x0_variance = 100.0;
  prior.w_init.s0 = 1.0;
  prior.sigma_init.s0 = 1.0;
  prior.psi_prec.dof = 50.0;
  prior.psi_prec.scale = Matrix::Identity(cfg.p, cfg.p) * 20.0;
  return validate_config_for_simulation(cfg, prior, T);
}

}  // namespace

int main(int argc, char** argv) {
  const int m = 12, T = 800;
  int sweeps = argc > 1 ? std::atoi(argv[1]) : 20;
  ModelInputs inputs = bench_inputs(m, T);

  GenerationSpec gen;
  gen.delta_path = Matrix::Zero(inputs.config.p, T + 1);
  gen.delta_path->row(0).setConstant(1.6);
  gen.delta_path->row(1).setConstant(-0.9);
  gen.w_path = Vector::Constant(T, 1.0);
  gen.sigma1_sq = 0.25;
  gen.sigma_path = Matrix::Constant(m - 1, T, 0.25);
  gen.x_init = Vector::Zero(inputs.config.state_dim());
  Rng rng = Rng::stream(7, 1);
  TruthRecord rec = simulate_dataset(inputs, T, gen, rng);

  int hw = num_threads();
  std::printf("bench: m=%d T=%d p=%d r=%d, %d sweeps, hardware threads=%d\n", m, T,
              inputs.config.p, inputs.config.r, sweeps, hw);

  auto run_sweeps = [&]() {
    Sampler smp(inputs, rec.data);
    for (int s = 1; s <= sweeps; ++s) smp.sweep(s);
    return smp.state().x.sum();
  };
  set_num_threads(1);
  double checksum_serial = 0, checksum_par = 0;
  double t_serial = time_seconds([&] { checksum_serial = run_sweeps(); });
  set_num_threads(hw);
  double t_par = time_seconds([&] { checksum_par = run_sweeps(); });
  std::printf("sampler sweeps      serial %8.3fs   omp(%d) %8.3fs   speedup %.2fx   %s\n",
              t_serial, hw, t_par, t_serial / t_par,
              checksum_serial == checksum_par ? "bit-identical" : "MISMATCH");

  // short fit to feed the postprocessing kernels
  ModelInputs fit_inputs = inputs;
  fit_inputs.config.mcmc.burn_in = 20;
  fit_inputs.config.mcmc.draws = 200;
  fit_inputs.config.mcmc.thin = 1;
  set_num_threads(hw);
  PosteriorDraws draws = run_mcmc(fit_inputs, rec.data);

  set_num_threads(1);
  double c1 = 0, c2 = 0;
  double t_dec_serial = time_seconds([&] {
    ComponentPosterior cp = component_posterior(draws);
    c1 = cp.qp.empty() ? 0.0 : cp.qp[0].frequency.sum();
  });
  set_num_threads(hw);
  double t_dec_par = time_seconds([&] {
    ComponentPosterior cp = component_posterior(draws);
    c2 = cp.qp.empty() ? 0.0 : cp.qp[0].frequency.sum();
  });
  std::printf("decomposition       serial %8.3fs   omp(%d) %8.3fs   speedup %.2fx   %s\n",
              t_dec_serial, hw, t_dec_par, t_dec_serial / t_dec_par,
              c1 == c2 ? "bit-identical" : "MISMATCH");

  ImpulseRequest req;
  req.origins = {T / 4, T / 2, 3 * T / 4};
  req.horizon = 80;
  req.replicates = 4;
  set_num_threads(1);
  Matrix r1, r2;
  double t_imp_serial =
      time_seconds([&] { r1 = impulse_response(draws, req).responses[0]; });
  set_num_threads(hw);
  double t_imp_par = time_seconds([&] { r2 = impulse_response(draws, req).responses[0]; });
  std::printf("impulse responses   serial %8.3fs   omp(%d) %8.3fs   speedup %.2fx   %s\n",
              t_imp_serial, hw, t_imp_par, t_imp_serial / t_imp_par,
              r1 == r2 ? "bit-identical" : "MISMATCH");
  return 0;
}

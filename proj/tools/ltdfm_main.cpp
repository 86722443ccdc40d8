// ltdfm command line: simulate | fit | postprocess
#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ltdfm/csv.hpp"
#include "ltdfm/decomposition.hpp"
#include "ltdfm/draws_io.hpp"
#include "ltdfm/impulse.hpp"
#include "ltdfm/parallel.hpp"
#include "ltdfm/simulate.hpp"
#include "ltdfm/summaries.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ltdfm;

namespace {

// stable exit codes, documented in the README
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitIo = 5;
constexpr int kExitFormat = 6;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw io_error("write failed: " + path.string());
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string variant;
};

void apply_overrides(ConfigFile& cf, const CommonArgs& args) {
  if (args.seed_set) cf.config.mcmc.rng_seed = args.seed;
  if (!args.variant.empty()) {
    if (args.variant == "M")
      cf.config.variant = ModelVariant::M;
    else if (args.variant == "M+")
      cf.config.variant = ModelVariant::MPlus;
    else
      throw config_error("unknown variant: " + args.variant);
  }
  if (args.threads > 0) set_num_threads(args.threads);
}

int cmd_simulate(const CommonArgs& args) {
  ConfigFile cf = load_config_file(args.config_path);
  apply_overrides(cf, args);
  if (cf.simulate_T < 2) throw config_error("config missing simulate.T (need T >= 2)");
  ModelInputs inputs = validate_config_for_simulation(cf.config, cf.prior, cf.simulate_T);
  GenerationSpec gen;
  if (cf.simulate_mode == "fixed" || !cf.simulate_truth.empty())
    gen = parse_generation_spec(cf.simulate_truth, cf.config, cf.simulate_T);
  else if (cf.simulate_mode != "prior")
    throw config_error("simulate.mode must be \"prior\" or \"fixed\"");

  Rng rng = Rng::stream(inputs.config.mcmc.rng_seed, 0x73696dULL);
  TruthRecord rec = simulate_dataset(inputs, cf.simulate_T, gen, rng);

  fs::create_directories(args.out_dir);
  fs::path dir(args.out_dir);
  write_csv((dir / "data.csv").string(), rec.data);
  {
    DrawWriter w((dir / "truth.bin").string(), inputs.config, inputs.prior, cf.simulate_T,
                 inputs.config.mcmc.rng_seed);
    double ll = conditional_loglik(rec.truth, inputs.config, rec.data.values);
    w.append(pack_record(rec.truth, inputs.config, cf.simulate_T, ll));
    w.finalize(AcceptanceRates{});
  }
  json manifest;
  manifest["seed"] = inputs.config.mcmc.rng_seed;
  manifest["config_hash"] = hex64(config_hash(inputs.config, inputs.prior));
  manifest["T"] = cf.simulate_T;
  manifest["m"] = inputs.config.m;
  manifest["variant"] = variant_name(inputs.config.variant);
  manifest["regenerations"] = rec.regeneration_count;
  manifest["files"] = {{"data", "data.csv"}, {"truth", "truth.bin"}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << (dir / "data.csv").string() << " (" << cf.simulate_T << " x "
            << inputs.config.m << ")\n";
  return 0;
}

int cmd_fit(const CommonArgs& args, const std::string& data_path, int stride, int drop_leading,
            bool resume, int max_sweeps) {
  auto t_start = std::chrono::steady_clock::now();
  ConfigFile cf = load_config_file(args.config_path);
  apply_overrides(cf, args);
  ObservationMatrix data = read_csv(data_path, stride, drop_leading);
  ModelInputs inputs = validate_config(cf.config, cf.prior, data);

  fs::create_directories(args.out_dir);
  fs::path dir(args.out_dir);
  fs::path draws_path = dir / "draws.bin";
  fs::path ckpt_path = dir / "checkpoint.bin";

  RunOptions opts;
  opts.keep_records = false;
  opts.stop_after_sweeps = max_sweeps;

  std::optional<Sampler> resume_sampler;
  std::optional<DrawWriter> writer;
  if (resume) {
    if (!fs::exists(ckpt_path)) throw io_error("no checkpoint to resume from: " + ckpt_path.string());
    resume_sampler.emplace(inputs, data);
    ResumeInfo info = read_checkpoint(ckpt_path.string(), *resume_sampler);
    opts.resume_from = &*resume_sampler;
    opts.start_sweep = info.sweep;
    opts.records_written = info.records_written;
    writer.emplace(DrawWriter::resume(draws_path.string(), inputs.config, inputs.prior,
                                      data.T(), inputs.config.mcmc.rng_seed,
                                      info.records_written));
  } else {
    writer.emplace(draws_path.string(), inputs.config, inputs.prior, data.T(),
                   inputs.config.mcmc.rng_seed);
  }
  opts.on_record = [&](const DrawRecord& rec) { writer->append(rec); };
  opts.on_checkpoint = [&](const Sampler& smp, int sweep, int records) {
    write_checkpoint(ckpt_path.string(), smp, sweep, records);
  };

  PosteriorDraws out = run_mcmc(inputs, data, opts);
  writer->finalize(out.acceptance);

  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
  json report;
  report["seed"] = inputs.config.mcmc.rng_seed;
  report["config_hash"] = hex64(config_hash(inputs.config, inputs.prior));
  report["variant"] = variant_name(inputs.config.variant);
  report["T"] = data.T();
  report["m"] = inputs.config.m;
  report["sweeps"] = inputs.config.mcmc.burn_in + inputs.config.mcmc.draws;
  report["records"] = writer->records_written();
  report["acceptance"] = {
      {"beta_points", out.acceptance.beta_points}, {"thresholds", out.acceptance.thresholds},
      {"mu", out.acceptance.mu},                   {"v", out.acceptance.v},
      {"phi", out.acceptance.phi},                 {"a_points", out.acceptance.a_points},
      {"a_thresholds", out.acceptance.a_thresholds}, {"a_mu", out.acceptance.a_mu},
      {"a_v", out.acceptance.a_v},                 {"a_phi", out.acceptance.a_phi}};
  report["elapsed_seconds"] = elapsed.count();
  write_text(dir / "run_report.json", report.dump(2) + "\n");
  std::cout << "wrote " << draws_path.string() << " (" << writer->records_written()
            << " records)\n";
  return 0;
}

void write_long_csv(const fs::path& path, const std::string& header,
                    const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
  if (!out) throw io_error("write failed: " + path.string());
}

int cmd_postprocess(const std::string& draws_path, const std::string& request,
                    const std::string& out_dir, const std::string& data_path, double level,
                    int horizon, const std::vector<int>& origins, double shock, int replicates,
                    int threads) {
  if (threads > 0) set_num_threads(threads);
  PosteriorDraws draws = read_draws(draws_path);
  fs::create_directories(out_dir);
  fs::path dir(out_dir);

  if (request == "summaries") {
    std::vector<std::string> rows;
    for (const char* sel : {"x", "delta", "w", "sqrt_w", "sigma"}) {
      for (const TrajectorySummary& ts : summarize_trajectories(draws, sel, level)) {
        for (int t = 1; t <= draws.T; ++t) {
          rows.push_back(std::to_string(t) + "," + ts.series + ",mean," +
                         format_double(ts.stats(0, t - 1)));
          rows.push_back(std::to_string(t) + "," + ts.series + ",lower," +
                         format_double(ts.stats(1, t - 1)));
          rows.push_back(std::to_string(t) + "," + ts.series + ",upper," +
                         format_double(ts.stats(2, t - 1)));
        }
      }
    }
    write_long_csv(dir / "trajectories.csv", "t,series,statistic,value", rows);

    ShrinkageProbabilities pr = shrinkage_probabilities(draws);
    rows.clear();
    for (int i = 2; i <= draws.config.m; ++i)
      for (int k = 1; k <= draws.config.r; ++k)
        for (int t = 1; t <= draws.T; ++t)
          rows.push_back(std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(t) +
                         "," + format_double(pr.loadings((i - 2) * draws.config.r + k - 1, t - 1)));
    write_long_csv(dir / "shrinkage.csv", "i,k,t,prob", rows);

    Matrix bhat = estimated_loadings(draws);
    rows.clear();
    for (int i = 2; i <= draws.config.m; ++i)
      for (int k = 1; k <= draws.config.r; ++k)
        for (int t = 1; t <= draws.T; ++t)
          rows.push_back(std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(t) +
                         "," + format_double(bhat((i - 2) * draws.config.r + k - 1, t - 1)));
    write_long_csv(dir / "loadings.csv", "i,k,t,bhat", rows);

    if (draws.config.variant == ModelVariant::MPlus) {
      rows.clear();
      for (int i = 1; i <= draws.config.m; ++i)
        for (int j = 1; j <= draws.config.m; ++j)
          for (int t = 1; t <= draws.T; ++t)
            rows.push_back(std::to_string(i) + "," + std::to_string(j) + "," +
                           std::to_string(t) + "," +
                           format_double(pr.var_coeffs((i - 1) * draws.config.m + j - 1, t - 1)));
      write_long_csv(dir / "a_shrinkage.csv", "i,j,t,prob", rows);
    }
    std::cout << "wrote summaries to " << out_dir << "\n";
    return 0;
  }

  if (request == "components") {
    ComponentPosterior cp = component_posterior(draws, level);
    std::vector<std::string> rows;
    const char* stats[3] = {"mean", "lower", "upper"};
    for (int g = 0; g < cp.target_qp; ++g) {
      std::string base = "qp" + std::to_string(g + 1);
      for (int t = 1; t <= draws.T; ++t) {
        for (int s = 0; s < 3; ++s) {
          rows.push_back(std::to_string(t) + "," + base + "_frequency," + stats[s] + "," +
                         format_double(cp.qp[g].frequency(s, t - 1)));
          rows.push_back(std::to_string(t) + "," + base + "_modulus," + stats[s] + "," +
                         format_double(cp.qp[g].modulus(s, t - 1)));
          rows.push_back(std::to_string(t) + "," + base + "_value," + stats[s] + "," +
                         format_double(cp.qp[g].value(s, t - 1)));
        }
      }
    }
    for (int hh = 0; hh < cp.target_real; ++hh) {
      std::string base = "real" + std::to_string(hh + 1);
      for (int t = 1; t <= draws.T; ++t) {
        for (int s = 0; s < 3; ++s) {
          rows.push_back(std::to_string(t) + "," + base + "_modulus," + stats[s] + "," +
                         format_double(cp.real_roots[hh].modulus(s, t - 1)));
          rows.push_back(std::to_string(t) + "," + base + "_value," + stats[s] + "," +
                         format_double(cp.real_roots[hh].value(s, t - 1)));
        }
      }
    }
    write_long_csv(dir / "components.csv", "t,series,statistic,value", rows);

    ChannelComponentPosterior ch = channel_component_posterior(draws);
    rows.clear();
    for (int i = 1; i <= draws.config.m; ++i) {
      for (int g = 0; g < ch.target_qp; ++g)
        for (int t = 1; t <= draws.T; ++t) {
          double v = ch.qp_mean[i - 1](g, t - 1);
          if (std::isfinite(v))
            rows.push_back(std::to_string(i) + ",qp" + std::to_string(g + 1) + "," +
                           std::to_string(t) + "," + format_double(v));
        }
      for (int hh = 0; hh < ch.target_real; ++hh)
        for (int t = 1; t <= draws.T; ++t) {
          double v = ch.real_mean[i - 1](hh, t - 1);
          if (std::isfinite(v))
            rows.push_back(std::to_string(i) + ",real" + std::to_string(hh + 1) + "," +
                           std::to_string(t) + "," + format_double(v));
        }
    }
    write_long_csv(dir / "channel_components.csv", "channel,component,t,mean", rows);
    std::cout << "wrote components to " << out_dir << " (skipped draws: " << cp.skipped_draws
              << ")\n";
    return 0;
  }

  if (request == "impulse") {
    ImpulseRequest req;
    req.origins = origins.empty() ? std::vector<int>{std::max(1, draws.T / 2)} : origins;
    req.horizon = horizon;
    req.shock = shock;
    req.replicates = replicates;
    ImpulseSurface surf = impulse_response(draws, req);
    std::vector<std::string> rows;
    for (size_t oi = 0; oi < surf.origins.size(); ++oi)
      for (int i = 1; i <= draws.config.m; ++i)
        for (int hh = 1; hh <= surf.horizon; ++hh)
          rows.push_back(std::to_string(i) + "," + std::to_string(surf.origins[oi]) + "," +
                         std::to_string(hh) + "," +
                         format_double(surf.responses[oi](i - 1, hh - 1)));
    write_long_csv(dir / "impulse.csv", "channel,t0,horizon,response", rows);
    json meta;
    meta["shock"] = surf.shock;
    meta["horizon"] = surf.horizon;
    meta["origins"] = surf.origins;
    write_text(dir / "impulse_meta.json", meta.dump(2) + "\n");
    std::cout << "wrote impulse surface to " << out_dir << "\n";
    return 0;
  }

  if (request == "dic") {
    if (data_path.empty()) throw config_error("dic request needs --data");
    ObservationMatrix data = read_csv(data_path);
    DicResult dic = compute_dic(draws, data);
    json out;
    out["dic"] = dic.dic;
    out["mean_deviance"] = dic.mean_deviance;
    out["plugin_deviance"] = dic.plugin_deviance;
    out["effective_parameters"] = dic.effective_parameters;
    write_text(dir / "dic.json", out.dump(2) + "\n");
    std::cout << "DIC " << dic.dic << " (pD " << dic.effective_parameters << ")\n";
    return 0;
  }

  throw config_error("unknown postprocess request: " + request);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent-threshold dynamic factor models: simulate, fit, postprocess"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string data_path, draws_path, request, dic_data;
  int stride = 1, drop_leading = 0, max_sweeps = 0, horizon = 80, replicates = 1, threads = 0;
  bool resume = false;
  double level = 0.95, shock = std::nan("");
  std::vector<int> origins;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset with ground truth");
  sim->add_option("--config", common.config_path, "config file (JSON)")->required();
  sim->add_option("--out", common.out_dir, "output directory")->required();
  sim->add_option("--seed", common.seed, "rng seed override")
      ->each([&](const std::string&) { common.seed_set = true; });
  sim->add_option("--threads", common.threads, "worker threads (0 = auto)");
  sim->add_option("--variant", common.variant, "model variant override (M or M+)");

  auto* fit = app.add_subcommand("fit", "run the MCMC sampler on a CSV dataset");
  fit->add_option("--config", common.config_path, "config file (JSON)")->required();
  fit->add_option("--data", data_path, "input CSV")->required();
  fit->add_option("--out", common.out_dir, "output directory")->required();
  fit->add_option("--seed", common.seed, "rng seed override")
      ->each([&](const std::string&) { common.seed_set = true; });
  fit->add_option("--threads", common.threads, "worker threads (0 = auto)");
  fit->add_option("--variant", common.variant, "model variant override (M or M+)");
  fit->add_option("--stride", stride, "keep every stride-th row");
  fit->add_option("--drop-leading", drop_leading, "drop this many leading rows");
  fit->add_flag("--resume", resume, "resume from checkpoint.bin in the output directory");
  fit->add_option("--max-sweeps", max_sweeps,
                  "stop after this many sweeps (checkpoint testing; 0 = run to completion)");

  auto* post = app.add_subcommand("postprocess", "export plot-ready tables from a draw file");
  post->add_option("--draws", draws_path, "draw file from fit")->required();
  post->add_option("--request", request, "summaries | components | impulse | dic")->required();
  post->add_option("--out", common.out_dir, "output directory")->required();
  post->add_option("--data", dic_data, "data CSV (dic request)");
  post->add_option("--level", level, "credible level");
  post->add_option("--horizon", horizon, "impulse horizon");
  post->add_option("--origins", origins, "impulse origin times")->delimiter(',');
  post->add_option("--shock", shock, "impulse size (default: posterior innovation sd)");
  post->add_option("--replicates", replicates, "forward replicates per draw");
  post->add_option("--threads", threads, "worker threads (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(common);
    if (fit->parsed())
      return cmd_fit(common, data_path, stride, drop_leading, resume, max_sweeps);
    if (post->parsed())
      return cmd_postprocess(draws_path, request, common.out_dir, dic_data, level, horizon,
                             origins, shock, replicates, threads);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const format_error& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

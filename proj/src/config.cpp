#include "ltdfm/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace ltdfm {

using json = nlohmann::ordered_json;

PriorSpec default_priors(const ModelConfig& config) {
  PriorSpec p;
  p.sigma1_prec = {500.0, 1e4};
  p.v_prec = {50.0, 0.01};
  p.phi_beta = {20.0, 1.5};
  p.mu_normal = {0.0, 1.0};
  p.psi_prec.dof = 100.0;
  p.psi_prec.scale = 1e-3 * Matrix::Identity(config.p, config.p);
  p.x0_variance = std::nan("");
  p.delta0_mean = Vector::Zero(config.p);
  p.delta0_cov = Matrix::Identity(config.p, config.p);
  p.w_init = {1.0, std::nan("")};
  p.sigma_init = {1.0, std::nan("")};
  p.y0_variance = 1e6;
  return p;
}

void check_config(const ModelConfig& c) {
  if (c.m < 2) throw config_error("channel count m must be at least 2");
  if (c.p < 1) throw config_error("TVAR order p must be at least 1");
  if (c.r < 1) throw config_error("factor lag count r must be at least 1");
  if (c.s < 1 || c.s > c.r) throw config_error("anchor index out of range");
  if (c.r > c.p + 1) throw config_error("r exceeds p+1");
  if (!(c.lambda_w > 0.8 && c.lambda_w <= 1.0))
    throw config_error("lambda_w outside (0.8, 1]");
  if (!(c.lambda_sigma > 0.8 && c.lambda_sigma <= 1.0))
    throw config_error("lambda_sigma outside (0.8, 1]");
  if (!(c.K > 0.0)) throw config_error("threshold range multiplier K must be positive");
  if (c.mcmc.burn_in < 0) throw config_error("burn_in must be nonnegative");
  if (c.mcmc.draws < 1) throw config_error("draws must be at least 1");
  if (c.mcmc.thin < 1) throw config_error("thin must be at least 1");
}

static void check_gamma(const GammaPrior& g, const char* name) {
  if (!(g.shape > 0.0) || !(g.rate > 0.0))
    throw config_error(std::string("nonpositive prior parameter in ") + name);
}

void check_prior(const ModelConfig& c, const PriorSpec& p) {
  check_gamma(p.sigma1_prec, "sigma1_prec");
  check_gamma(p.v_prec, "v_prec");
  if (!(p.phi_beta.a > 0.0) || !(p.phi_beta.b > 0.0))
    throw config_error("nonpositive prior parameter in phi_beta");
  if (!(p.mu_normal.variance > 0.0))
    throw config_error("nonpositive prior parameter in mu_normal");
  if (!(p.psi_prec.dof > c.p - 1))
    throw config_error("wishart dof must exceed p-1");
  if (p.psi_prec.scale.rows() != c.p || p.psi_prec.scale.cols() != c.p)
    throw config_error("wishart scale dimension mismatch");
  if (p.delta0_mean.size() != c.p) throw config_error("delta0 mean dimension mismatch");
  if (p.delta0_cov.rows() != c.p || p.delta0_cov.cols() != c.p)
    throw config_error("delta0 covariance dimension mismatch");
  if (!(p.w_init.n0 > 0.0) || !(p.sigma_init.n0 > 0.0))
    throw config_error("nonpositive prior parameter in volatility_init n0");
  if (!std::isnan(p.w_init.s0) && !(p.w_init.s0 > 0.0))
    throw config_error("nonpositive prior parameter in w_init s0");
  if (!std::isnan(p.sigma_init.s0) && !(p.sigma_init.s0 > 0.0))
    throw config_error("nonpositive prior parameter in sigma_init s0");
  if (!std::isnan(p.x0_variance) && !(p.x0_variance > 0.0))
    throw config_error("nonpositive prior parameter in x0_variance");
  if (!(p.y0_variance > 0.0)) throw config_error("nonpositive prior parameter in y0_variance");
  if (p.K_matrix.size() != 0) {
    if (p.K_matrix.rows() != c.m - 1 || p.K_matrix.cols() != c.r)
      throw config_error("K_matrix dimension mismatch");
    if ((p.K_matrix.array() <= 0.0).any())
      throw config_error("nonpositive prior parameter in K_matrix");
  }
}

static double sample_variance(const Vector& v) {
  double mean = v.mean();
  return (v.array() - mean).square().sum() / std::max<int>(1, static_cast<int>(v.size()) - 1);
}

// residual-scale proxy: half the variance of first differences over the
// leading segment of a channel
static double diff_variance_proxy(const Vector& channel) {
  int n = std::min<int>(21, static_cast<int>(channel.size()));
  Vector d = channel.segment(1, n - 1) - channel.segment(0, n - 1);
  double v = 0.5 * sample_variance(d);
  return v > 0.0 ? v : 1.0;
}

static ResolvedPriors resolve(const ModelConfig& c, const PriorSpec& p,
                              const ObservationMatrix* data) {
  ResolvedPriors r;
  static_cast<PriorSpec&>(r) = p;
  if (std::isnan(p.x0_variance)) {
    if (!data)
      throw config_error("x0_variance must be explicit when no data is available");
    r.x0_var = 1e6 * std::max(sample_variance(data->values.col(0)), 1e-12);
  } else {
    r.x0_var = p.x0_variance;
  }
  if (std::isnan(p.w_init.s0)) {
    if (!data) throw config_error("w_init s0 must be explicit when no data is available");
    r.w_s0 = diff_variance_proxy(data->values.col(0));
  } else {
    r.w_s0 = p.w_init.s0;
  }
  r.sigma_s0 = Vector::Constant(c.m - 1, std::isnan(p.sigma_init.s0) ? 0.0 : p.sigma_init.s0);
  if (std::isnan(p.sigma_init.s0)) {
    if (!data) throw config_error("sigma_init s0 must be explicit when no data is available");
    for (int i = 2; i <= c.m; ++i) r.sigma_s0(i - 2) = diff_variance_proxy(data->values.col(i - 1));
  }
  return r;
}

ModelInputs validate_config(const ModelConfig& config, const PriorSpec& prior,
                            const ObservationMatrix& data) {
  check_config(config);
  check_prior(config, prior);
  if (data.T() < 2) throw config_error("data must have at least 2 rows");
  if (data.m() != config.m)
    throw config_error("dimension mismatch: data has " + std::to_string(data.m()) +
                       " channels, config expects " + std::to_string(config.m));
  if (!data.values.allFinite()) throw data_error("non-finite data entry");
  if (!data.channel_names.empty() &&
      static_cast<int>(data.channel_names.size()) != config.m)
    throw config_error("dimension mismatch: channel name count");
  return ModelInputs{config, resolve(config, prior, &data)};
}

ModelInputs validate_config_for_simulation(const ModelConfig& config, const PriorSpec& prior,
                                           int T) {
  check_config(config);
  check_prior(config, prior);
  if (T < 2) throw config_error("simulation length T must be at least 2");
  return ModelInputs{config, resolve(config, prior, nullptr)};
}

// ---------------------------------------------------------------------------
// JSON serialization

static json vector_to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

static json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

static Vector vector_from_json(const json& a) {
  Vector v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
  return v;
}

static Matrix matrix_from_json(const json& a) {
  if (a.empty()) return Matrix();
  Matrix m(a.size(), a[0].size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = a[i][j].get<double>();
  return m;
}

static json config_to_json(const ModelConfig& c) {
  json j;
  j["m"] = c.m;
  j["p"] = c.p;
  j["r"] = c.r;
  j["s"] = c.s;
  j["variant"] = variant_name(c.variant);
  j["lambda_w"] = c.lambda_w;
  j["lambda_sigma"] = c.lambda_sigma;
  j["K"] = c.K;
  j["mcmc"] = {{"burn_in", c.mcmc.burn_in},
               {"draws", c.mcmc.draws},
               {"thin", c.mcmc.thin},
               {"rng_seed", c.mcmc.rng_seed},
               {"checkpoint_every", c.mcmc.checkpoint_every},
               {"adapt_window", c.mcmc.adapt_window}};
  return j;
}

static ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.m = j.at("m").get<int>();
  c.p = j.at("p").get<int>();
  c.r = j.at("r").get<int>();
  c.s = j.at("s").get<int>();
  std::string v = j.value("variant", "M");
  if (v == "M")
    c.variant = ModelVariant::M;
  else if (v == "M+")
    c.variant = ModelVariant::MPlus;
  else
    throw config_error("unknown model variant: " + v);
  c.lambda_w = j.value("lambda_w", 0.99);
  c.lambda_sigma = j.value("lambda_sigma", 0.99);
  c.K = j.value("K", 3.0);
  if (j.contains("mcmc")) {
    const json& m = j.at("mcmc");
    c.mcmc.burn_in = m.value("burn_in", 5000);
    c.mcmc.draws = m.value("draws", 20000);
    c.mcmc.thin = m.value("thin", 1);
    c.mcmc.rng_seed = m.value("rng_seed", std::uint64_t{1});
    c.mcmc.checkpoint_every = m.value("checkpoint_every", 0);
    c.mcmc.adapt_window = m.value("adapt_window", 100);
  }
  return c;
}

static json prior_to_json(const PriorSpec& p) {
  json j;
  j["sigma1_prec"] = {{"shape", p.sigma1_prec.shape}, {"rate", p.sigma1_prec.rate}};
  j["v_prec"] = {{"shape", p.v_prec.shape}, {"rate", p.v_prec.rate}};
  j["phi_beta"] = {{"a", p.phi_beta.a}, {"b", p.phi_beta.b}};
  j["mu_normal"] = {{"mean", p.mu_normal.mean}, {"variance", p.mu_normal.variance}};
  j["psi_prec"] = {{"dof", p.psi_prec.dof}, {"scale", matrix_to_json(p.psi_prec.scale)}};
  if (std::isnan(p.x0_variance))
    j["x0_variance"] = "auto";
  else
    j["x0_variance"] = p.x0_variance;
  j["delta0"] = {{"mean", vector_to_json(p.delta0_mean)}, {"cov", matrix_to_json(p.delta0_cov)}};
  j["w_init"] = {{"n0", p.w_init.n0}};
  if (std::isnan(p.w_init.s0))
    j["w_init"]["s0"] = "auto";
  else
    j["w_init"]["s0"] = p.w_init.s0;
  j["sigma_init"] = {{"n0", p.sigma_init.n0}};
  if (std::isnan(p.sigma_init.s0))
    j["sigma_init"]["s0"] = "auto";
  else
    j["sigma_init"]["s0"] = p.sigma_init.s0;
  j["y0_variance"] = p.y0_variance;
  if (p.K_matrix.size() != 0) j["K_matrix"] = matrix_to_json(p.K_matrix);
  return j;
}

static double number_or_auto(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "auto") return std::nan("");
    throw config_error("expected number or \"auto\" in prior field");
  }
  return j.get<double>();
}

static PriorSpec prior_from_json(const json& j, const ModelConfig& c) {
  PriorSpec p = default_priors(c);
  if (j.contains("sigma1_prec"))
    p.sigma1_prec = {j["sigma1_prec"].at("shape").get<double>(),
                     j["sigma1_prec"].at("rate").get<double>()};
  if (j.contains("v_prec"))
    p.v_prec = {j["v_prec"].at("shape").get<double>(), j["v_prec"].at("rate").get<double>()};
  if (j.contains("phi_beta"))
    p.phi_beta = {j["phi_beta"].at("a").get<double>(), j["phi_beta"].at("b").get<double>()};
  if (j.contains("mu_normal"))
    p.mu_normal = {j["mu_normal"].at("mean").get<double>(),
                   j["mu_normal"].at("variance").get<double>()};
  if (j.contains("psi_prec")) {
    p.psi_prec.dof = j["psi_prec"].at("dof").get<double>();
    if (j["psi_prec"].contains("scale")) {
      if (j["psi_prec"]["scale"].is_number()) {
        p.psi_prec.scale =
            j["psi_prec"]["scale"].get<double>() * Matrix::Identity(c.p, c.p);
      } else {
        p.psi_prec.scale = matrix_from_json(j["psi_prec"]["scale"]);
      }
    }
  }
  if (j.contains("x0_variance")) p.x0_variance = number_or_auto(j["x0_variance"]);
  if (j.contains("delta0")) {
    if (j["delta0"].contains("mean")) p.delta0_mean = vector_from_json(j["delta0"]["mean"]);
    if (j["delta0"].contains("cov")) {
      if (j["delta0"]["cov"].is_number())
        p.delta0_cov = j["delta0"]["cov"].get<double>() * Matrix::Identity(c.p, c.p);
      else
        p.delta0_cov = matrix_from_json(j["delta0"]["cov"]);
    }
  }
  if (j.contains("w_init")) {
    p.w_init.n0 = j["w_init"].value("n0", 1.0);
    if (j["w_init"].contains("s0")) p.w_init.s0 = number_or_auto(j["w_init"]["s0"]);
  }
  if (j.contains("sigma_init")) {
    p.sigma_init.n0 = j["sigma_init"].value("n0", 1.0);
    if (j["sigma_init"].contains("s0")) p.sigma_init.s0 = number_or_auto(j["sigma_init"]["s0"]);
  }
  if (j.contains("y0_variance")) p.y0_variance = j["y0_variance"].get<double>();
  if (j.contains("K_matrix")) p.K_matrix = matrix_from_json(j["K_matrix"]);
  return p;
}

std::string serialize_config(const ModelConfig& config) { return config_to_json(config).dump(2); }

ModelConfig deserialize_config(const std::string& text) {
  return config_from_json(json::parse(text));
}

std::string serialize_prior(const PriorSpec& prior) { return prior_to_json(prior).dump(2); }

PriorSpec deserialize_prior(const std::string& text, const ModelConfig& config) {
  return prior_from_json(json::parse(text), config);
}

ModelConfig config_from_bundle_json(const std::string& text) {
  json j = json::parse(text);
  return config_from_json(j.at("model"));
}

PriorSpec prior_from_bundle_json(const std::string& text, const ModelConfig& config) {
  json j = json::parse(text);
  return prior_from_json(j.at("priors"), config);
}

std::string config_json(const ModelConfig& config, const PriorSpec& prior) {
  json j;
  j["model"] = config_to_json(config);
  j["priors"] = prior_to_json(prior);
  return j.dump(2);
}

std::uint64_t config_hash(const ModelConfig& config, const PriorSpec& prior) {
  std::string s = config_json(config, prior);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  ConfigFile f;
  if (!j.contains("model")) throw config_error("config file missing \"model\" section");
  f.config = config_from_json(j["model"]);
  f.prior = j.contains("priors") ? prior_from_json(j["priors"], f.config)
                                 : default_priors(f.config);
  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    f.simulate_T = s.value("T", 0);
    f.simulate_mode = s.value("mode", "prior");
    if (s.contains("truth")) f.simulate_truth = s["truth"].dump();
  }
  return f;
}

}  // namespace ltdfm

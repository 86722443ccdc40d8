#include "ltdfm/draws_io.hpp"

#include <unistd.h>

#include <cstring>

namespace ltdfm {

namespace {

constexpr char kDrawMagic[4] = {'L', 'T', 'D', 'F'};
constexpr char kCkptMagic[4] = {'L', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::FILE* f, const T& v) {
  if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw io_error("draw file: write failed");
}

template <class T>
void put_vec(std::FILE* f, const std::vector<T>& v) {
  if (!v.empty() && std::fwrite(v.data(), sizeof(T), v.size(), f) != v.size())
    throw io_error("draw file: write failed");
}

template <class T>
T get(std::FILE* f) {
  T v;
  if (std::fread(&v, sizeof(T), 1, f) != 1) throw format_error("draw file: truncated");
  return v;
}

template <class T>
void get_vec(std::FILE* f, std::vector<T>& v, size_t n) {
  v.resize(n);
  if (n > 0 && std::fread(v.data(), sizeof(T), n, f) != n)
    throw format_error("draw file: truncated record");
}

void put_matrix(std::FILE* f, const Matrix& m) {
  put<std::int64_t>(f, m.rows());
  put<std::int64_t>(f, m.cols());
  if (m.size() > 0 &&
      std::fwrite(m.data(), sizeof(double), static_cast<size_t>(m.size()), f) !=
          static_cast<size_t>(m.size()))
    throw io_error("checkpoint: write failed");
}

Matrix get_matrix(std::FILE* f) {
  auto rows = get<std::int64_t>(f);
  auto cols = get<std::int64_t>(f);
  Matrix m(rows, cols);
  if (m.size() > 0 &&
      std::fread(m.data(), sizeof(double), static_cast<size_t>(m.size()), f) !=
          static_cast<size_t>(m.size()))
    throw format_error("checkpoint: truncated");
  return m;
}

void put_vector(std::FILE* f, const Vector& v) {
  put<std::int64_t>(f, v.size());
  if (v.size() > 0 &&
      std::fwrite(v.data(), sizeof(double), static_cast<size_t>(v.size()), f) !=
          static_cast<size_t>(v.size()))
    throw io_error("checkpoint: write failed");
}

Vector get_vector(std::FILE* f) {
  auto n = get<std::int64_t>(f);
  Vector v(n);
  if (n > 0 && std::fread(v.data(), sizeof(double), static_cast<size_t>(n), f) !=
                   static_cast<size_t>(n))
    throw format_error("checkpoint: truncated");
  return v;
}

struct RecordSizes {
  size_t doubles = 0;
  size_t floats = 0;
  size_t bytes = 0;
};

RecordSizes record_sizes(const ModelConfig& c, int T) {
  const int m = c.m, p = c.p, r = c.r, n = c.state_dim();
  RecordSizes s;
  s.doubles = 2 + static_cast<size_t>(p) * p + static_cast<size_t>(m - 1) * r * 4;
  s.floats = static_cast<size_t>(T + n) + static_cast<size_t>(p) * (T + 1) + T +
             static_cast<size_t>(m - 1) * T + static_cast<size_t>(m - 1) * r * (T + 1);
  if (c.variant == ModelVariant::MPlus) {
    s.doubles += static_cast<size_t>(m) * m * 4 + m;
    s.floats += static_cast<size_t>(m) * m * (T + 1);
  }
  s.bytes = s.doubles * sizeof(double) + s.floats * sizeof(float);
  return s;
}

void write_header(std::FILE* f, const ModelConfig& c, const ResolvedPriors& prior, int T,
                  std::uint64_t seed, long& count_pos) {
  std::fwrite(kDrawMagic, 1, 4, f);
  put<std::uint32_t>(f, kVersion);
  put<std::int32_t>(f, c.m);
  put<std::int32_t>(f, c.p);
  put<std::int32_t>(f, c.r);
  put<std::int32_t>(f, c.s);
  put<std::int32_t>(f, c.variant == ModelVariant::MPlus ? 1 : 0);
  put<std::int32_t>(f, T);
  put<std::uint64_t>(f, seed);
  put<double>(f, c.lambda_w);
  put<double>(f, c.lambda_sigma);
  put<double>(f, c.K);
  std::string cfg = config_json(c, prior);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(cfg.size()));
  if (std::fwrite(cfg.data(), 1, cfg.size(), f) != cfg.size())
    throw io_error("draw file: write failed");
  put<double>(f, prior.x0_var);
  put<double>(f, prior.w_s0);
  put_vector(f, prior.sigma_s0);
  count_pos = std::ftell(f);
  put<std::uint64_t>(f, 0);            // record count, patched on finalize
  for (int i = 0; i < 10; ++i) put<double>(f, 0.0);  // acceptance rates
}

struct Header {
  ModelConfig config;
  ResolvedPriors prior;
  int T = 0;
  std::uint64_t seed = 0;
  std::uint64_t records = 0;
  double rates[10] = {0};
  long payload_start = 0;
};

Header read_header(std::FILE* f) {
  char magic[4];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kDrawMagic, 4) != 0)
    throw format_error("draw file: bad magic");
  auto version = get<std::uint32_t>(f);
  if (version != kVersion)
    throw format_error("draw file: version mismatch (got " + std::to_string(version) + ")");
  Header h;
  h.config.m = get<std::int32_t>(f);
  h.config.p = get<std::int32_t>(f);
  h.config.r = get<std::int32_t>(f);
  h.config.s = get<std::int32_t>(f);
  h.config.variant = get<std::int32_t>(f) == 1 ? ModelVariant::MPlus : ModelVariant::M;
  h.T = get<std::int32_t>(f);
  h.seed = get<std::uint64_t>(f);
  h.config.lambda_w = get<double>(f);
  h.config.lambda_sigma = get<double>(f);
  h.config.K = get<double>(f);
  auto len = get<std::uint32_t>(f);
  std::string cfg(len, '\0');
  if (len > 0 && std::fread(cfg.data(), 1, len, f) != len)
    throw format_error("draw file: truncated header");
  // config echo carries the full config and priors
  h.config = config_from_bundle_json(cfg);
  static_cast<PriorSpec&>(h.prior) = prior_from_bundle_json(cfg, h.config);
  h.prior.x0_var = get<double>(f);
  h.prior.w_s0 = get<double>(f);
  h.prior.sigma_s0 = get_vector(f);
  h.records = get<std::uint64_t>(f);
  for (double& rate : h.rates) rate = get<double>(f);
  h.payload_start = std::ftell(f);
  return h;
}

void write_record(std::FILE* f, const DrawRecord& rec) {
  put<double>(f, rec.loglik);
  put<double>(f, rec.sigma1_sq);
  put_vec(f, rec.psi);
  put_vec(f, rec.thresholds);
  put_vec(f, rec.hyper);
  put_vec(f, rec.a_thresholds);
  put_vec(f, rec.a_hyper);
  put_vec(f, rec.y0);
  put_vec(f, rec.x);
  put_vec(f, rec.delta);
  put_vec(f, rec.w);
  put_vec(f, rec.sigma);
  put_vec(f, rec.beta);
  put_vec(f, rec.alpha);
}

DrawRecord read_record(std::FILE* f, const ModelConfig& c, int T) {
  const int m = c.m, p = c.p, r = c.r, n = c.state_dim();
  const bool mplus = c.variant == ModelVariant::MPlus;
  DrawRecord rec;
  rec.loglik = get<double>(f);
  rec.sigma1_sq = get<double>(f);
  get_vec(f, rec.psi, static_cast<size_t>(p) * p);
  get_vec(f, rec.thresholds, static_cast<size_t>(m - 1) * r);
  get_vec(f, rec.hyper, static_cast<size_t>(m - 1) * r * 3);
  get_vec(f, rec.a_thresholds, mplus ? static_cast<size_t>(m) * m : 0);
  get_vec(f, rec.a_hyper, mplus ? static_cast<size_t>(m) * m * 3 : 0);
  get_vec(f, rec.y0, mplus ? static_cast<size_t>(m) : 0);
  get_vec(f, rec.x, static_cast<size_t>(T + n));
  get_vec(f, rec.delta, static_cast<size_t>(p) * (T + 1));
  get_vec(f, rec.w, static_cast<size_t>(T));
  get_vec(f, rec.sigma, static_cast<size_t>(m - 1) * T);
  get_vec(f, rec.beta, static_cast<size_t>(m - 1) * r * (T + 1));
  get_vec(f, rec.alpha, mplus ? static_cast<size_t>(m) * m * (T + 1) : 0);
  return rec;
}

}  // namespace

DrawWriter::DrawWriter(const std::string& path, const ModelConfig& config,
                       const ResolvedPriors& prior, int T, std::uint64_t seed)
    : path_(path), T_(T), config_(config) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw io_error("cannot open draw file for writing: " + path);
  write_header(f_, config, prior, T, seed, count_pos_);
}

DrawWriter DrawWriter::resume(const std::string& path, const ModelConfig& config,
                              const ResolvedPriors& prior, int T, std::uint64_t seed,
                              int records) {
  (void)prior;
  (void)seed;
  DrawWriter w;
  w.path_ = path;
  w.T_ = T;
  w.config_ = config;
  w.f_ = std::fopen(path.c_str(), "rb+");
  if (!w.f_) throw io_error("cannot reopen draw file: " + path);
  Header h = read_header(w.f_);
  if (h.config.m != config.m || h.config.p != config.p || h.config.r != config.r ||
      h.T != T || (h.config.variant != config.variant))
    throw format_error("draw file: header does not match current run");
  w.count_pos_ = h.payload_start - static_cast<long>(sizeof(std::uint64_t) + 10 * sizeof(double));
  RecordSizes sz = record_sizes(config, T);
  long end = h.payload_start + static_cast<long>(sz.bytes) * records;
  std::fflush(w.f_);
  if (std::fseek(w.f_, end, SEEK_SET) != 0) throw io_error("draw file: seek failed");
  w.records_ = records;
  return w;
}

DrawWriter::DrawWriter(DrawWriter&& o) noexcept
    : f_(o.f_), path_(std::move(o.path_)), count_pos_(o.count_pos_), records_(o.records_),
      T_(o.T_), config_(o.config_) {
  o.f_ = nullptr;
}

DrawWriter::~DrawWriter() {
  if (f_) std::fclose(f_);
}

void DrawWriter::append(const DrawRecord& rec) {
  write_record(f_, rec);
  ++records_;
}

void DrawWriter::finalize(const AcceptanceRates& r) {
  long end = std::ftell(f_);
  if (std::fseek(f_, count_pos_, SEEK_SET) != 0) throw io_error("draw file: seek failed");
  put<std::uint64_t>(f_, static_cast<std::uint64_t>(records_));
  const double rates[10] = {r.beta_points, r.thresholds, r.mu, r.v, r.phi,
                            r.a_points,    r.a_thresholds, r.a_mu, r.a_v, r.a_phi};
  for (double rate : rates) put<double>(f_, rate);
  std::fflush(f_);
  // drop anything past the last complete record (resumed runs)
  if (std::fseek(f_, 0, SEEK_END) != 0) throw io_error("draw file: seek failed");
  long file_end = std::ftell(f_);
  if (file_end > end) {
    std::fclose(f_);
    f_ = nullptr;
    if (truncate(path_.c_str(), end) != 0) throw io_error("draw file: truncate failed");
  } else {
    std::fclose(f_);
    f_ = nullptr;
  }
}

PosteriorDraws read_draws(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw io_error("cannot open draw file: " + path);
  PosteriorDraws out;
  try {
    Header h = read_header(f);
    out.config = h.config;
    out.prior = h.prior;
    out.T = h.T;
    out.seed = h.seed;
    out.acceptance.beta_points = h.rates[0];
    out.acceptance.thresholds = h.rates[1];
    out.acceptance.mu = h.rates[2];
    out.acceptance.v = h.rates[3];
    out.acceptance.phi = h.rates[4];
    out.acceptance.a_points = h.rates[5];
    out.acceptance.a_thresholds = h.rates[6];
    out.acceptance.a_mu = h.rates[7];
    out.acceptance.a_v = h.rates[8];
    out.acceptance.a_phi = h.rates[9];
    out.records.reserve(h.records);
    for (std::uint64_t i = 0; i < h.records; ++i)
      out.records.push_back(read_record(f, h.config, h.T));
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
  return out;
}

void write_checkpoint(const std::string& path, const Sampler& sampler, int sweep,
                      int records_written) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw io_error("cannot open checkpoint for writing: " + path);
  Sampler& smp = const_cast<Sampler&>(sampler);
  const LatentStateSet& st = sampler.state();
  std::fwrite(kCkptMagic, 1, 4, f);
  put<std::uint32_t>(f, kVersion);
  put<std::int32_t>(f, sweep);
  put<std::int32_t>(f, records_written);
  put_vector(f, st.x);
  put_matrix(f, st.delta);
  put<std::int32_t>(f, static_cast<std::int32_t>(st.beta.size()));
  for (const Matrix& b : st.beta) put_matrix(f, b);
  put_matrix(f, st.thresholds);
  put_matrix(f, st.hyper.mu);
  put_matrix(f, st.hyper.phi);
  put_matrix(f, st.hyper.v_sq);
  put_matrix(f, st.psi);
  put_vector(f, st.w);
  put<double>(f, st.sigma1_sq);
  put_matrix(f, st.sigma_sq);
  put<std::int32_t>(f, static_cast<std::int32_t>(st.alpha.size()));
  for (const Matrix& a : st.alpha) put_matrix(f, a);
  if (!st.alpha.empty()) {
    put_matrix(f, st.a_thresholds);
    put_matrix(f, st.a_hyper.mu);
    put_matrix(f, st.a_hyper.phi);
    put_matrix(f, st.a_hyper.v_sq);
    put_vector(f, st.y0);
  }
  auto put_counts = [&](const std::vector<AcceptCounts>& cs) {
    put<std::int32_t>(f, static_cast<std::int32_t>(cs.size()));
    for (const AcceptCounts& c : cs) {
      const long long vals[10] = {c.beta_acc, c.beta_tot, c.thr_acc, c.thr_tot, c.mu_acc,
                                  c.mu_tot,   c.v_acc,    c.v_tot,   c.phi_acc, c.phi_tot};
      for (long long v : vals) put<long long>(f, v);
    }
  };
  put_counts(smp.channel_counts());
  put_counts(smp.mutable_a_counts());
  put_matrix(f, smp.phi_scales());
  put_matrix(f, smp.a_phi_scales());
  put_matrix(f, smp.phi_window_acc());
  put_matrix(f, smp.phi_window_tot());
  put_matrix(f, smp.a_phi_window_acc());
  put_matrix(f, smp.a_phi_window_tot());
  if (std::fclose(f) != 0) throw io_error("checkpoint: close failed");
}

ResumeInfo read_checkpoint(const std::string& path, Sampler& sampler) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw io_error("cannot open checkpoint: " + path);
  ResumeInfo info;
  try {
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kCkptMagic, 4) != 0)
      throw format_error("checkpoint: bad magic");
    if (get<std::uint32_t>(f) != kVersion) throw format_error("checkpoint: version mismatch");
    info.sweep = get<std::int32_t>(f);
    info.records_written = get<std::int32_t>(f);
    LatentStateSet st;
    st.n_state = sampler.config().state_dim();
    st.x = get_vector(f);
    st.delta = get_matrix(f);
    int nb = get<std::int32_t>(f);
    st.beta.resize(nb);
    for (Matrix& b : st.beta) b = get_matrix(f);
    st.thresholds = get_matrix(f);
    st.hyper.mu = get_matrix(f);
    st.hyper.phi = get_matrix(f);
    st.hyper.v_sq = get_matrix(f);
    st.psi = get_matrix(f);
    st.w = get_vector(f);
    st.sigma1_sq = get<double>(f);
    st.sigma_sq = get_matrix(f);
    int na = get<std::int32_t>(f);
    st.alpha.resize(na);
    for (Matrix& a : st.alpha) a = get_matrix(f);
    if (na > 0) {
      st.a_thresholds = get_matrix(f);
      st.a_hyper.mu = get_matrix(f);
      st.a_hyper.phi = get_matrix(f);
      st.a_hyper.v_sq = get_matrix(f);
      st.y0 = get_vector(f);
    }
    sampler.set_state(st);
    auto get_counts = [&](std::vector<AcceptCounts>& cs) {
      int n = get<std::int32_t>(f);
      cs.resize(n);
      for (AcceptCounts& c : cs) {
        c.beta_acc = get<long long>(f);
        c.beta_tot = get<long long>(f);
        c.thr_acc = get<long long>(f);
        c.thr_tot = get<long long>(f);
        c.mu_acc = get<long long>(f);
        c.mu_tot = get<long long>(f);
        c.v_acc = get<long long>(f);
        c.v_tot = get<long long>(f);
        c.phi_acc = get<long long>(f);
        c.phi_tot = get<long long>(f);
      }
    };
    get_counts(sampler.mutable_channel_counts());
    get_counts(sampler.mutable_a_counts());
    sampler.phi_scales() = get_matrix(f);
    sampler.a_phi_scales() = get_matrix(f);
    sampler.phi_window_acc() = get_matrix(f);
    sampler.phi_window_tot() = get_matrix(f);
    sampler.a_phi_window_acc() = get_matrix(f);
    sampler.a_phi_window_tot() = get_matrix(f);
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
  return info;
}

}  // namespace ltdfm

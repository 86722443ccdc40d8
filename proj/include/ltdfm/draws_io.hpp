#pragma once

#include <cstdio>
#include <string>

#include "ltdfm/sampler.hpp"

namespace ltdfm {

// Versioned binary record stream, one record per thinned draw; field order
// documented in the README. The header carries the config echo and a record
// count patched on finalize, so files are byte-identical across reruns with
// the same seed.
class DrawWriter {
 public:
  DrawWriter(const std::string& path, const ModelConfig& config, const ResolvedPriors& prior,
             int T, std::uint64_t seed);
  // reopen an existing file, verify the header, drop any records beyond
  // `records` and position for appending
  static DrawWriter resume(const std::string& path, const ModelConfig& config,
                           const ResolvedPriors& prior, int T, std::uint64_t seed, int records);
  ~DrawWriter();
  DrawWriter(DrawWriter&&) noexcept;
  DrawWriter& operator=(DrawWriter&&) = delete;

  void append(const DrawRecord& rec);
  void finalize(const AcceptanceRates& rates);
  int records_written() const { return records_; }

 private:
  DrawWriter() = default;
  std::FILE* f_ = nullptr;
  std::string path_;
  long count_pos_ = 0;
  int records_ = 0;
  int T_ = 0;
  ModelConfig config_;
};

PosteriorDraws read_draws(const std::string& path);

// Sampler checkpoint: full latent state, counters and adaptation scales.
void write_checkpoint(const std::string& path, const Sampler& sampler, int sweep,
                      int records_written);

struct ResumeInfo {
  int sweep = 0;
  int records_written = 0;
};

ResumeInfo read_checkpoint(const std::string& path, Sampler& sampler);

}  // namespace ltdfm

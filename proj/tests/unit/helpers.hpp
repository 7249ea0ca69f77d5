#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>

#include "pipeline/run_config.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() / ("wsground_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small enough that a few epochs take well under a second.
inline wsground::RunConfig small_run_config(std::uint64_t seed = 11) {
  wsground::RunConfig c;
  c.seed = seed;
  auto& e = c.model.encoder;
  e.d = 16;
  e.point_sample_count = 32;
  e.transformer_layers = 1;
  e.transformer_heads = 2;
  e.transformer_ffn = 32;
  e.backbone = wsground::BackboneKind::shared_mlp;
  e.shared_mlp = {16, 32};
  e.seed = seed;
  c.model.adapter_hidden = 16;
  c.train.batch_size_scenes = 2;
  c.train.max_epochs = 2;
  c.train.seed = seed;
  c.synth.count = 3;
  c.synth.categories = 6;
  c.synth.scene.min_points_per_proposal = 60;
  c.synth.scene.max_points_per_proposal = 120;
  return c;
}

}  // namespace testing

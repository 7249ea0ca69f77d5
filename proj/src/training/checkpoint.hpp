#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "training/model.hpp"

namespace wsground {

struct CheckpointMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  int epoch = -1;  // -1 for the final snapshot
  std::string extension_mode = "boundary_extended";  // projection used while training
};

// Named-tensor archive: "WSGC", uint32 version, uint64 header length, a JSON
// header (model config, labels, alpha, d, K, config hash, seed, code version
// and the tensor table), then every tensor as row-major float64.
void write_checkpoint(const std::filesystem::path& path, const GroundingModel& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  GroundingModel model;
  CheckpointMeta meta;
};

LoadedCheckpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace wsground

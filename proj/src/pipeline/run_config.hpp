#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "evaluation/evaluation.hpp"
#include "projection/projection.hpp"
#include "training/config.hpp"

namespace wsground {

struct SynthConfig {
  int count = 8;
  int proposals_min = 4;
  int proposals_max = 6;
  int categories = 8;
  int frames = 3;
  SyntheticSceneOptions scene;
};

struct RunConfig {
  /// Run seed; copied into the encoder and training seeds.
  std::uint64_t seed = 0;
  ModelConfig model;
  TrainConfig train;
  ExtensionMode extension_mode = ExtensionMode::boundary_extended;
  bool use_depth_visibility = false;
  bool cache_embeddings = true;
  int topk = 3;
  MetricOptions metrics;
  SynthConfig synth;
  /// Where preprocess caches live; empty means inside each bundle. Not part of the hash.
  std::filesystem::path cache_dir;
};

// Layout:
// { "seed", "model": {...}, "train": {...},
//   "projection": {"extension_mode", "use_depth_visibility"},
//   "preprocess": {"cache_embeddings"}, "inference": {"topk"},
//   "eval": {"metrics": [...], "iou_thresholds", "recall_n", "easy_max_distractors"},
//   "synth": {"count", "proposals_min", "proposals_max", "categories", "frames",
//             "image_width", "image_height", "points_min", "points_max"} }
// Unknown fields and bad values raise ConfigError naming the dotted path.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

/// Reads a JSON config file; an unparseable file is a ConfigError.
nlohmann::json read_config_json(const std::filesystem::path& path);

/// Sets a dotted key ("train.max_epochs") to a value given as text: JSON if
/// it parses, a plain string otherwise. Intermediate objects are created.
void apply_override(nlohmann::json& j, const std::string& dotted_key, const std::string& value);

/// 16 hex digits identifying the resolved configuration.
std::string config_hash(const RunConfig& c);

/// {config_hash, seed, version} stamped into every artifact.
nlohmann::json artifact_stamp(const RunConfig& c);

}  // namespace wsground

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "evaluation/evaluation.hpp"
#include "inference/inference.hpp"
#include "pipeline/run_config.hpp"
#include "training/train.hpp"

namespace wsground {

/// Scene i of a synthetic dataset: id "scene_<i>", proposal count drawn from the synth range.
Scene synthetic_dataset_scene(const RunConfig& config, int index);

// Per-scene region cache written by preprocess: regions.json plus, when
// embeddings are cached, region_embeddings.bin (rows follow the encoded
// entries of regions.json) and category_embeddings.bin.
struct RegionCacheFiles {
  static constexpr const char* kRegions = "regions.json";
  static constexpr const char* kRegionEmbeddings = "region_embeddings.bin";
  static constexpr const char* kCategoryEmbeddings = "category_embeddings.bin";
};

/// Reuses a matching cache in the bundle directory, otherwise computes from frames.
PreparedScene prepare_from_bundle(std::shared_ptr<const Scene> scene, const std::filesystem::path& dir,
                                  const RunConfig& config, const FrozenProviders& providers);

struct BatchOutcome {
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

BatchOutcome run_synth(const RunConfig& config, const std::filesystem::path& out_dir);
BatchOutcome run_preprocess(const RunConfig& config, const std::filesystem::path& scenes_dir);

/// Writes epoch_<n>.ckpt, final.ckpt, train_log.csv and train_summary.json into out_dir.
TrainResult run_train(const RunConfig& config, const std::filesystem::path& scenes_dir,
                      const std::filesystem::path& out_dir);

/// One prediction per query; per-query failures land in the file's failure list.
BatchOutcome run_infer(const RunConfig& config, const std::filesystem::path& checkpoint,
                       const std::filesystem::path& scenes_dir, const std::filesystem::path& out);

/// One report per predictions file; writes report JSON and a .txt table next to it.
std::vector<EvalReport> run_eval(const RunConfig& config, std::span<const std::filesystem::path> predictions,
                                 const std::filesystem::path& scenes_dir, const std::filesystem::path& report);

/// Scores in-memory predictions against scenes.
EvalReport evaluate_predictions(std::span<const Scene> scenes, std::span<const GroundingPrediction> predictions,
                                const MetricOptions& options, std::string variant = {});

}  // namespace wsground

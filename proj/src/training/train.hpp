#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "encoders/providers.hpp"
#include "losses/losses.hpp"
#include "projection/projection.hpp"
#include "training/config.hpp"
#include "training/model.hpp"

namespace wsground {

// Everything training needs from one scene that does not depend on the
// trainable parameters.
struct PreparedScene {
  std::shared_ptr<const Scene> scene;
  std::vector<std::optional<Region2D>> regions;  // one per proposal
  std::vector<int> paired;                       // proposal indices whose region was encoded
  Eigen::MatrixXd region_embeddings;             // F^2D, rows follow `paired`
  Eigen::MatrixXd query_embeddings;              // F^Q, one row per query
};

/// Best-frame region of every proposal; proposals no frame sees get nullopt and a warning.
std::vector<std::optional<Region2D>> compute_regions(const Scene& scene, ExtensionMode mode,
                                                     bool use_depth_visibility = false);

/// Encodes regions and queries with the frozen providers. Embeddings are
/// rounded to float32 so that cached and fresh runs agree bit for bit.
PreparedScene prepare_scene(std::shared_ptr<const Scene> scene, const FrozenProviders& providers,
                            ExtensionMode mode, bool use_depth_visibility = false);

/// As above but with regions computed elsewhere (e.g. a preprocess cache).
PreparedScene prepare_scene(std::shared_ptr<const Scene> scene, const FrozenProviders& providers,
                            std::vector<std::optional<Region2D>> regions);

/// F^C for the vocabulary, float32-rounded.
Eigen::MatrixXd category_embeddings(const FrozenProviders& providers, const CategoryVocabulary& vocabulary);

/// Per-scene sampling stream for one epoch.
std::uint64_t scene_sampling_seed(std::uint64_t seed, int epoch, const std::string& scene_id);

// The five loss terms of one scene. `category_residual` is R^C, the text
// adapter applied to F^C on the same tape. Terms whose weight is zero are
// not computed and stay at 0.
LossTerms scene_losses(nn::Tape& tape, GroundingModel& model, const PreparedScene& scene,
                       const nn::Var& category_residual, const LossWeights& weights, std::uint64_t sampling_seed);

struct TrainLogRow {
  std::int64_t step = 0;
  int epoch = 0;
  LossReport losses;  // batch means
  double lr = 0.0;    // base group
};

struct TrainCallbacks {
  std::function<void(const TrainLogRow&)> on_step;
  std::function<void(int epoch, const GroundingModel&)> on_epoch;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  std::vector<double> epoch_mean_total;  // mean per-scene total loss of each epoch
};

// Adam over scene batches. The whole run executes inside an
// audit::TrainingScope; a non-finite loss or gradient aborts with the step,
// and a change in the frozen providers' checksum raises FrozenViolation.
TrainResult train(std::span<const PreparedScene> scenes, const Eigen::MatrixXd& category_embeddings,
                  const TrainConfig& config, const FrozenProviders& providers, GroundingModel& model,
                  const TrainCallbacks& callbacks = {});

/// CSV header and row in the training-log layout.
std::string train_log_header();
std::string train_log_line(const TrainLogRow& row);

}  // namespace wsground

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "encoders/providers.hpp"
#include "training/model.hpp"

namespace wsground {

// Everything the filter-and-rank step consumes, already encoded.
struct GroundingInputs {
  Eigen::MatrixXd point_features;     // F^3D, M x d
  Eigen::MatrixXd point_residual;     // R^3D, M x d
  Eigen::MatrixXd category_residual;  // R^C, K x d
  Eigen::RowVectorXd query_logits;    // I^Q, 1 x K
  Eigen::RowVectorXd query_features;  // F^Q, 1 x d
};

struct GroundingPrediction {
  std::string scene_id;
  std::string query_id;
  std::vector<bool> mask;                // reserved proposals, after fallback
  std::vector<double> scores;            // F^3D . F^Q, -inf for filtered rows
  std::vector<int> proposal_categories;  // argmax of R^3D . R^C^T
  std::vector<int> topk_categories;      // from I^Q, best first
  bool fallback = false;                 // no proposal matched, all kept
  std::vector<int> ranking;              // proposal indices, reserved rows first
  int predicted_index = -1;
  std::int64_t predicted_proposal_id = -1;
  std::vector<std::int64_t> ranked_proposal_ids;
  AxisAlignedBox3D predicted_box;
};

/// The k highest-logit categories, best first; ties go to the lower id. k is capped at K.
std::vector<int> top_k_categories(const Eigen::RowVectorXd& logits, int k);

/// Pre-fallback mask: proposal category is among the top-k.
std::vector<bool> category_mask(const std::vector<int>& proposal_categories, const std::vector<int>& topk);

// Filter proposals to the query's top-k categories (keeping all when none
// match), score by inner product (cosine when `normalize`) and rank.
// Only indices are filled in; ids and boxes are the caller's.
GroundingPrediction ground_from_embeddings(const GroundingInputs& inputs, int k, bool normalize);

/// Seed of the point sampling used at inference for one scene.
std::uint64_t inference_sampling_seed(const GroundingModel& model, const std::string& scene_id);

// Grounds every query of a scene (or the listed one) with the trained model.
// Needs no frames. Throws ContractError when the scene has no proposals.
std::vector<GroundingPrediction> ground_scene(const Scene& scene, const GroundingModel& model,
                                              const TextEncoder& text, int k);
GroundingPrediction ground(const GroundingQuery& query, const Scene& scene, const GroundingModel& model,
                           const TextEncoder& text, int k);

struct PredictionFile {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<GroundingPrediction> predictions;
  nlohmann::json failures = nlohmann::json::array();  // {scene_id, query_id, error}
};

nlohmann::json to_json(const GroundingPrediction& p);
GroundingPrediction prediction_from_json(const nlohmann::json& j);
void write_prediction_file(const std::filesystem::path& path, const PredictionFile& file);
PredictionFile read_prediction_file(const std::filesystem::path& path);

}  // namespace wsground

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "inference/inference.hpp"
#include "projection/box.hpp"
#include "scene/scene.hpp"

namespace wsground {

struct GroundTruth {
  std::string scene_id;
  std::string query_id;
  std::optional<std::int64_t> target_proposal_id;
  std::optional<AxisAlignedBox3D> target_box;
  int target_category_id = 0;
  std::optional<int> distractor_count;
  std::optional<bool> view_dependent;
  std::optional<bool> unique;  // sole object of its category in the scene
};

// One query to score. `prediction` is null when inference produced nothing
// for it; `ranked_boxes` are the boxes of prediction->ranked_proposal_ids.
struct EvalItem {
  GroundTruth truth;
  const GroundingPrediction* prediction = nullptr;
  std::vector<AxisAlignedBox3D> ranked_boxes;
};

/// Fraction with iou_3d(predicted, truth) >= m. Missing predictions count as wrong (warned).
double acc_at_iou(std::span<const EvalItem> items, double m);
/// Fraction whose predicted proposal id is the target.
double selection_accuracy(std::span<const EvalItem> items);
/// Fraction where any of the top-n ranked boxes has IoU > m.
double recall_at_n_iou(std::span<const EvalItem> items, int n, double m);

enum class Subset { overall, unique, multiple, easy, hard, view_dependent, view_independent };
std::string_view to_string(Subset subset);

struct BucketOptions {
  int easy_max_distractors = 1;
};

/// Subsets an item belongs to (always including overall). Items missing the
/// metadata for a partition are left out of it.
std::vector<Subset> bucket_query(const GroundTruth& truth, const BucketOptions& options = {});

/// Ground truth of every query in a scene; unique comes from the proposals' category labels.
std::vector<GroundTruth> ground_truth_for(const Scene& scene);

struct MetricOptions {
  bool acc_iou = true;
  bool selection = true;
  bool recall = true;
  std::vector<double> iou_thresholds = {0.25, 0.5};
  int recall_n = 3;
  BucketOptions buckets;
};

struct SubsetRow {
  Subset subset = Subset::overall;
  std::size_t count = 0;
  std::vector<std::pair<std::string, double>> values;  // metric name -> value, in column order
};

struct EvalReport {
  std::string variant;  // e.g. "Boundary-Extended Projection"
  MetricOptions options;
  std::vector<SubsetRow> rows;
  nlohmann::json meta = nlohmann::json::object();

  const SubsetRow* row(Subset subset) const;
};

EvalReport evaluate(std::span<const EvalItem> items, const MetricOptions& options, std::string variant = {});

/// Row label of a projection variant: "Unmodified Projection" / "Boundary-Extended Projection".
std::string projection_variant_label(std::string_view extension_mode);

nlohmann::json to_json(const EvalReport& report);
/// Aligned text: one table per report (subsets x metrics), then an overall
/// row per variant when several reports are given.
std::string format_report_table(std::span<const EvalReport> reports);

}  // namespace wsground

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "projection/box.hpp"
#include "scene/image.hpp"

namespace wsground {

// N x 6 rows of (x, y, z, r, g, b); xyz in meters, rgb in [0, 1].
using PointMatrix = Eigen::Matrix<float, Eigen::Dynamic, 6, Eigen::RowMajor>;

struct Proposal {
  std::int64_t proposal_id = 0;
  std::vector<std::uint32_t> point_indices;
  AxisAlignedBox3D box3d;
  std::optional<int> category_id;

  bool operator==(const Proposal&) const = default;
};

struct Frame {
  std::int64_t frame_id = 0;
  Image image;
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix4d extrinsics = Eigen::Matrix4d::Identity();  // world -> camera
  std::optional<DepthMap> depth;

  int width() const { return image.width; }
  int height() const { return image.height; }
  double fx() const { return intrinsics(0, 0); }
  double fy() const { return intrinsics(1, 1); }
  double cx() const { return intrinsics(0, 2); }
  double cy() const { return intrinsics(1, 2); }

  bool operator==(const Frame&) const = default;
};

namespace audit {
// Reads of GroundingQuery::target_proposal_id() are counted while a
// TrainingScope is alive. Training must never consult the target.
class TrainingScope {
 public:
  TrainingScope();
  ~TrainingScope();
  TrainingScope(const TrainingScope&) = delete;
  TrainingScope& operator=(const TrainingScope&) = delete;
};
std::size_t target_reads_during_training();
void reset_target_reads();
}  // namespace audit

class GroundingQuery {
 public:
  GroundingQuery() = default;
  GroundingQuery(std::string query_id, std::string text, int target_category_id,
                 std::optional<std::int64_t> target_proposal_id = std::nullopt,
                 std::optional<bool> view_dependent = std::nullopt,
                 std::optional<int> distractor_count = std::nullopt)
      : query_id(std::move(query_id)),
        text(std::move(text)),
        target_category_id(target_category_id),
        view_dependent(view_dependent),
        distractor_count(distractor_count),
        target_proposal_id_(target_proposal_id) {}

  std::string query_id;
  std::string text;
  int target_category_id = 0;
  std::optional<bool> view_dependent;
  std::optional<int> distractor_count;

  /// Evaluation-only ground truth. Audited.
  std::optional<std::int64_t> target_proposal_id() const;

  bool operator==(const GroundingQuery& o) const {
    return query_id == o.query_id && text == o.text && target_category_id == o.target_category_id &&
           view_dependent == o.view_dependent && distractor_count == o.distractor_count &&
           target_proposal_id_ == o.target_proposal_id_;
  }

 private:
  std::optional<std::int64_t> target_proposal_id_;
};

struct CategoryVocabulary {
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(labels.size()); }
  std::optional<int> find(const std::string& label) const;
  bool operator==(const CategoryVocabulary&) const = default;
};

struct Scene {
  std::string scene_id;
  PointMatrix points;
  std::vector<Proposal> proposals;
  std::vector<Frame> frames;
  std::vector<GroundingQuery> queries;
  CategoryVocabulary categories;

  std::size_t num_points() const { return static_cast<std::size_t>(points.rows()); }
  const Proposal* find_proposal(std::int64_t id) const;

  bool operator==(const Scene& o) const {
    return scene_id == o.scene_id && points == o.points && proposals == o.proposals && frames == o.frames &&
           queries == o.queries && categories == o.categories;
  }
};

enum class SceneUse { training, inference };

// Throws ValidationError naming the offending proposal/frame/query.
void validate_vocabulary(const CategoryVocabulary& vocabulary);
void validate_proposal(const Proposal& proposal, const Scene& scene);
void validate_frame(const Frame& frame);
void validate_scene(const Scene& scene, SceneUse use);

// Bundle layout: points.bin, proposals.json, queries.json, categories.json,
// frames/<id>.png + frames/<id>.cam.json (+ optional frames/<id>.depth.bin).
Scene load_scene_bundle(const std::filesystem::path& dir, SceneUse use = SceneUse::training);
void write_scene_bundle(const Scene& scene, const std::filesystem::path& dir);

/// Sorted list of bundle directories (those containing points.bin) under root.
std::vector<std::filesystem::path> list_scene_bundles(const std::filesystem::path& root);

struct SyntheticSceneOptions {
  int image_width = 160;
  int image_height = 120;
  int min_points_per_proposal = 300;
  int max_points_per_proposal = 900;
};

Scene generate_synthetic_scene(std::uint64_t seed, int num_proposals, int num_categories, int num_frames,
                               const SyntheticSceneOptions& options = {});

/// Category names used by synthetic scenes; cycles with a numeric suffix past the built-in list.
std::vector<std::string> synthetic_category_labels(int num_categories);

/// Distinct display color per category, shared by the synthetic renderer and the toy image backend.
Eigen::Vector3d category_palette_color(int category_id, int num_categories);

}  // namespace wsground

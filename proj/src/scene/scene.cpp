#include "scene/scene.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <string>

#include "common/error.hpp"

namespace wsground {

namespace audit {
namespace {
std::atomic<int> g_active_scopes{0};
std::atomic<std::size_t> g_reads{0};
}  // namespace

TrainingScope::TrainingScope() { g_active_scopes.fetch_add(1); }
TrainingScope::~TrainingScope() { g_active_scopes.fetch_sub(1); }
std::size_t target_reads_during_training() { return g_reads.load(); }
void reset_target_reads() { g_reads.store(0); }
}  // namespace audit

std::optional<std::int64_t> GroundingQuery::target_proposal_id() const {
  if (audit::g_active_scopes.load() > 0) audit::g_reads.fetch_add(1);
  return target_proposal_id_;
}

std::optional<int> CategoryVocabulary::find(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<int>(it - labels.begin());
}

const Proposal* Scene::find_proposal(std::int64_t id) const {
  for (const auto& p : proposals)
    if (p.proposal_id == id) return &p;
  return nullptr;
}

void validate_vocabulary(const CategoryVocabulary& vocabulary) {
  std::set<std::string> seen;
  for (const auto& label : vocabulary.labels) {
    if (label.empty()) throw ValidationError("category vocabulary contains an empty label");
    if (!seen.insert(label).second) throw ValidationError("duplicate category label '" + label + "'");
  }
}

void validate_proposal(const Proposal& proposal, const Scene& scene) {
  const std::string who = "proposal " + std::to_string(proposal.proposal_id);
  if (proposal.point_indices.empty()) throw ValidationError(who + ": point_indices is empty");
  if (!proposal.box3d.valid()) throw ValidationError(who + ": box min exceeds max");
  if (proposal.category_id &&
      (*proposal.category_id < 0 || *proposal.category_id >= scene.categories.size()))
    throw ValidationError(who + ": category_id " + std::to_string(*proposal.category_id) + " outside [0, " +
                          std::to_string(scene.categories.size()) + ")");
  const auto n = scene.num_points();
  for (auto idx : proposal.point_indices) {
    if (idx >= n)
      throw ValidationError(who + ": point index " + std::to_string(idx) + " >= point count " +
                            std::to_string(n));
    const Eigen::Vector3d p = scene.points.row(idx).head<3>().cast<double>();
    if (!proposal.box3d.contains(p, 1e-6))
      throw ValidationError(who + ": point " + std::to_string(idx) + " lies outside its box");
  }
}

void validate_frame(const Frame& frame) {
  const std::string who = "frame " + std::to_string(frame.frame_id);
  if (frame.width() < 1 || frame.height() < 1) throw ValidationError(who + ": image must be at least 1x1");
  if (!(frame.fx() > 0.0) || !(frame.fy() > 0.0)) throw ValidationError(who + ": focal lengths must be positive");
  const Eigen::Matrix3d r = frame.extrinsics.topLeftCorner<3, 3>();
  const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err < 1e-5)) throw ValidationError(who + ": extrinsic rotation is not orthonormal");
  if (!frame.extrinsics.allFinite() || !frame.intrinsics.allFinite())
    throw ValidationError(who + ": non-finite calibration");
  if (frame.depth && (frame.depth->width != frame.width() || frame.depth->height != frame.height()))
    throw ValidationError(who + ": depth map size differs from image size");
}

void validate_scene(const Scene& scene, SceneUse use) {
  const std::string who = "scene " + scene.scene_id;
  if (scene.num_points() < 1) throw ValidationError(who + ": no points");
  if (!scene.points.allFinite()) throw ValidationError(who + ": non-finite point data");
  validate_vocabulary(scene.categories);
  std::set<std::int64_t> ids;
  for (const auto& p : scene.proposals) {
    if (!ids.insert(p.proposal_id).second)
      throw ValidationError(who + ": duplicate proposal id " + std::to_string(p.proposal_id));
    validate_proposal(p, scene);
  }
  std::set<std::int64_t> frame_ids;
  for (const auto& f : scene.frames) {
    if (!frame_ids.insert(f.frame_id).second)
      throw ValidationError(who + ": duplicate frame id " + std::to_string(f.frame_id));
    validate_frame(f);
  }
  if (use == SceneUse::training && scene.frames.empty())
    throw ValidationError(who + ": training scenes need at least one frame");
  for (const auto& q : scene.queries) {
    if (q.text.empty()) throw ValidationError(who + ": query " + q.query_id + " has empty text");
    if (q.target_category_id < 0 || q.target_category_id >= scene.categories.size())
      throw ValidationError(who + ": query " + q.query_id + " target_category_id out of range");
    if (q.distractor_count && *q.distractor_count < 0)
      throw ValidationError(who + ": query " + q.query_id + " has negative distractor_count");
    if (auto target = q.target_proposal_id(); target && !ids.count(*target))
      throw ValidationError(who + ": query " + q.query_id + " names unknown proposal " +
                            std::to_string(*target));
  }
}

}  // namespace wsground

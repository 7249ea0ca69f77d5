#include "projection/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"

namespace wsground {

std::string_view to_string(ExtensionMode mode) {
  return mode == ExtensionMode::none ? "none" : "boundary_extended";
}

ExtensionMode parse_extension_mode(std::string_view text) {
  if (text == "none") return ExtensionMode::none;
  if (text == "boundary_extended") return ExtensionMode::boundary_extended;
  throw ConfigError("extension_mode must be 'none' or 'boundary_extended', got '" + std::string(text) + "'");
}

std::vector<PixelProjection> project_points(const Eigen::Ref<const Eigen::MatrixX3d>& points, const Frame& frame,
                                            bool use_depth_visibility) {
  const Eigen::Matrix3d rotation = frame.extrinsics.topLeftCorner<3, 3>();
  const Eigen::Vector3d translation = frame.extrinsics.topRightCorner<3, 1>();
  const bool depth_test = use_depth_visibility && frame.depth.has_value();
  const double w = frame.width();
  const double h = frame.height();

  std::vector<PixelProjection> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::Vector3d pc = rotation * points.row(i).transpose() + translation;
    auto& p = out[static_cast<std::size_t>(i)];
    p.camera_depth = pc.z();
    if (!(pc.z() > 0.0)) continue;
    p.u = frame.fx() * pc.x() / pc.z() + frame.cx();
    p.v = frame.fy() * pc.y() / pc.z() + frame.cy();
    p.visible = p.u >= 0.0 && p.u < w && p.v >= 0.0 && p.v < h;
    if (p.visible && depth_test) {
      const float measured = frame.depth->at(static_cast<int>(p.u), static_cast<int>(p.v));
      if (measured > 0.0f && std::abs(pc.z() - measured) > kDepthVisibilityTolerance) p.visible = false;
    }
  }
  return out;
}

Eigen::MatrixX3d proposal_points(const Proposal& proposal, const Scene& scene) {
  Eigen::MatrixX3d pts(static_cast<Eigen::Index>(proposal.point_indices.size()), 3);
  for (std::size_t i = 0; i < proposal.point_indices.size(); ++i)
    pts.row(static_cast<Eigen::Index>(i)) = scene.points.row(proposal.point_indices[i]).head<3>().cast<double>();
  return pts;
}

Rect extend_rect(const Rect& rect, ExtensionMode mode) {
  if (mode == ExtensionMode::none) return rect;
  return {rect.x, rect.y, rect.w + 0.2 * rect.w, rect.h + 0.2 * rect.h};
}

Rect clamp_rect(const Rect& rect, int width, int height) {
  const double x0 = std::clamp(rect.x, 0.0, static_cast<double>(width));
  const double y0 = std::clamp(rect.y, 0.0, static_cast<double>(height));
  const double x1 = std::clamp(rect.x + rect.w, 0.0, static_cast<double>(width));
  const double y1 = std::clamp(rect.y + rect.h, 0.0, static_cast<double>(height));
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

std::optional<std::size_t> select_best_frame(const std::vector<FrameVisibility>& counts) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i].visible_count > 0 && (!best || counts[i].visible_count > counts[*best].visible_count)) best = i;
  return best;
}

std::optional<Region2D> best_frame_region(const Proposal& proposal, const Scene& scene, ExtensionMode mode,
                                          bool use_depth_visibility) {
  if (scene.frames.empty()) return std::nullopt;
  const Eigen::MatrixX3d pts = proposal_points(proposal, scene);

  std::vector<FrameVisibility> counts;
  std::vector<std::vector<PixelProjection>> projections;
  for (const auto& frame : scene.frames) {
    projections.push_back(project_points(pts, frame, use_depth_visibility));
    const auto& proj = projections.back();
    counts.push_back({frame.frame_id, static_cast<std::size_t>(std::count_if(
                                          proj.begin(), proj.end(), [](const auto& p) { return p.visible; }))});
  }
  const auto best = select_best_frame(counts);
  if (!best) return std::nullopt;

  double u0 = std::numeric_limits<double>::infinity(), v0 = u0;
  double u1 = -u0, v1 = -u0;
  for (const auto& p : projections[*best]) {
    if (!p.visible) continue;
    u0 = std::min(u0, std::floor(p.u));
    v0 = std::min(v0, std::floor(p.v));
    u1 = std::max(u1, std::floor(p.u) + 1.0);
    v1 = std::max(v1, std::floor(p.v) + 1.0);
  }
  const Frame& frame = scene.frames[*best];
  Region2D region;
  region.frame_id = frame.frame_id;
  region.visible_point_count = counts[*best].visible_count;
  region.rect = clamp_rect(extend_rect({u0, v0, u1 - u0, v1 - v0}, mode), frame.width(), frame.height());
  return region;
}

double iou_2d(const Rect& a, const Rect& b) {
  const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const AxisAlignedBox3D& a, const AxisAlignedBox3D& b) {
  const Eigen::Vector3d lo = a.min.cwiseMax(b.min);
  const Eigen::Vector3d hi = a.max.cwiseMin(b.max);
  const Eigen::Vector3d side = (hi - lo).cwiseMax(0.0);
  const double inter = side.x() * side.y() * side.z();
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace wsground

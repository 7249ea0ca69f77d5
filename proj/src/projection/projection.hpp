#pragma once

#include <Eigen/Core>
#include <optional>
#include <string_view>
#include <vector>

#include "projection/box.hpp"
#include "scene/scene.hpp"

namespace wsground {

struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  bool operator==(const Rect&) const = default;
};

struct Region2D {
  std::int64_t frame_id = 0;
  Rect rect;
  std::size_t visible_point_count = 0;

  bool operator==(const Region2D&) const = default;
};

enum class ExtensionMode { none, boundary_extended };

std::string_view to_string(ExtensionMode mode);
ExtensionMode parse_extension_mode(std::string_view text);

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double camera_depth = 0.0;
  bool visible = false;
};

/// Depth-test tolerance used when use_depth_visibility is on.
inline constexpr double kDepthVisibilityTolerance = 0.10;

// Pinhole projection u = fx*x_c/z_c + cx, v = fy*y_c/z_c + cy of world points
// (one per row). Visible iff z_c > 0 and (u, v) falls inside the image; with
// use_depth_visibility and a depth map, the camera depth must also agree with
// the measured depth to within kDepthVisibilityTolerance (pixels with no
// measurement, depth <= 0, are not tested).
std::vector<PixelProjection> project_points(const Eigen::Ref<const Eigen::MatrixX3d>& points, const Frame& frame,
                                            bool use_depth_visibility = false);

/// World coordinates of a proposal's points, one per row.
Eigen::MatrixX3d proposal_points(const Proposal& proposal, const Scene& scene);

// Growth keeps (x, y) and scales width/height by 1.2; mode none is identity.
Rect extend_rect(const Rect& rect, ExtensionMode mode);
Rect clamp_rect(const Rect& rect, int width, int height);

struct FrameVisibility {
  std::int64_t frame_id = 0;
  std::size_t visible_count = 0;
};

/// Index of the entry with the largest count; ties go to the earliest entry.
std::optional<std::size_t> select_best_frame(const std::vector<FrameVisibility>& counts);

// Picks the frame seeing the most proposal points, bounds the pixel cells of
// the visible points, applies the extension and clamps to the image.
// Returns nullopt when no frame sees any point.
std::optional<Region2D> best_frame_region(const Proposal& proposal, const Scene& scene, ExtensionMode mode,
                                          bool use_depth_visibility = false);

double iou_2d(const Rect& a, const Rect& b);
double iou_3d(const AxisAlignedBox3D& a, const AxisAlignedBox3D& b);

}  // namespace wsground

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"
#include "projection/projection.hpp"
#include "scene/scene.hpp"

namespace wsground {

namespace {

constexpr std::array<const char*, 16> kLabels = {"chair", "table",  "bed",     "sofa",   "lamp",  "cabinet",
                                                 "desk",  "shelf",  "toilet",  "bathtub", "sink", "door",
                                                 "window", "monitor", "pillow", "trash can"};

constexpr int kFloorPoints = 400;
constexpr double kCellSize = 1.3;

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

Eigen::Vector3d category_dimensions(int category, Rng& rng) {
  Rng shape(mix_seed(0x5eedULL, static_cast<std::uint64_t>(category)));
  Eigen::Vector3d base(shape.uniform(0.35, 0.9), shape.uniform(0.35, 0.9), shape.uniform(0.3, 1.1));
  for (int a = 0; a < 3; ++a) base[a] *= rng.uniform(0.9, 1.1);
  return base;
}

// Uniform sample on the surface of the box (faces weighted by area).
Eigen::Vector3d sample_box_surface(const AxisAlignedBox3D& box, Rng& rng) {
  const Eigen::Vector3d e = box.extent();
  const std::array<double, 3> face_area = {e.y() * e.z(), e.x() * e.z(), e.x() * e.y()};
  const double total = 2.0 * (face_area[0] + face_area[1] + face_area[2]);
  double pick = rng.uniform() * total;
  int axis = 0;
  for (; axis < 2; ++axis) {
    if (pick < 2.0 * face_area[axis]) break;
    pick -= 2.0 * face_area[axis];
  }
  Eigen::Vector3d p;
  for (int a = 0; a < 3; ++a) p[a] = rng.uniform(box.min[a], box.max[a]);
  p[axis] = rng.uniform() < 0.5 ? box.min[axis] : box.max[axis];
  return p;
}

Eigen::Matrix4d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = r;
  t.topRightCorner<3, 1>() = -r * eye;
  return t;
}

// Splats every point as a 2x2 block with a z-buffer; the z-buffer becomes the
// frame's depth map.
void render(Frame& frame, const PointMatrix& points) {
  const Eigen::MatrixX3d xyz = points.leftCols<3>().cast<double>();
  const auto proj = project_points(xyz, frame);
  std::vector<double> zbuf(static_cast<std::size_t>(frame.width()) * frame.height(),
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < proj.size(); ++i) {
    if (!proj[i].visible) continue;
    const int u = static_cast<int>(proj[i].u);
    const int v = static_cast<int>(proj[i].v);
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const int x = u + dx, y = v + dy;
        if (x >= frame.width() || y >= frame.height()) continue;
        auto& z = zbuf[static_cast<std::size_t>(y) * frame.width() + x];
        if (proj[i].camera_depth >= z) continue;
        z = proj[i].camera_depth;
        auto* px = frame.image.pixel(x, y);
        for (int c = 0; c < 3; ++c)
          px[c] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp<double>(points(i, 3 + c), 0.0, 1.0)));
      }
  }
  DepthMap depth{frame.width(), frame.height(), std::vector<float>(zbuf.size(), 0.0f)};
  for (std::size_t i = 0; i < zbuf.size(); ++i)
    if (std::isfinite(zbuf[i])) depth.meters[i] = static_cast<float>(zbuf[i]);
  frame.depth = std::move(depth);
}

}  // namespace

std::vector<std::string> synthetic_category_labels(int num_categories) {
  std::vector<std::string> labels;
  for (int c = 0; c < num_categories; ++c) {
    std::string label = kLabels[static_cast<std::size_t>(c) % kLabels.size()];
    if (c >= static_cast<int>(kLabels.size())) label += " " + std::to_string(c / kLabels.size() + 1);
    labels.push_back(std::move(label));
  }
  return labels;
}

Eigen::Vector3d category_palette_color(int category_id, int num_categories) {
  // Evenly spaced hues at fixed saturation/value.
  const double hue = 6.0 * static_cast<double>(category_id) / std::max(1, num_categories);
  const double s = 0.85, v = 0.9;
  const int sector = static_cast<int>(std::floor(hue)) % 6;
  const double f = hue - std::floor(hue);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

Scene generate_synthetic_scene(std::uint64_t seed, int num_proposals, int num_categories, int num_frames,
                               const SyntheticSceneOptions& options) {
  if (num_proposals < 1 || num_categories < 1 || num_frames < 1)
    throw ContractError("generate_synthetic_scene needs at least one proposal, category and frame");
  Rng rng(mix_seed(seed, 0x73796e7468ULL));
  Scene scene;
  scene.scene_id = "synth_" + std::to_string(seed);
  scene.categories.labels = synthetic_category_labels(num_categories);

  // Every category appears once before any repeats.
  std::vector<int> cats;
  for (auto c : shuffled(static_cast<std::size_t>(num_categories), rng)) cats.push_back(static_cast<int>(c));
  cats.resize(std::min<std::size_t>(cats.size(), static_cast<std::size_t>(num_proposals)));
  while (static_cast<int>(cats.size()) < num_proposals)
    cats.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(num_categories))));

  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_proposals))));
  const double half_room = 0.5 * grid * kCellSize;
  const auto cells = shuffled(static_cast<std::size_t>(grid * grid), rng);

  std::vector<Eigen::Vector3f> xyz;
  std::vector<Eigen::Vector3f> rgb;
  for (int i = 0; i < kFloorPoints; ++i) {
    xyz.emplace_back(static_cast<float>(rng.uniform(-half_room, half_room)),
                     static_cast<float>(rng.uniform(-half_room, half_room)), 0.0f);
    const float g = static_cast<float>(std::clamp(0.5 + 0.03 * rng.normal(), 0.0, 1.0));
    rgb.emplace_back(g, g, g);
  }

  for (int i = 0; i < num_proposals; ++i) {
    const int cell = static_cast<int>(cells[static_cast<std::size_t>(i)]);
    const double cx = -half_room + kCellSize * (cell % grid + 0.5) + rng.uniform(-0.12, 0.12);
    const double cy = -half_room + kCellSize * (cell / grid + 0.5) + rng.uniform(-0.12, 0.12);
    const Eigen::Vector3d dims = category_dimensions(cats[static_cast<std::size_t>(i)], rng);

    Proposal p;
    p.proposal_id = i;
    p.category_id = cats[static_cast<std::size_t>(i)];
    p.box3d.min = {cx - 0.5 * dims.x(), cy - 0.5 * dims.y(), 0.0};
    p.box3d.max = {cx + 0.5 * dims.x(), cy + 0.5 * dims.y(), dims.z()};

    const Eigen::Vector3d color = category_palette_color(*p.category_id, num_categories);
    const int count = static_cast<int>(
        rng.uniform(options.min_points_per_proposal, options.max_points_per_proposal + 1));
    for (int k = 0; k < count; ++k) {
      const Eigen::Vector3d q = sample_box_surface(p.box3d, rng);
      Eigen::Vector3f qf = q.cast<float>();
      // float rounding must not leave the box
      for (int a = 0; a < 3; ++a)
        qf[a] = std::clamp(qf[a], static_cast<float>(p.box3d.min[a]), static_cast<float>(p.box3d.max[a]));
      p.point_indices.push_back(static_cast<std::uint32_t>(xyz.size()));
      xyz.push_back(qf);
      Eigen::Vector3f c;
      for (int a = 0; a < 3; ++a) c[a] = static_cast<float>(std::clamp(color[a] + 0.03 * rng.normal(), 0.0, 1.0));
      rgb.push_back(c);
    }
    scene.proposals.push_back(std::move(p));
  }

  scene.points.resize(static_cast<Eigen::Index>(xyz.size()), 6);
  for (std::size_t i = 0; i < xyz.size(); ++i) {
    scene.points.row(static_cast<Eigen::Index>(i)) << xyz[i].x(), xyz[i].y(), xyz[i].z(), rgb[i].x(), rgb[i].y(),
        rgb[i].z();
  }

  const double radius = 1.6 * half_room + 2.0;
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  for (int l = 0; l < num_frames; ++l) {
    Frame frame;
    frame.frame_id = l;
    frame.image = Image(options.image_width, options.image_height, {24, 24, 24});
    const double f = 0.8 * options.image_width;
    frame.intrinsics << f, 0, 0.5 * options.image_width, 0, f, 0.5 * options.image_height, 0, 0, 1;
    const double angle = phase + 2.0 * M_PI * l / num_frames;
    const Eigen::Vector3d eye(radius * std::cos(angle), radius * std::sin(angle), rng.uniform(1.6, 2.2));
    frame.extrinsics = look_at(eye, {0.0, 0.0, 0.4});
    render(frame, scene.points);
    scene.frames.push_back(std::move(frame));
  }

  const auto& labels = scene.categories.labels;
  for (int i = 0; i < num_proposals; ++i) {
    const int cat = cats[static_cast<std::size_t>(i)];
    std::string text = "the " + labels[static_cast<std::size_t>(cat)];
    bool view_dependent = false;
    if (num_proposals > 1) {
      auto other = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_proposals - 1)));
      if (other >= i) ++other;
      view_dependent = rng.uniform() < 0.3;
      text += (view_dependent ? " to the left of the " : " near the ") +
              labels[static_cast<std::size_t>(cats[static_cast<std::size_t>(other)])];
    }
    const int distractors = static_cast<int>(std::count(cats.begin(), cats.end(), cat)) - 1;
    scene.queries.emplace_back(scene.scene_id + "_q" + std::to_string(i), text, cat, i, view_dependent,
                               distractors);
  }
  return scene;
}

}  // namespace wsground

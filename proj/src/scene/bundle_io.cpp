#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "scene/scene.hpp"

namespace wsground {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("missing file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw LoadError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw LoadError(where + ": field '" + std::string(key) + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return field<T>(obj, key, where);
}

Eigen::Vector3d vec3(const json& obj, const char* key, const std::string& where) {
  auto v = field<std::vector<double>>(obj, key, where);
  if (v.size() != 3) throw LoadError(where + ": field '" + std::string(key) + "' needs 3 values");
  return {v[0], v[1], v[2]};
}

PointMatrix read_points(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("missing file " + path.string());
  const auto n = binary::get<std::uint64_t>(in, "header of " + path.string());
  PointMatrix points(static_cast<Eigen::Index>(n), 6);
  binary::get_bytes(in, points.data(), n * 6 * sizeof(float), "payload of " + path.string());
  return points;
}

void write_points(const fs::path& path, const PointMatrix& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  binary::put<std::uint64_t>(out, static_cast<std::uint64_t>(points.rows()));
  out.write(reinterpret_cast<const char*>(points.data()),
            static_cast<std::streamsize>(points.size() * sizeof(float)));
}

std::vector<Proposal> read_proposals(const fs::path& path) {
  const json arr = read_json_file(path);
  if (!arr.is_array()) throw LoadError(path.string() + ": expected an array");
  std::vector<Proposal> out;
  for (const auto& obj : arr) {
    Proposal p;
    const std::string where = path.filename().string();
    p.proposal_id = field<std::int64_t>(obj, "id", where);
    const std::string who = where + " proposal " + std::to_string(p.proposal_id);
    p.point_indices = field<std::vector<std::uint32_t>>(obj, "point_indices", who);
    p.box3d.min = vec3(obj, "box_min", who);
    p.box3d.max = vec3(obj, "box_max", who);
    p.category_id = optional_field<int>(obj, "category_id", who);
    out.push_back(std::move(p));
  }
  return out;
}

json proposals_json(const std::vector<Proposal>& proposals) {
  json arr = json::array();
  for (const auto& p : proposals) {
    json obj = {{"id", p.proposal_id},
                {"point_indices", p.point_indices},
                {"box_min", {p.box3d.min.x(), p.box3d.min.y(), p.box3d.min.z()}},
                {"box_max", {p.box3d.max.x(), p.box3d.max.y(), p.box3d.max.z()}}};
    if (p.category_id) obj["category_id"] = *p.category_id;
    arr.push_back(std::move(obj));
  }
  return arr;
}

std::vector<GroundingQuery> read_queries(const fs::path& path) {
  const json arr = read_json_file(path);
  if (!arr.is_array()) throw LoadError(path.string() + ": expected an array");
  std::vector<GroundingQuery> out;
  const std::string where = path.filename().string();
  for (const auto& obj : arr) {
    auto id = field<std::string>(obj, "id", where);
    const std::string who = where + " query " + id;
    out.emplace_back(id, field<std::string>(obj, "text", who), field<int>(obj, "target_category_id", who),
                     optional_field<std::int64_t>(obj, "target_proposal_id", who),
                     optional_field<bool>(obj, "view_dependent", who),
                     optional_field<int>(obj, "distractor_count", who));
  }
  return out;
}

json queries_json(const std::vector<GroundingQuery>& queries) {
  json arr = json::array();
  for (const auto& q : queries) {
    json obj = {{"id", q.query_id}, {"text", q.text}, {"target_category_id", q.target_category_id}};
    if (auto t = q.target_proposal_id()) obj["target_proposal_id"] = *t;
    if (q.view_dependent) obj["view_dependent"] = *q.view_dependent;
    if (q.distractor_count) obj["distractor_count"] = *q.distractor_count;
    arr.push_back(std::move(obj));
  }
  return arr;
}

Frame read_frame(const fs::path& frames_dir, std::int64_t id) {
  const std::string stem = std::to_string(id);
  const fs::path cam_path = frames_dir / (stem + ".cam.json");
  const json cam = read_json_file(cam_path);
  const std::string who = "frame " + stem;
  Frame frame;
  frame.frame_id = id;
  auto k = field<std::vector<double>>(cam, "intrinsics", who);
  auto e = field<std::vector<double>>(cam, "extrinsics", who);
  if (k.size() != 9) throw LoadError(who + ": intrinsics needs 9 values");
  if (e.size() != 16) throw LoadError(who + ": extrinsics needs 16 values");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) frame.intrinsics(r, c) = k[3 * r + c];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) frame.extrinsics(r, c) = e[4 * r + c];
  const int width = field<int>(cam, "width", who);
  const int height = field<int>(cam, "height", who);
  frame.image = read_png(frames_dir / (stem + ".png"));
  if (frame.image.width != width || frame.image.height != height)
    throw ValidationError(who + ": image size differs from calibration width/height");
  const fs::path depth_path = frames_dir / (stem + ".depth.bin");
  if (fs::exists(depth_path)) frame.depth = read_depth(depth_path);
  return frame;
}

void write_frame(const fs::path& frames_dir, const Frame& frame) {
  const std::string stem = std::to_string(frame.frame_id);
  std::vector<double> k, e;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k.push_back(frame.intrinsics(r, c));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e.push_back(frame.extrinsics(r, c));
  write_json_file(frames_dir / (stem + ".cam.json"),
                  {{"intrinsics", k}, {"extrinsics", e}, {"width", frame.width()}, {"height", frame.height()}});
  write_png(frames_dir / (stem + ".png"), frame.image);
  if (frame.depth) write_depth(frames_dir / (stem + ".depth.bin"), *frame.depth);
}

}  // namespace

Scene load_scene_bundle(const fs::path& dir, SceneUse use) {
  if (!fs::is_directory(dir)) throw LoadError("scene bundle directory not found: " + dir.string());
  Scene scene;
  scene.scene_id = dir.filename().string();
  if (scene.scene_id.empty()) scene.scene_id = dir.parent_path().filename().string();
  scene.points = read_points(dir / "points.bin");
  scene.proposals = read_proposals(dir / "proposals.json");
  scene.queries = read_queries(dir / "queries.json");
  scene.categories.labels = read_json_file(dir / "categories.json").get<std::vector<std::string>>();

  const fs::path frames_dir = dir / "frames";
  std::vector<std::int64_t> frame_ids;
  if (fs::is_directory(frames_dir)) {
    const std::string suffix = ".cam.json";
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
        continue;
      const std::string stem = name.substr(0, name.size() - suffix.size());
      try {
        std::size_t used = 0;
        frame_ids.push_back(std::stoll(stem, &used));
        if (used != stem.size()) throw std::invalid_argument(stem);
      } catch (const std::exception&) {
        throw LoadError("frame calibration file with non-integer id: " + entry.path().string());
      }
    }
  }
  std::sort(frame_ids.begin(), frame_ids.end());
  for (auto id : frame_ids) scene.frames.push_back(read_frame(frames_dir, id));

  validate_scene(scene, use);
  return scene;
}

void write_scene_bundle(const Scene& scene, const fs::path& dir) {
  fs::create_directories(dir / "frames");
  write_points(dir / "points.bin", scene.points);
  write_json_file(dir / "proposals.json", proposals_json(scene.proposals));
  write_json_file(dir / "queries.json", queries_json(scene.queries));
  write_json_file(dir / "categories.json", scene.categories.labels);
  for (const auto& frame : scene.frames) write_frame(dir / "frames", frame);
}

std::vector<fs::path> list_scene_bundles(const fs::path& root) {
  if (!fs::is_directory(root)) throw LoadError("scenes directory not found: " + root.string());
  std::vector<fs::path> out;
  if (fs::exists(root / "points.bin")) out.push_back(root);
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "points.bin")) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace wsground

#include <doctest.h>

#include "common/error.hpp"
#include "helpers.hpp"
#include "scene/scene.hpp"

using namespace wsground;

TEST_CASE("synthetic scenes are deterministic and seed dependent") {
  const Scene a = generate_synthetic_scene(7, 4, 3, 2);
  const Scene b = generate_synthetic_scene(7, 4, 3, 2);
  const Scene c = generate_synthetic_scene(8, 4, 3, 2);
  CHECK(a.proposals.size() == 4);
  CHECK(a.frames.size() == 2);
  CHECK(a.categories.size() == 3);
  CHECK(a == b);
  CHECK(a.points != c.points);
}

TEST_CASE("synthetic proposals keep their points inside their boxes") {
  const Scene s = generate_synthetic_scene(12, 6, 8, 3);
  CHECK_NOTHROW(validate_scene(s, SceneUse::training));
  for (const auto& p : s.proposals)
    for (auto idx : p.point_indices) {
      const Eigen::Vector3d xyz = s.points.row(idx).head<3>().cast<double>().transpose();
      CHECK(p.box3d.contains(xyz, 1e-5));
    }
}

TEST_CASE("bundle round-trip") {
  testing::TempDir dir("bundle");
  const Scene s = generate_synthetic_scene(5, 2, 3, 3);
  write_scene_bundle(s, dir / s.scene_id);
  const Scene back = load_scene_bundle(dir / s.scene_id);
  CHECK(back.proposals.size() == 2);
  CHECK(back.frames.size() == 3);
  CHECK(back == s);
  CHECK(list_scene_bundles(dir.path()).size() == 1);
}

TEST_CASE("bundle validation errors name the culprit") {
  testing::TempDir dir("bundle_bad");
  Scene s = generate_synthetic_scene(5, 2, 3, 1);
  s.proposals[1].point_indices.push_back(static_cast<std::uint32_t>(s.num_points()));
  write_scene_bundle(s, dir / "scene");
  try {
    load_scene_bundle(dir / "scene");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(std::to_string(s.proposals[1].proposal_id)) != std::string::npos);
  }
}

TEST_CASE("missing bundle file is a load error naming it") {
  testing::TempDir dir("bundle_missing");
  write_scene_bundle(generate_synthetic_scene(5, 2, 3, 1), dir / "scene");
  std::filesystem::remove(dir / "scene" / "queries.json");
  try {
    load_scene_bundle(dir / "scene");
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("queries.json") != std::string::npos);
  }
}

TEST_CASE("frameless bundles load for inference only") {
  testing::TempDir dir("bundle_noframes");
  Scene s = generate_synthetic_scene(5, 2, 3, 1);
  s.frames.clear();
  write_scene_bundle(s, dir / "scene");
  CHECK(load_scene_bundle(dir / "scene", SceneUse::inference).frames.empty());
  CHECK_THROWS_AS(load_scene_bundle(dir / "scene", SceneUse::training), ValidationError);
}

TEST_CASE("target reads are audited only inside a training scope") {
  audit::reset_target_reads();
  GroundingQuery q("q0", "the chair", 0, 4);
  CHECK(q.target_proposal_id() == 4);
  CHECK(audit::target_reads_during_training() == 0);
  {
    audit::TrainingScope scope;
    (void)q.target_proposal_id();
    (void)q.target_proposal_id();
  }
  CHECK(audit::target_reads_during_training() == 2);
  audit::reset_target_reads();
}

TEST_CASE("png and depth round-trip") {
  testing::TempDir dir("raster");
  Image img(5, 3, {10, 20, 30});
  img.pixel(4, 2)[0] = 255;
  write_png(dir / "a.png", img);
  CHECK(read_png(dir / "a.png") == img);
  DepthMap d{2, 2, {0.f, 1.5f, 2.f, 3.25f}};
  write_depth(dir / "a.depth.bin", d);
  CHECK(read_depth(dir / "a.depth.bin") == d);
}

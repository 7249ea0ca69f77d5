#include <doctest.h>

#include "common/error.hpp"
#include "common/log.hpp"
#include "helpers.hpp"
#include "pipeline/commands.hpp"
#include "training/checkpoint.hpp"

using namespace wsground;
using testing::slurp;

TEST_CASE("default run config parses and round-trips") {
  const RunConfig c = parse_run_config(nlohmann::json::object());
  CHECK(c.topk == 3);
  CHECK(c.train.max_epochs == 60);
  CHECK(c.extension_mode == ExtensionMode::boundary_extended);
  const RunConfig back = parse_run_config(to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("config errors name the field") {
  const auto message = [](const nlohmann::json& j) {
    try {
      parse_run_config(j);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({{"train", {{"max_epochs", "ten"}}}}).find("train.max_epochs") != std::string::npos);
  CHECK(message({{"model", {{"encoder", {{"heads_typo", 2}}}}}}).find("model.encoder.heads_typo") != std::string::npos);
  CHECK(message({{"inference", {{"topk", 0}}}}).find("inference.topk") != std::string::npos);
  CHECK(message({{"projection", {{"extension_mode", "wide"}}}}).find("projection.extension_mode") !=
        std::string::npos);
  CHECK(message({{"seed", -4}}).find("seed") != std::string::npos);
}

TEST_CASE("dotted overrides") {
  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "train.max_epochs", "7");
  apply_override(j, "projection.extension_mode", "none");
  apply_override(j, "eval.metrics", R"(["selection"])");
  const RunConfig c = parse_run_config(j);
  CHECK(c.train.max_epochs == 7);
  CHECK(c.extension_mode == ExtensionMode::none);
  CHECK(c.metrics.selection);
  CHECK_FALSE(c.metrics.acc_iou);
}

TEST_CASE("the run seed reaches encoder and trainer") {
  const RunConfig c = parse_run_config({{"seed", 42}});
  CHECK(c.model.encoder.seed == 42);
  CHECK(c.train.seed == 42);
  CHECK(artifact_stamp(c)["seed"] == 42);
}

TEST_CASE("unreadable config file is a config error") {
  testing::TempDir dir("cfg");
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(read_config_json(dir / "bad.json"), ConfigError);
}

TEST_CASE("preprocess writes one cache per scene and is idempotent") {
  testing::TempDir dir("prep");
  const RunConfig cfg = testing::small_run_config();
  CHECK(run_synth(cfg, dir / "scenes").succeeded == 3);
  const auto bundles = list_scene_bundles(dir / "scenes");
  REQUIRE(bundles.size() == 3);
  CHECK(run_preprocess(cfg, dir / "scenes").succeeded == 3);
  std::vector<std::string> first;
  for (const auto& b : bundles)
    for (const char* f : {RegionCacheFiles::kRegions, RegionCacheFiles::kRegionEmbeddings,
                          RegionCacheFiles::kCategoryEmbeddings}) {
      REQUIRE(std::filesystem::exists(b / f));
      first.push_back(slurp(b / f));
    }
  run_preprocess(cfg, dir / "scenes");
  std::size_t i = 0;
  for (const auto& b : bundles)
    for (const char* f : {RegionCacheFiles::kRegions, RegionCacheFiles::kRegionEmbeddings,
                          RegionCacheFiles::kCategoryEmbeddings})
      CHECK(slurp(b / f) == first[i++]);

  const auto regions = nlohmann::json::parse(slurp(bundles[0] / RegionCacheFiles::kRegions));
  CHECK(regions["stamp"]["seed"] == cfg.seed);
  CHECK(regions["extension_mode"] == "boundary_extended");
}

TEST_CASE("preprocess leaves out proposals no frame sees and warns") {
  testing::TempDir dir("prep_hidden");
  const RunConfig cfg = testing::small_run_config();
  Scene s = synthetic_dataset_scene(cfg, 0);
  // Move one proposal's points far behind every camera.
  auto& hidden = s.proposals[0];
  for (auto idx : hidden.point_indices) s.points(idx, 2) -= 1000.0f;
  hidden.box3d.min.z() -= 1000.0;
  hidden.box3d.max.z() -= 1000.0;
  write_scene_bundle(s, dir / "scenes" / s.scene_id);
  const auto warnings = log::warning_count();
  CHECK(run_preprocess(cfg, dir / "scenes").succeeded == 1);
  CHECK(log::warning_count() > warnings);
  const auto regions = nlohmann::json::parse(slurp(dir / "scenes" / s.scene_id / RegionCacheFiles::kRegions));
  for (const auto& r : regions["regions"]) CHECK(r["proposal_id"] != hidden.proposal_id);
  CHECK(regions["regions"].size() == s.proposals.size() - 1);
}

TEST_CASE("cache directory override keeps bundles untouched") {
  testing::TempDir dir("prep_cache");
  RunConfig cfg = testing::small_run_config();
  cfg.synth.count = 1;
  run_synth(cfg, dir / "scenes");
  cfg.cache_dir = dir / "cache";
  run_preprocess(cfg, dir / "scenes");
  const auto bundle = list_scene_bundles(dir / "scenes").front();
  CHECK_FALSE(std::filesystem::exists(bundle / RegionCacheFiles::kRegions));
  CHECK(std::filesystem::exists(dir / "cache" / bundle.filename() / RegionCacheFiles::kRegions));
}

TEST_CASE("cached and fresh preparation agree") {
  testing::TempDir dir("prep_agree");
  RunConfig cfg = testing::small_run_config();
  cfg.synth.count = 1;
  run_synth(cfg, dir / "scenes");
  const auto bundle = list_scene_bundles(dir / "scenes").front();
  auto scene = std::make_shared<const Scene>(load_scene_bundle(bundle));
  const auto providers = make_frozen_providers(ProviderBackend::toy, scene->categories, cfg.model.encoder.d, 0);
  const auto fresh = prepare_from_bundle(scene, bundle, cfg, providers);
  run_preprocess(cfg, dir / "scenes");
  const auto cached = prepare_from_bundle(scene, bundle, cfg, providers);
  CHECK(cached.paired == fresh.paired);
  CHECK(cached.region_embeddings == fresh.region_embeddings);
  CHECK(cached.regions == fresh.regions);
}

TEST_CASE("end-to-end pipeline is reproducible") {
  testing::TempDir dir("e2e");
  const RunConfig cfg = testing::small_run_config();
  run_synth(cfg, dir / "scenes");
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / ("run" + std::to_string(run));
    const auto result = run_train(cfg, dir / "scenes", out);
    CHECK(result.epoch_mean_total.size() == 2);
    CHECK(std::filesystem::exists(out / "final.ckpt"));
    CHECK(std::filesystem::exists(out / "epoch_0.ckpt"));
    CHECK(std::filesystem::exists(out / "epoch_1.ckpt"));
    const std::string log = slurp(out / "train_log.csv");
    CHECK(log.rfind("# config_hash=" + config_hash(cfg), 0) == 0);
    CHECK(log.find(train_log_header()) != std::string::npos);

    const auto preds = out / "predictions.json";
    const auto outcome = run_infer(cfg, out / "final.ckpt", dir / "scenes", preds);
    CHECK(outcome.failed == 0);
    CHECK(outcome.succeeded > 0);
    const std::vector<std::filesystem::path> files{preds};
    const auto r = run_eval(cfg, files, dir / "scenes", out / "report.json");
    REQUIRE(r.size() == 1);
    CHECK(r[0].variant == "Boundary-Extended Projection");
    CHECK(std::filesystem::exists(out / "report.txt"));
    reports.push_back(slurp(out / "report.json"));
    CHECK(read_checkpoint(out / "final.ckpt").meta.config_hash == config_hash(cfg));
  }
  CHECK(reports[0] == reports[1]);
  CHECK(nlohmann::json::parse(reports[0])["stamp"]["config_hash"] == config_hash(cfg));
}

#include "pipeline/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "training/checkpoint.hpp"

namespace wsground {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

FrozenProviders providers_for(const ModelConfig& model, const CategoryVocabulary& vocabulary) {
  return make_frozen_providers(model.encoder.backend, vocabulary, model.encoder.d, model.provider_seed);
}

json region_json(const Proposal& p, const Region2D& r, bool encoded) {
  return {{"proposal_id", p.proposal_id},
          {"frame_id", r.frame_id},
          {"rect", {r.rect.x, r.rect.y, r.rect.w, r.rect.h}},
          {"visible_point_count", r.visible_point_count},
          {"encoded", encoded}};
}

fs::path cache_location(const RunConfig& config, const fs::path& bundle) {
  if (config.cache_dir.empty()) return bundle;
  return config.cache_dir / bundle.filename();
}

}  // namespace

Scene synthetic_dataset_scene(const RunConfig& config, int index) {
  const auto& s = config.synth;
  Rng rng(mix_seed(config.seed, 0xda7a0000ULL + static_cast<std::uint64_t>(index)));
  const int m = s.proposals_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(s.proposals_max - s.proposals_min + 1)));
  Scene scene = generate_synthetic_scene(mix_seed(config.seed, static_cast<std::uint64_t>(index)), m, s.categories,
                                         s.frames, s.scene);
  char id[32];
  std::snprintf(id, sizeof id, "scene_%04d", index);
  scene.scene_id = id;
  return scene;
}

BatchOutcome run_synth(const RunConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  BatchOutcome outcome;
  for (int i = 0; i < config.synth.count; ++i) {
    const Scene scene = synthetic_dataset_scene(config, i);
    write_scene_bundle(scene, out_dir / scene.scene_id);
    ++outcome.succeeded;
  }
  write_json(out_dir / "synth_meta.json", {{"stamp", artifact_stamp(config)}, {"count", config.synth.count}});
  return outcome;
}

BatchOutcome run_preprocess(const RunConfig& config, const fs::path& scenes_dir) {
  const auto bundles = list_scene_bundles(scenes_dir);
  if (bundles.empty()) throw LoadError("no scene bundles under " + scenes_dir.string());
  BatchOutcome outcome;
  for (const auto& dir : bundles) {
    try {
      auto scene = std::make_shared<const Scene>(load_scene_bundle(dir, SceneUse::training));
      const auto providers = providers_for(config.model, scene->categories);
      const auto prepared =
          prepare_scene(scene, providers, config.extension_mode, config.use_depth_visibility);
      json regions = json::array();
      std::size_t next_paired = 0;
      for (std::size_t i = 0; i < scene->proposals.size(); ++i) {
        if (!prepared.regions[i]) continue;
        const bool encoded = next_paired < prepared.paired.size() &&
                             prepared.paired[next_paired] == static_cast<int>(i);
        if (encoded) ++next_paired;
        regions.push_back(region_json(scene->proposals[i], *prepared.regions[i], encoded));
      }
      const fs::path cache = cache_location(config, dir);
      fs::create_directories(cache);
      write_json(cache / RegionCacheFiles::kRegions,
                 {{"stamp", artifact_stamp(config)},
                  {"extension_mode", std::string(to_string(config.extension_mode))},
                  {"use_depth_visibility", config.use_depth_visibility},
                  {"provider_checksum", hex(providers.checksum())},
                  {"regions", regions}});
      if (config.cache_embeddings) {
        write_embedding_cache(cache / RegionCacheFiles::kRegionEmbeddings,
                              {Modality::image_region, prepared.region_embeddings});
        write_embedding_cache(cache / RegionCacheFiles::kCategoryEmbeddings,
                              {Modality::text_category, category_embeddings(providers, scene->categories)});
      }
      ++outcome.succeeded;
    } catch (const Error& e) {
      log::warn("preprocess " + dir.filename().string() + ": " + e.what());
      ++outcome.failed;
    }
  }
  return outcome;
}

PreparedScene prepare_from_bundle(std::shared_ptr<const Scene> scene, const fs::path& dir, const RunConfig& config,
                                  const FrozenProviders& providers) {
  const fs::path cache_root = cache_location(config, dir);
  const fs::path cache = cache_root / RegionCacheFiles::kRegions;
  if (!fs::exists(cache)) return prepare_scene(scene, providers, config.extension_mode, config.use_depth_visibility);

  json j;
  try {
    std::ifstream in(cache);
    in >> j;
  } catch (const std::exception& e) {
    throw LoadError("unparseable region cache " + cache.string() + ": " + e.what());
  }
  const bool matches = j.value("extension_mode", std::string()) == to_string(config.extension_mode) &&
                       j.value("use_depth_visibility", false) == config.use_depth_visibility &&
                       j.value("provider_checksum", std::string()) == hex(providers.checksum());
  if (!matches) {
    log::warn("region cache of " + scene->scene_id + " was built with other settings; recomputing");
    return prepare_scene(scene, providers, config.extension_mode, config.use_depth_visibility);
  }

  std::map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < scene->proposals.size(); ++i) index[scene->proposals[i].proposal_id] = i;
  std::vector<std::optional<Region2D>> regions(scene->proposals.size());
  std::vector<int> encoded;
  try {
    for (const auto& r : j.at("regions")) {
      const auto it = index.find(r.at("proposal_id").get<std::int64_t>());
      if (it == index.end()) throw LoadError("region cache names an unknown proposal");
      const auto rect = r.at("rect").get<std::vector<double>>();
      if (rect.size() != 4) throw LoadError("region rect needs 4 numbers");
      regions[it->second] = Region2D{r.at("frame_id").get<std::int64_t>(), {rect[0], rect[1], rect[2], rect[3]},
                                     r.at("visible_point_count").get<std::size_t>()};
      if (r.at("encoded").get<bool>()) encoded.push_back(static_cast<int>(it->second));
    }
  } catch (const json::exception& e) {
    throw LoadError("malformed region cache " + cache.string() + ": " + e.what());
  }

  const fs::path emb = cache_root / RegionCacheFiles::kRegionEmbeddings;
  if (config.cache_embeddings && fs::exists(emb)) {
    const auto set = read_embedding_cache(emb);
    std::vector<int> sorted = encoded;
    std::sort(sorted.begin(), sorted.end());
    if (set.size() == static_cast<Eigen::Index>(encoded.size()) && set.dim() == providers.text->dim() &&
        sorted == encoded) {
      PreparedScene p;
      p.scene = scene;
      p.regions = std::move(regions);
      p.paired = std::move(encoded);
      p.region_embeddings = set.vectors;
      std::vector<std::string> texts;
      for (const auto& q : scene->queries) texts.push_back(q.text);
      p.query_embeddings = texts.empty()
                               ? Eigen::MatrixXd(0, providers.text->dim())
                               : Eigen::MatrixXd(providers.text->encode_text(texts, Modality::text_query)
                                                     .vectors.cast<float>()
                                                     .cast<double>());
      return p;
    }
    log::warn("embedding cache of " + scene->scene_id + " does not match its regions; re-encoding");
  }
  return prepare_scene(scene, providers, std::move(regions));
}

TrainResult run_train(const RunConfig& config, const fs::path& scenes_dir, const fs::path& out_dir) {
  const auto bundles = list_scene_bundles(scenes_dir);
  if (bundles.empty()) throw LoadError("no scene bundles under " + scenes_dir.string());
  std::vector<std::shared_ptr<const Scene>> scenes;
  for (const auto& dir : bundles) scenes.push_back(std::make_shared<const Scene>(load_scene_bundle(dir, SceneUse::training)));
  const CategoryVocabulary vocabulary = scenes.front()->categories;
  for (const auto& s : scenes)
    if (!(s->categories == vocabulary))
      throw ValidationError("scene " + s->scene_id + " uses a different category vocabulary than " +
                            scenes.front()->scene_id);

  const auto providers = providers_for(config.model, vocabulary);
  std::vector<PreparedScene> prepared;
  for (std::size_t i = 0; i < scenes.size(); ++i)
    prepared.push_back(prepare_from_bundle(scenes[i], bundles[i], config, providers));

  fs::create_directories(out_dir);
  GroundingModel model(config.model, vocabulary);
  const json stamp = artifact_stamp(config);
  CheckpointMeta meta{stamp["config_hash"].get<std::string>(), config.seed, -1,
                      std::string(to_string(config.extension_mode))};

  std::ofstream log_file(out_dir / "train_log.csv");
  if (!log_file) throw LoadError("cannot write " + (out_dir / "train_log.csv").string());
  log_file << "# config_hash=" << meta.config_hash << " seed=" << config.seed
           << " version=" << stamp["version"].get<std::string>() << '\n'
           << train_log_header() << '\n';

  TrainCallbacks callbacks;
  callbacks.on_step = [&](const TrainLogRow& row) { log_file << train_log_line(row) << '\n'; };
  callbacks.on_epoch = [&](int epoch, const GroundingModel& m) {
    log_file.flush();
    CheckpointMeta em = meta;
    em.epoch = epoch;
    write_checkpoint(out_dir / ("epoch_" + std::to_string(epoch) + ".ckpt"), m, em);
  };
  const auto result = train(prepared, category_embeddings(providers, vocabulary), config.train, providers, model,
                            callbacks);
  write_checkpoint(out_dir / "final.ckpt", model, meta);
  write_json(out_dir / "train_summary.json",
             {{"stamp", stamp}, {"config", to_json(config)}, {"epoch_mean_total", result.epoch_mean_total},
              {"steps", result.log.size()}});
  return result;
}

BatchOutcome run_infer(const RunConfig& config, const fs::path& checkpoint, const fs::path& scenes_dir,
                       const fs::path& out) {
  const auto loaded = read_checkpoint(checkpoint);
  const auto& model = loaded.model;
  const auto providers = providers_for(model.config(), model.vocabulary());
  const auto bundles = list_scene_bundles(scenes_dir);
  if (bundles.empty()) throw LoadError("no scene bundles under " + scenes_dir.string());

  PredictionFile file;
  file.meta = artifact_stamp(config);
  file.meta["topk"] = config.topk;
  file.meta["checkpoint_config_hash"] = loaded.meta.config_hash;
  file.meta["checkpoint_seed"] = loaded.meta.seed;
  file.meta["extension_mode"] = loaded.meta.extension_mode;
  BatchOutcome outcome;
  const auto fail = [&](const std::string& scene_id, const std::string& query_id, const std::string& error) {
    file.failures.push_back({{"scene_id", scene_id}, {"query_id", query_id}, {"error", error}});
    ++outcome.failed;
  };

  for (const auto& dir : bundles) {
    Scene scene;
    try {
      scene = load_scene_bundle(dir, SceneUse::inference);
      if (!(scene.categories == model.vocabulary()))
        throw ValidationError("scene vocabulary differs from the checkpoint's");
    } catch (const Error& e) {
      log::warn("infer " + dir.filename().string() + ": " + e.what());
      fail(dir.filename().string(), "", e.what());
      continue;
    }
    try {
      auto preds = ground_scene(scene, model, *providers.text, config.topk);
      outcome.succeeded += preds.size();
      for (auto& p : preds) file.predictions.push_back(std::move(p));
    } catch (const Error&) {
      for (const auto& q : scene.queries) {
        try {
          file.predictions.push_back(ground(q, scene, model, *providers.text, config.topk));
          ++outcome.succeeded;
        } catch (const Error& e) {
          log::warn("infer " + scene.scene_id + "/" + q.query_id + ": " + e.what());
          fail(scene.scene_id, q.query_id, e.what());
        }
      }
    }
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_prediction_file(out, file);
  return outcome;
}

EvalReport evaluate_predictions(std::span<const Scene> scenes, std::span<const GroundingPrediction> predictions,
                                const MetricOptions& options, std::string variant) {
  std::map<std::pair<std::string, std::string>, const GroundingPrediction*> by_key;
  for (const auto& p : predictions) by_key[{p.scene_id, p.query_id}] = &p;
  std::vector<EvalItem> items;
  for (const auto& scene : scenes) {
    std::map<std::int64_t, const Proposal*> proposals;
    for (const auto& p : scene.proposals) proposals[p.proposal_id] = &p;
    for (auto& truth : ground_truth_for(scene)) {
      EvalItem item;
      const auto it = by_key.find({truth.scene_id, truth.query_id});
      if (it != by_key.end()) {
        item.prediction = it->second;
        for (auto id : it->second->ranked_proposal_ids) {
          const auto pit = proposals.find(id);
          if (pit == proposals.end())
            throw ValidationError("prediction for " + truth.query_id + " ranks unknown proposal " + std::to_string(id));
          item.ranked_boxes.push_back(pit->second->box3d);
        }
      }
      item.truth = std::move(truth);
      items.push_back(std::move(item));
    }
  }
  return evaluate(items, options, std::move(variant));
}

std::vector<EvalReport> run_eval(const RunConfig& config, std::span<const fs::path> predictions,
                                 const fs::path& scenes_dir, const fs::path& report) {
  if (predictions.empty()) throw ConfigError("eval needs at least one predictions file");
  const auto bundles = list_scene_bundles(scenes_dir);
  if (bundles.empty()) throw LoadError("no scene bundles under " + scenes_dir.string());
  std::vector<Scene> scenes;
  for (const auto& dir : bundles) scenes.push_back(load_scene_bundle(dir, SceneUse::inference));

  std::vector<EvalReport> reports;
  json reports_json = json::array();
  for (const auto& path : predictions) {
    const auto file = read_prediction_file(path);
    const std::string mode = file.meta.value("extension_mode", std::string());
    auto r = evaluate_predictions(scenes, file.predictions, config.metrics,
                                  mode.empty() ? path.filename().string() : projection_variant_label(mode));
    r.meta = file.meta;
    reports_json.push_back(to_json(r));
    reports.push_back(std::move(r));
  }
  if (report.has_parent_path()) fs::create_directories(report.parent_path());
  write_json(report, {{"stamp", artifact_stamp(config)}, {"reports", reports_json}});
  fs::path table = report;
  table.replace_extension(".txt");
  std::ofstream out(table);
  if (!out) throw LoadError("cannot write " + table.string());
  out << format_report_table(reports);
  return reports;
}

}  // namespace wsground

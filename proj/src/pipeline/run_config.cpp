#include "pipeline/run_config.hpp"

#include <cstdio>
#include <fstream>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/version.hpp"

namespace wsground {

using nlohmann::json;

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  json_fields::Reader r(j, "");
  r.read("seed", c.seed);
  if (const json* m = r.child("model")) c.model = model_config_from_json(*m, "model");
  if (const json* t = r.child("train")) c.train = train_config_from_json(*t, "train");

  if (const json* p = r.child("projection")) {
    json_fields::Reader pr(*p, "projection");
    std::string mode(to_string(c.extension_mode));
    pr.read("extension_mode", mode);
    pr.read("use_depth_visibility", c.use_depth_visibility);
    pr.finish();
    try {
      c.extension_mode = parse_extension_mode(mode);
    } catch (const Error& e) {
      throw ConfigError(pr.field("extension_mode") + ": " + e.what());
    }
  }
  if (const json* p = r.child("preprocess")) {
    json_fields::Reader pr(*p, "preprocess");
    pr.read("cache_embeddings", c.cache_embeddings);
    pr.finish();
  }
  if (const json* p = r.child("inference")) {
    json_fields::Reader pr(*p, "inference");
    pr.read("topk", c.topk);
    pr.finish();
  }
  if (const json* p = r.child("eval")) {
    json_fields::Reader er(*p, "eval");
    std::vector<std::string> metrics;
    bool have_metrics = er.child("metrics") != nullptr;
    er.read("metrics", metrics);
    if (have_metrics) {
      c.metrics.acc_iou = c.metrics.selection = c.metrics.recall = false;
      for (const auto& m : metrics) {
        if (m == "acc_iou") c.metrics.acc_iou = true;
        else if (m == "selection") c.metrics.selection = true;
        else if (m == "recall") c.metrics.recall = true;
        else throw ConfigError("eval.metrics: unknown metric '" + m + "' (expected acc_iou, selection, recall)");
      }
    }
    er.read("iou_thresholds", c.metrics.iou_thresholds);
    er.read("recall_n", c.metrics.recall_n);
    er.read("easy_max_distractors", c.metrics.buckets.easy_max_distractors);
    er.finish();
  }
  if (const json* p = r.child("synth")) {
    json_fields::Reader sr(*p, "synth");
    sr.read("count", c.synth.count);
    sr.read("proposals_min", c.synth.proposals_min);
    sr.read("proposals_max", c.synth.proposals_max);
    sr.read("categories", c.synth.categories);
    sr.read("frames", c.synth.frames);
    sr.read("image_width", c.synth.scene.image_width);
    sr.read("image_height", c.synth.scene.image_height);
    sr.read("points_min", c.synth.scene.min_points_per_proposal);
    sr.read("points_max", c.synth.scene.max_points_per_proposal);
    sr.finish();
  }
  r.finish();

  c.model.encoder.seed = c.seed;
  c.train.seed = c.seed;
  c.model.validate();
  c.train.validate();
  if (c.topk < 1) throw ConfigError("inference.topk must be >= 1");
  if (c.metrics.recall_n < 1) throw ConfigError("eval.recall_n must be >= 1");
  for (double m : c.metrics.iou_thresholds)
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("eval.iou_thresholds must lie in [0, 1]");
  if (c.metrics.buckets.easy_max_distractors < 0) throw ConfigError("eval.easy_max_distractors must be >= 0");
  const auto& s = c.synth;
  if (s.count < 0) throw ConfigError("synth.count must be >= 0");
  if (s.proposals_min < 1 || s.proposals_max < s.proposals_min)
    throw ConfigError("synth.proposals_min must be >= 1 and <= synth.proposals_max");
  if (s.categories < 1) throw ConfigError("synth.categories must be >= 1");
  if (s.frames < 0) throw ConfigError("synth.frames must be >= 0");
  if (s.scene.image_width < 8 || s.scene.image_height < 8) throw ConfigError("synth.image_width/height must be >= 8");
  if (s.scene.min_points_per_proposal < 1 || s.scene.max_points_per_proposal < s.scene.min_points_per_proposal)
    throw ConfigError("synth.points_min must be >= 1 and <= synth.points_max");
  if (c.model.encoder.backend == ProviderBackend::toy && c.model.encoder.d < s.categories)
    throw ConfigError("model.encoder.d must be >= synth.categories for the toy backend");
  return c;
}

json to_json(const RunConfig& c) {
  std::vector<std::string> metrics;
  if (c.metrics.acc_iou) metrics.emplace_back("acc_iou");
  if (c.metrics.selection) metrics.emplace_back("selection");
  if (c.metrics.recall) metrics.emplace_back("recall");
  return {{"seed", c.seed},
          {"model", to_json(c.model)},
          {"train", to_json(c.train)},
          {"projection",
           {{"extension_mode", std::string(to_string(c.extension_mode))},
            {"use_depth_visibility", c.use_depth_visibility}}},
          {"preprocess", {{"cache_embeddings", c.cache_embeddings}}},
          {"inference", {{"topk", c.topk}}},
          {"eval",
           {{"metrics", metrics},
            {"iou_thresholds", c.metrics.iou_thresholds},
            {"recall_n", c.metrics.recall_n},
            {"easy_max_distractors", c.metrics.buckets.easy_max_distractors}}},
          {"synth",
           {{"count", c.synth.count},
            {"proposals_min", c.synth.proposals_min},
            {"proposals_max", c.synth.proposals_max},
            {"categories", c.synth.categories},
            {"frames", c.synth.frames},
            {"image_width", c.synth.scene.image_width},
            {"image_height", c.synth.scene.image_height},
            {"points_min", c.synth.scene.min_points_per_proposal},
            {"points_max", c.synth.scene.max_points_per_proposal}}}};
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void apply_override(json& j, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  if (!j.is_object()) j = json::object();
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + dotted_key + "'");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[part] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError(dotted_key.substr(0, dot) + ": not an object, cannot set '" + dotted_key + "'");
    node = &next;
    start = dot + 1;
  }
}

std::string config_hash(const RunConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(to_json(c).dump())));
  return buf;
}

json artifact_stamp(const RunConfig& c) {
  return {{"config_hash", config_hash(c)}, {"seed", c.seed}, {"version", kVersion}};
}

}  // namespace wsground

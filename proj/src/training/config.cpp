#include "training/config.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace wsground {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size_scenes < 1) throw ConfigError("train.batch_size_scenes must be >= 1");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw ConfigError("train.base_lr must be > 0");
  if (!(transformer_lr_multiplier >= 0.0)) throw ConfigError("train.transformer_lr_multiplier must be >= 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ConfigError("train.decay_factor must lie in (0, 1]");
  for (std::size_t i = 1; i < decay_epochs.size(); ++i)
    if (decay_epochs[i] <= decay_epochs[i - 1]) throw ConfigError("train.decay_epochs must be strictly increasing");
  if (max_epochs < 0) throw ConfigError("train.max_epochs must be >= 0");
  if (!(max_grad_norm >= 0.0)) throw ConfigError("train.max_grad_norm must be >= 0");
  loss_weights.validate();
}

double lr_at_epoch(const TrainConfig& config, int epoch, LrGroup group) {
  if (epoch < 0) throw ContractError("lr_at_epoch: epoch must be >= 0");
  double lr = config.base_lr;
  if (group == LrGroup::transformer) lr *= config.transformer_lr_multiplier;
  const auto passed = std::count_if(config.decay_epochs.begin(), config.decay_epochs.end(),
                                    [epoch](int e) { return e <= epoch; });
  for (long i = 0; i < passed; ++i) lr *= config.decay_factor;
  return lr;
}

namespace json_fields {

Reader::Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
}

const json* Reader::child(const char* key) {
  seen_.emplace_back(key);
  const auto it = j_.find(key);
  return it == j_.end() ? nullptr : &*it;
}

void Reader::finish() const {
  for (const auto& [key, value] : j_.items())
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
      throw ConfigError(field(key.c_str()) + ": unknown field");
}

}  // namespace json_fields

namespace {

json to_json(const SetAbstractionLevel& l) {
  return {{"centroids", l.centroids}, {"radius", l.radius}, {"neighbors", l.neighbors}, {"mlp", l.mlp}};
}

SetAbstractionLevel level_from_json(const json& j, const std::string& path) {
  SetAbstractionLevel l;
  json_fields::Reader r(j, path);
  r.read("centroids", l.centroids);
  r.read("radius", l.radius);
  r.read("neighbors", l.neighbors);
  r.read("mlp", l.mlp);
  r.finish();
  return l;
}

}  // namespace

json to_json(const EncoderConfig& c) {
  json levels = json::array();
  for (const auto& l : c.set_abstraction) levels.push_back(to_json(l));
  return {{"backend", std::string(to_string(c.backend))},
          {"d", c.d},
          {"point_sample_count", c.point_sample_count},
          {"transformer_layers", c.transformer_layers},
          {"transformer_heads", c.transformer_heads},
          {"transformer_ffn", c.transformer_ffn},
          {"seed", c.seed},
          {"backbone", std::string(to_string(c.backbone))},
          {"shared_mlp", c.shared_mlp},
          {"set_abstraction", levels},
          {"global_mlp", c.global_mlp}};
}

EncoderConfig encoder_config_from_json(const json& j, const std::string& path) {
  EncoderConfig c;
  json_fields::Reader r(j, path);
  std::string backend(to_string(c.backend)), backbone(to_string(c.backbone));
  r.read("backend", backend);
  r.read("d", c.d);
  r.read("point_sample_count", c.point_sample_count);
  r.read("transformer_layers", c.transformer_layers);
  r.read("transformer_heads", c.transformer_heads);
  r.read("transformer_ffn", c.transformer_ffn);
  r.read("seed", c.seed);
  r.read("backbone", backbone);
  r.read("shared_mlp", c.shared_mlp);
  r.read("global_mlp", c.global_mlp);
  if (const json* levels = r.child("set_abstraction")) {
    if (!levels->is_array()) throw ConfigError(r.field("set_abstraction") + ": expected an array");
    c.set_abstraction.clear();
    for (std::size_t i = 0; i < levels->size(); ++i)
      c.set_abstraction.push_back(level_from_json((*levels)[i], r.field("set_abstraction") + "[" + std::to_string(i) + "]"));
  }
  r.finish();
  try {
    c.backend = parse_provider_backend(backend);
  } catch (const Error& e) {
    throw ConfigError(r.field("backend") + ": " + e.what());
  }
  try {
    c.backbone = parse_backbone_kind(backbone);
  } catch (const Error& e) {
    throw ConfigError(r.field("backbone") + ": " + e.what());
  }
  return c;
}

json to_json(const ModelConfig& c) {
  return {{"encoder", to_json(c.encoder)},       {"adapter_hidden", c.adapter_hidden},
          {"alpha_text", c.alpha_text},          {"alpha_image", c.alpha_image},
          {"alpha_point", c.alpha_point},        {"normalize", c.normalize},
          {"provider_seed", c.provider_seed}};
}

ModelConfig model_config_from_json(const json& j, const std::string& path) {
  ModelConfig c;
  json_fields::Reader r(j, path);
  if (const json* enc = r.child("encoder")) c.encoder = encoder_config_from_json(*enc, r.field("encoder"));
  r.read("adapter_hidden", c.adapter_hidden);
  if (const json* alpha = r.child("alpha")) {
    double a = 0.0;
    if (!alpha->is_number()) throw ConfigError(r.field("alpha") + ": wrong type (got " + alpha->dump() + ")");
    a = alpha->get<double>();
    c.alpha_text = c.alpha_image = c.alpha_point = a;
  }
  r.read("alpha_text", c.alpha_text);
  r.read("alpha_image", c.alpha_image);
  r.read("alpha_point", c.alpha_point);
  r.read("normalize", c.normalize);
  r.read("provider_seed", c.provider_seed);
  r.finish();
  return c;
}

json to_json(const LossWeights& w) {
  return {{"lambda1", w.lambda1}, {"lambda2", w.lambda2}, {"lambda3", w.lambda3},
          {"lambda4", w.lambda4}, {"tau", w.tau}};
}

LossWeights loss_weights_from_json(const json& j, const std::string& path) {
  LossWeights w;
  json_fields::Reader r(j, path);
  r.read("lambda1", w.lambda1);
  r.read("lambda2", w.lambda2);
  r.read("lambda3", w.lambda3);
  r.read("lambda4", w.lambda4);
  r.read("tau", w.tau);
  r.finish();
  return w;
}

json to_json(const TrainConfig& c) {
  return {{"batch_size_scenes", c.batch_size_scenes},
          {"base_lr", c.base_lr},
          {"transformer_lr_multiplier", c.transformer_lr_multiplier},
          {"decay_factor", c.decay_factor},
          {"decay_epochs", c.decay_epochs},
          {"max_epochs", c.max_epochs},
          {"seed", c.seed},
          {"loss", to_json(c.loss_weights)},
          {"max_grad_norm", c.max_grad_norm}};
}

TrainConfig train_config_from_json(const json& j, const std::string& path) {
  TrainConfig c;
  json_fields::Reader r(j, path);
  r.read("batch_size_scenes", c.batch_size_scenes);
  r.read("base_lr", c.base_lr);
  r.read("transformer_lr_multiplier", c.transformer_lr_multiplier);
  r.read("decay_factor", c.decay_factor);
  r.read("decay_epochs", c.decay_epochs);
  r.read("max_epochs", c.max_epochs);
  r.read("seed", c.seed);
  if (const json* loss = r.child("loss")) c.loss_weights = loss_weights_from_json(*loss, r.field("loss"));
  r.read("max_grad_norm", c.max_grad_norm);
  r.finish();
  return c;
}

}  // namespace wsground

#pragma once

#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "common/error.hpp"

#include "losses/losses.hpp"
#include "training/model.hpp"

namespace wsground {

struct TrainConfig {
  int batch_size_scenes = 32;
  double base_lr = 5e-4;
  double transformer_lr_multiplier = 0.1;
  double decay_factor = 0.65;
  std::vector<int> decay_epochs = {20, 30, 40, 50};
  int max_epochs = 60;
  std::uint64_t seed = 0;
  LossWeights loss_weights;
  double max_grad_norm = 0.0;  // 0 = no clipping

  void validate() const;
};

enum class LrGroup { base, transformer };

/// Group rate times decay_factor^(number of decay epochs <= epoch); epochs count from 0.
double lr_at_epoch(const TrainConfig& config, int epoch, LrGroup group);

// Strict JSON mapping: unknown keys and wrong types raise ConfigError with the
// dotted field path.
nlohmann::json to_json(const EncoderConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const LossWeights& w);
nlohmann::json to_json(const TrainConfig& c);

EncoderConfig encoder_config_from_json(const nlohmann::json& j, const std::string& path = "encoder");
ModelConfig model_config_from_json(const nlohmann::json& j, const std::string& path = "model");
LossWeights loss_weights_from_json(const nlohmann::json& j, const std::string& path = "loss");
TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& path = "train");

namespace json_fields {

// Walks one JSON object, consuming known keys; finish() rejects leftovers.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path);

  template <typename T>
  void read(const char* key, T& out);
  const nlohmann::json* child(const char* key);
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  void finish() const;

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

template <typename T>
void Reader::read(const char* key, T& out) {
  const nlohmann::json* v = child(key);
  if (!v) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
        throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) throw ConfigError("");
    }
    out = v->get<T>();
  } catch (const std::exception&) {
    throw ConfigError(field(key) + ": wrong type (got " + v->dump() + ")");
  }
}

}  // namespace json_fields

}  // namespace wsground

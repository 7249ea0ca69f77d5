#include "training/model.hpp"

#include "common/error.hpp"
#include "common/hash.hpp"

namespace wsground {

void ModelConfig::validate() const {
  encoder.validate();
  if (adapter_hidden < 1) throw ConfigError("model.adapter_hidden must be >= 1");
  for (double a : {alpha_text, alpha_image, alpha_point})
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("model.alpha values must lie in [0, 1]");
}

GroundingModel::GroundingModel(ModelConfig config, CategoryVocabulary vocabulary)
    : config_(std::move(config)), vocabulary_(std::move(vocabulary)) {
  config_.validate();
  validate_vocabulary(vocabulary_);
  if (vocabulary_.size() < 1) throw ConfigError("model needs at least one category");
  const auto seed = config_.encoder.seed;
  init_point_encoder(params_, config_.encoder);
  init_adapter(params_, text_adapter(), mix_seed(seed, 1));
  init_adapter(params_, image_adapter(), mix_seed(seed, 2));
  init_adapter(params_, point_adapter(), mix_seed(seed, 3));
  init_query_classifier(params_, kQueryClassifier, dim(), num_categories(), mix_seed(seed, 4));
}

GroundingModel::GroundingModel(ModelConfig config, CategoryVocabulary vocabulary, nn::ParameterStore params)
    : GroundingModel(std::move(config), std::move(vocabulary)) {
  if (params.size() != params_.size())
    throw LoadError("checkpoint holds " + std::to_string(params.size()) + " tensors, model expects " +
                    std::to_string(params_.size()));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& dst = params_[i];
    if (!params.contains(dst.name)) throw LoadError("checkpoint lacks tensor " + dst.name);
    const auto& src = params.get(dst.name);
    if (src.value.rows() != dst.value.rows() || src.value.cols() != dst.value.cols())
      throw LoadError("checkpoint tensor " + dst.name + " has the wrong shape");
    dst.value = src.value;
  }
}

}  // namespace wsground

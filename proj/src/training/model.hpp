#pragma once

#include <string>

#include "adaptation/adaptation.hpp"
#include "encoders/point_encoder.hpp"
#include "nn/parameters.hpp"
#include "scene/scene.hpp"

namespace wsground {

struct ModelConfig {
  EncoderConfig encoder;
  int adapter_hidden = 512;
  double alpha_text = 0.5;
  double alpha_image = 0.5;
  double alpha_point = 0.5;
  /// L2-normalize rows before the contrastive dot products and the inference ranking.
  bool normalize = true;
  /// Seed of the frozen providers; independent of the training seed.
  std::uint64_t provider_seed = 0;

  void validate() const;
};

// Every trainable piece: the 3D encoder, the text/2D/3D adapters and the
// query classifier. The frozen providers live outside.
class GroundingModel {
 public:
  static constexpr const char* kTextAdapter = "adapter.text";
  static constexpr const char* kImageAdapter = "adapter.image";
  static constexpr const char* kPointAdapter = "adapter.point";
  static constexpr const char* kQueryClassifier = "query_classifier";

  GroundingModel(ModelConfig config, CategoryVocabulary vocabulary);
  /// For checkpoint loading: parameters supplied instead of initialized.
  GroundingModel(ModelConfig config, CategoryVocabulary vocabulary, nn::ParameterStore params);

  const ModelConfig& config() const { return config_; }
  const CategoryVocabulary& vocabulary() const { return vocabulary_; }
  int num_categories() const { return vocabulary_.size(); }
  int dim() const { return config_.encoder.d; }

  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  Adapter text_adapter() const { return {kTextAdapter, dim(), config_.adapter_hidden, config_.alpha_text}; }
  Adapter image_adapter() const { return {kImageAdapter, dim(), config_.adapter_hidden, config_.alpha_image}; }
  Adapter point_adapter() const { return {kPointAdapter, dim(), config_.adapter_hidden, config_.alpha_point}; }

 private:
  ModelConfig config_;
  CategoryVocabulary vocabulary_;
  nn::ParameterStore params_;
};

}  // namespace wsground

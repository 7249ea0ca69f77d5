#pragma once

#include <span>
#include <string>

#include "adaptation/adaptation.hpp"
#include "encoders/embedding.hpp"
#include "nn/tape.hpp"

namespace wsground {

struct LossWeights {
  double lambda1 = 1.0;  // contrastive pair L_e + L_a
  double lambda2 = 1.0;  // 2D classification
  double lambda3 = 1.0;  // 3D classification
  double lambda4 = 1.0;  // query classification
  double tau = 0.07;

  void validate() const;
};

struct LossReport {
  double contrastive_embed = 0.0;    // L_e
  double contrastive_adapted = 0.0;  // L_a
  double cls_2d = 0.0;
  double cls_3d = 0.0;
  double cls_query = 0.0;
  double total = 0.0;
};

// Symmetric InfoNCE over paired rows: row i of `image` pairs with row i of
// `points`. Mean over pairs of the image->point and point->image
// log-softmax terms at temperature tau; rows are L2-normalized first when
// `normalize`. Zero pairs yield 0 with a warning.
nn::Var contrastive_loss(const nn::Var& image, const nn::Var& points, double tau, bool normalize);
double contrastive_loss(const EmbeddingSet& image, const EmbeddingSet& points, double tau, bool normalize);

/// Mean softmax cross-entropy; zero rows yield 0 with a warning.
nn::Var classification_loss(const nn::Var& logits, std::span<const int> labels);
double classification_loss(const ClassificationLogits& logits, std::span<const int> labels);

/// Weighted objective; throws NumericError naming the first non-finite term.
double total_loss(const LossReport& components, const LossWeights& weights);

struct LossTerms {
  nn::Var contrastive_embed;
  nn::Var contrastive_adapted;
  nn::Var cls_2d;
  nn::Var cls_3d;
  nn::Var cls_query;
};

nn::Var total_loss(const LossTerms& terms, const LossWeights& weights);

}  // namespace wsground

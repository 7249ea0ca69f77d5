#pragma once

#include <string>
#include <vector>

#include "encoders/embedding.hpp"
#include "nn/parameters.hpp"
#include "nn/tape.hpp"

namespace wsground {

// Two affine layers with a ReLU between them (width -> hidden -> width),
// mixed back into its input with ratio alpha.
struct Adapter {
  std::string prefix;
  int width = 512;
  int hidden = 512;
  double alpha = 0.5;
};

void init_adapter(nn::ParameterStore& store, const Adapter& adapter, std::uint64_t seed);

struct AdaptedVars {
  nn::Var adapted;   // A
  nn::Var residual;  // R = alpha * A + (1 - alpha) * F
};

AdaptedVars adapt(nn::Tape& tape, nn::ParameterStore& store, const Adapter& adapter, const nn::Var& features);

struct AdaptedSets {
  EmbeddingSet adapted;
  EmbeddingSet residual;
};

AdaptedSets adapt(const EmbeddingSet& features, const nn::ParameterStore& store, const Adapter& adapter);

enum class LogitSource { query, region2d, proposal3d };

struct ClassificationLogits {
  Eigen::MatrixXd logits;  // n x K
  LogitSource source = LogitSource::proposal3d;
};

/// logits = R * R_C^T (n x K).
nn::Var classify_against_categories(const nn::Var& residual, const nn::Var& category_residual);
ClassificationLogits classify_against_categories(const EmbeddingSet& residual, const EmbeddingSet& category_residual,
                                                 LogitSource source);

// Single affine map d -> K on the residual query embedding.
void init_query_classifier(nn::ParameterStore& store, const std::string& prefix, int d, int num_categories,
                           std::uint64_t seed);
nn::Var classify_query(nn::Tape& tape, nn::ParameterStore& store, const std::string& prefix,
                       const nn::Var& query_residual);
ClassificationLogits classify_query(const EmbeddingSet& query_residual, const nn::ParameterStore& store,
                                    const std::string& prefix);

/// Row-wise softmax, for reporting.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

/// Row index order by descending value; ties keep the lower index first.
std::vector<int> descending_order(const Eigen::VectorXd& values);

}  // namespace wsground

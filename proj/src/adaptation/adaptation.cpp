#include "adaptation/adaptation.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "nn/layers.hpp"

namespace wsground {

void init_adapter(nn::ParameterStore& store, const Adapter& adapter, std::uint64_t seed) {
  if (adapter.width < 1 || adapter.hidden < 1) throw ConfigError("adapter widths must be >= 1");
  if (!(adapter.alpha >= 0.0 && adapter.alpha <= 1.0)) throw ConfigError("adapter alpha must lie in [0, 1]");
  nn::add_linear(store, adapter.prefix + ".fc1", adapter.width, adapter.hidden, nn::ParamGroup::base, seed);
  nn::add_linear(store, adapter.prefix + ".fc2", adapter.hidden, adapter.width, nn::ParamGroup::base, seed);
}

AdaptedVars adapt(nn::Tape& tape, nn::ParameterStore& store, const Adapter& adapter, const nn::Var& features) {
  if (features.cols() != adapter.width)
    throw ContractError("adapter " + adapter.prefix + " expects width " + std::to_string(adapter.width) +
                        ", got " + std::to_string(features.cols()));
  const nn::Var hidden = nn::relu(nn::linear(tape, store, adapter.prefix + ".fc1", features));
  const nn::Var adapted = nn::linear(tape, store, adapter.prefix + ".fc2", hidden);
  return {adapted, nn::mix(adapted, features, adapter.alpha)};
}

AdaptedSets adapt(const EmbeddingSet& features, const nn::ParameterStore& store, const Adapter& adapter) {
  nn::Tape tape;
  auto& mutable_store = const_cast<nn::ParameterStore&>(store);  // forward only
  const auto vars = adapt(tape, mutable_store, adapter, tape.constant(features.vectors));
  return {{features.modality, vars.adapted.value()}, {features.modality, vars.residual.value()}};
}

nn::Var classify_against_categories(const nn::Var& residual, const nn::Var& category_residual) {
  return nn::matmul_bt(residual, category_residual);
}

ClassificationLogits classify_against_categories(const EmbeddingSet& residual, const EmbeddingSet& category_residual,
                                                 LogitSource source) {
  if (residual.dim() != category_residual.dim() && residual.size() > 0)
    throw ContractError("classify_against_categories: embedding widths differ");
  ClassificationLogits out;
  out.source = source;
  out.logits = residual.vectors * category_residual.vectors.transpose();
  if (residual.size() == 0) out.logits.resize(0, category_residual.size());
  return out;
}

void init_query_classifier(nn::ParameterStore& store, const std::string& prefix, int d, int num_categories,
                           std::uint64_t seed) {
  nn::add_linear(store, prefix, d, num_categories, nn::ParamGroup::base, seed);
}

nn::Var classify_query(nn::Tape& tape, nn::ParameterStore& store, const std::string& prefix,
                       const nn::Var& query_residual) {
  return nn::linear(tape, store, prefix, query_residual);
}

ClassificationLogits classify_query(const EmbeddingSet& query_residual, const nn::ParameterStore& store,
                                    const std::string& prefix) {
  const auto& w = store.get(prefix + ".weight").value;
  const auto& b = store.get(prefix + ".bias").value;
  ClassificationLogits out;
  out.source = LogitSource::query;
  out.logits = (query_residual.vectors * w).rowwise() + b.row(0);
  return out;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out.row(r) = (out.row(r).array() - out.row(r).maxCoeff()).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

std::vector<int> descending_order(const Eigen::VectorXd& values) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  return order;
}

}  // namespace wsground

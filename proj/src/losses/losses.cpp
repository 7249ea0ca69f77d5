#include "losses/losses.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/log.hpp"

namespace wsground {

void LossWeights::validate() const {
  for (double l : {lambda1, lambda2, lambda3, lambda4})
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("loss.lambda1..lambda4 must be finite and >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("loss.tau must be > 0");
}

namespace {

// Symmetric InfoNCE over a square similarity matrix whose diagonal holds the
// positive pairs.
nn::Var symmetric_infonce(const nn::Var& sim) {
  const nn::Matrix& s = sim.value();
  const Eigen::Index m = s.rows();
  nn::Matrix row_soft(m, m), col_soft(m, m);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mx = s.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (s.row(i).array() - mx).exp();
    const double z = e.sum();
    row_soft.row(i) = e / z;
    loss -= s(i, i) - (mx + std::log(z));
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double mx = s.col(j).maxCoeff();
    const Eigen::VectorXd e = (s.col(j).array() - mx).exp();
    const double z = e.sum();
    col_soft.col(j) = e / z;
    loss -= s(j, j) - (mx + std::log(z));
  }
  nn::Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(m);
  const int is = sim.id();
  return sim.tape()->record(std::move(out), {sim},
                            [is, m, row_soft = std::move(row_soft), col_soft = std::move(col_soft)](
                                nn::Tape& t, const nn::Matrix& g) {
                              nn::Matrix ds = row_soft + col_soft;
                              ds.diagonal().array() -= 2.0;
                              t.accumulate(is, ds * (g(0, 0) / static_cast<double>(m)));
                            });
}

nn::Var softmax_cross_entropy(const nn::Var& logits, std::vector<int> labels) {
  const nn::Matrix& x = logits.value();
  const Eigen::Index n = x.rows();
  nn::Matrix probs(n, x.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mx = x.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (x.row(r).array() - mx).exp();
    const double z = e.sum();
    probs.row(r) = e / z;
    loss += mx + std::log(z) - x(r, labels[static_cast<std::size_t>(r)]);
  }
  nn::Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(n);
  const int il = logits.id();
  return logits.tape()->record(std::move(out), {logits},
                               [il, n, probs = std::move(probs), labels = std::move(labels)](
                                   nn::Tape& t, const nn::Matrix& g) {
                                 nn::Matrix d = probs;
                                 for (Eigen::Index r = 0; r < n; ++r) d(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
                                 t.accumulate(il, d * (g(0, 0) / static_cast<double>(n)));
                               });
}

}  // namespace

nn::Var contrastive_loss(const nn::Var& image, const nn::Var& points, double tau, bool normalize) {
  if (image.rows() != points.rows() || (image.rows() > 0 && image.cols() != points.cols()))
    throw ContractError("contrastive_loss: paired sets must have equal shape");
  if (!(tau > 0.0)) throw ContractError("contrastive_loss: tau must be positive");
  if (image.rows() == 0) {
    log::warn("contrastive loss over zero pairs; returning 0");
    return image.tape()->constant(nn::Matrix::Zero(1, 1));
  }
  const nn::Var a = normalize ? nn::l2_normalize_rows(image) : image;
  const nn::Var b = normalize ? nn::l2_normalize_rows(points) : points;
  return symmetric_infonce(nn::scale(nn::matmul_bt(a, b), 1.0 / tau));
}

double contrastive_loss(const EmbeddingSet& image, const EmbeddingSet& points, double tau, bool normalize) {
  nn::Tape tape;
  return contrastive_loss(tape.constant(image.vectors), tape.constant(points.vectors), tau, normalize).scalar();
}

nn::Var classification_loss(const nn::Var& logits, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw ContractError("classification_loss: one label per row required");
  for (int l : labels)
    if (l < 0 || l >= logits.cols()) throw ContractError("classification_loss: label outside [0, K)");
  if (labels.empty()) {
    log::warn("classification loss over zero rows; returning 0");
    return logits.tape()->constant(nn::Matrix::Zero(1, 1));
  }
  return softmax_cross_entropy(logits, std::vector<int>(labels.begin(), labels.end()));
}

double classification_loss(const ClassificationLogits& logits, std::span<const int> labels) {
  nn::Tape tape;
  return classification_loss(tape.constant(logits.logits), labels).scalar();
}

double total_loss(const LossReport& c, const LossWeights& w) {
  const std::pair<const char*, double> terms[] = {{"L_e", c.contrastive_embed},
                                                   {"L_a", c.contrastive_adapted},
                                                   {"L_cls_2d", c.cls_2d},
                                                   {"L_cls_3d", c.cls_3d},
                                                   {"L_cls_q", c.cls_query}};
  for (const auto& [name, value] : terms)
    if (!std::isfinite(value)) throw NumericError(std::string("non-finite loss term ") + name);
  return w.lambda1 * (c.contrastive_embed + c.contrastive_adapted) + w.lambda2 * c.cls_2d + w.lambda3 * c.cls_3d +
         w.lambda4 * c.cls_query;
}

nn::Var total_loss(const LossTerms& t, const LossWeights& w) {
  const nn::Var scalars[] = {t.contrastive_embed, t.contrastive_adapted, t.cls_2d, t.cls_3d, t.cls_query};
  const double weights[] = {w.lambda1, w.lambda1, w.lambda2, w.lambda3, w.lambda4};
  return nn::weighted_sum(scalars, weights);
}

}  // namespace wsground

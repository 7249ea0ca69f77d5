#include "inference/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "adaptation/adaptation.hpp"
#include "common/error.hpp"
#include "common/hash.hpp"

namespace wsground {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double n = out.row(r).norm();
    if (n > 1e-12) out.row(r) /= n;
  }
  return out;
}

std::vector<int> order_by_score(std::vector<int> rows, const Eigen::VectorXd& score) {
  std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) { return score[a] > score[b]; });
  return rows;
}

}  // namespace

std::vector<int> top_k_categories(const Eigen::RowVectorXd& logits, int k) {
  if (k < 1) throw ContractError("top-k requires k >= 1");
  auto order = descending_order(logits.transpose());
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  return order;
}

std::vector<bool> category_mask(const std::vector<int>& proposal_categories, const std::vector<int>& topk) {
  std::vector<bool> mask;
  mask.reserve(proposal_categories.size());
  for (int c : proposal_categories) mask.push_back(std::find(topk.begin(), topk.end(), c) != topk.end());
  return mask;
}

GroundingPrediction ground_from_embeddings(const GroundingInputs& in, int k, bool normalize) {
  const Eigen::Index m = in.point_features.rows();
  if (m == 0) throw ContractError("ground: scene has no proposals");
  if (in.point_residual.rows() != m) throw ContractError("ground: F^3D and R^3D row counts differ");
  if (in.query_logits.size() != in.category_residual.rows())
    throw ContractError("ground: query logits must have one entry per category");

  GroundingPrediction p;
  const Eigen::MatrixXd cls = in.point_residual * in.category_residual.transpose();
  for (Eigen::Index r = 0; r < m; ++r) {
    Eigen::Index best = 0;
    cls.row(r).maxCoeff(&best);
    p.proposal_categories.push_back(static_cast<int>(best));
  }
  p.topk_categories = top_k_categories(in.query_logits, k);
  p.mask = category_mask(p.proposal_categories, p.topk_categories);
  if (std::none_of(p.mask.begin(), p.mask.end(), [](bool b) { return b; })) {
    p.fallback = true;
    p.mask.assign(static_cast<std::size_t>(m), true);
  }

  const Eigen::VectorXd raw = normalize ? Eigen::VectorXd(normalized_rows(in.point_features) *
                                                          normalized_rows(in.query_features).transpose())
                                        : Eigen::VectorXd(in.point_features * in.query_features.transpose());
  std::vector<int> reserved, filtered;
  for (Eigen::Index r = 0; r < m; ++r) {
    const bool keep = p.mask[static_cast<std::size_t>(r)];
    p.scores.push_back(keep ? raw[r] : kNegInf);
    (keep ? reserved : filtered).push_back(static_cast<int>(r));
  }
  p.ranking = order_by_score(reserved, raw);
  const auto tail = order_by_score(filtered, raw);
  p.ranking.insert(p.ranking.end(), tail.begin(), tail.end());
  p.predicted_index = p.ranking.front();
  return p;
}

std::uint64_t inference_sampling_seed(const GroundingModel& model, const std::string& scene_id) {
  return mix_seed(mix_seed(model.config().encoder.seed, hash_string("inference")), hash_string(scene_id));
}

namespace {

struct SceneEncoding {
  EmbeddingSet f3d;
  EmbeddingSet r3d;
  EmbeddingSet rc;
};

SceneEncoding encode_scene(const Scene& scene, const GroundingModel& model, const TextEncoder& text) {
  if (scene.proposals.empty()) throw ContractError("ground: scene " + scene.scene_id + " has no proposals");
  SceneEncoding e;
  e.f3d = encode_proposals(model.params(), model.config().encoder, scene, scene.proposals,
                           inference_sampling_seed(model, scene.scene_id));
  e.r3d = adapt(e.f3d, model.params(), model.point_adapter()).residual;
  EmbeddingSet fc = text.encode_text(model.vocabulary().labels, Modality::text_category);
  fc.vectors = fc.vectors.cast<float>().cast<double>();
  e.rc = adapt(fc, model.params(), model.text_adapter()).residual;
  return e;
}

GroundingPrediction ground_encoded(const GroundingQuery& query, const Scene& scene, const GroundingModel& model,
                                   const TextEncoder& text, const SceneEncoding& e, int k) {
  EmbeddingSet fq = text.encode_text({query.text}, Modality::text_query);
  fq.vectors = fq.vectors.cast<float>().cast<double>();
  const auto rq = adapt(fq, model.params(), model.text_adapter()).residual;
  const auto iq = classify_query(rq, model.params(), GroundingModel::kQueryClassifier);

  GroundingInputs in{e.f3d.vectors, e.r3d.vectors, e.rc.vectors, iq.logits.row(0), fq.vectors.row(0)};
  auto p = ground_from_embeddings(in, k, model.config().normalize);
  p.scene_id = scene.scene_id;
  p.query_id = query.query_id;
  const auto& best = scene.proposals[static_cast<std::size_t>(p.predicted_index)];
  p.predicted_proposal_id = best.proposal_id;
  p.predicted_box = best.box3d;
  for (int r : p.ranking) p.ranked_proposal_ids.push_back(scene.proposals[static_cast<std::size_t>(r)].proposal_id);
  return p;
}

}  // namespace

std::vector<GroundingPrediction> ground_scene(const Scene& scene, const GroundingModel& model,
                                              const TextEncoder& text, int k) {
  if (k < 1) throw ContractError("ground: k must be >= 1");
  const auto e = encode_scene(scene, model, text);
  std::vector<GroundingPrediction> out;
  for (const auto& q : scene.queries) out.push_back(ground_encoded(q, scene, model, text, e, k));
  return out;
}

GroundingPrediction ground(const GroundingQuery& query, const Scene& scene, const GroundingModel& model,
                           const TextEncoder& text, int k) {
  if (k < 1) throw ContractError("ground: k must be >= 1");
  return ground_encoded(query, scene, model, text, encode_scene(scene, model, text), k);
}

nlohmann::json to_json(const GroundingPrediction& p) {
  nlohmann::json scores = nlohmann::json::array();
  for (double s : p.scores) scores.push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json(nullptr));
  const auto vec = [](const Eigen::Vector3d& v) { return std::vector<double>{v.x(), v.y(), v.z()}; };
  return {{"scene_id", p.scene_id},
          {"query_id", p.query_id},
          {"predicted_proposal_id", p.predicted_proposal_id},
          {"predicted_box", {{"min", vec(p.predicted_box.min)}, {"max", vec(p.predicted_box.max)}}},
          {"topk_categories", p.topk_categories},
          {"proposal_categories", p.proposal_categories},
          {"mask", p.mask},
          {"fallback", p.fallback},
          {"scores", scores},
          {"ranked_proposal_ids", p.ranked_proposal_ids}};
}

GroundingPrediction prediction_from_json(const nlohmann::json& j) {
  try {
    GroundingPrediction p;
    p.scene_id = j.at("scene_id").get<std::string>();
    p.query_id = j.at("query_id").get<std::string>();
    p.predicted_proposal_id = j.at("predicted_proposal_id").get<std::int64_t>();
    const auto mn = j.at("predicted_box").at("min").get<std::vector<double>>();
    const auto mx = j.at("predicted_box").at("max").get<std::vector<double>>();
    if (mn.size() != 3 || mx.size() != 3) throw LoadError("prediction box needs 3 coordinates");
    p.predicted_box.min = {mn[0], mn[1], mn[2]};
    p.predicted_box.max = {mx[0], mx[1], mx[2]};
    p.topk_categories = j.at("topk_categories").get<std::vector<int>>();
    p.proposal_categories = j.at("proposal_categories").get<std::vector<int>>();
    p.mask = j.at("mask").get<std::vector<bool>>();
    p.fallback = j.at("fallback").get<bool>();
    for (const auto& s : j.at("scores")) p.scores.push_back(s.is_null() ? kNegInf : s.get<double>());
    p.ranked_proposal_ids = j.at("ranked_proposal_ids").get<std::vector<std::int64_t>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed prediction record: ") + e.what());
  }
}

void write_prediction_file(const std::filesystem::path& path, const PredictionFile& file) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& p : file.predictions) records.push_back(to_json(p));
  const nlohmann::json j = {{"meta", file.meta}, {"predictions", records}, {"failures", file.failures}};
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write predictions " + path.string());
  out << j.dump(1) << '\n';
}

PredictionFile read_prediction_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("missing predictions file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw LoadError("unparseable predictions file " + path.string() + ": " + e.what());
  }
  PredictionFile f;
  if (!j.is_object() || !j.contains("predictions") || !j["predictions"].is_array())
    throw LoadError("predictions file " + path.string() + " lacks a predictions array");
  if (j.contains("meta")) f.meta = j["meta"];
  if (j.contains("failures")) f.failures = j["failures"];
  for (const auto& r : j["predictions"]) f.predictions.push_back(prediction_from_json(r));
  return f;
}

}  // namespace wsground

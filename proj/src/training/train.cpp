#include "training/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"

namespace wsground {

namespace {

Eigen::MatrixXd as_float32(const Eigen::MatrixXd& m) { return m.cast<float>().cast<double>(); }

std::string step_label(std::int64_t step, int epoch) {
  return "step " + std::to_string(step) + " (epoch " + std::to_string(epoch) + ")";
}

}  // namespace

std::vector<std::optional<Region2D>> compute_regions(const Scene& scene, ExtensionMode mode,
                                                     bool use_depth_visibility) {
  std::vector<std::optional<Region2D>> regions;
  regions.reserve(scene.proposals.size());
  for (const auto& p : scene.proposals) {
    regions.push_back(best_frame_region(p, scene, mode, use_depth_visibility));
    if (!regions.back() && !scene.frames.empty())
      log::warn("scene " + scene.scene_id + ": proposal " + std::to_string(p.proposal_id) +
                " is not visible in any frame");
  }
  return regions;
}

PreparedScene prepare_scene(std::shared_ptr<const Scene> scene, const FrozenProviders& providers,
                            ExtensionMode mode, bool use_depth_visibility) {
  auto regions = compute_regions(*scene, mode, use_depth_visibility);
  return prepare_scene(std::move(scene), providers, std::move(regions));
}

PreparedScene prepare_scene(std::shared_ptr<const Scene> scene, const FrozenProviders& providers,
                            std::vector<std::optional<Region2D>> regions) {
  if (regions.size() != scene->proposals.size())
    throw ContractError("prepare_scene: one region slot per proposal required");
  PreparedScene out;
  out.scene = scene;
  out.regions = std::move(regions);

  std::vector<int> candidates;
  std::vector<Region2D> present;
  for (std::size_t i = 0; i < out.regions.size(); ++i)
    if (out.regions[i]) {
      candidates.push_back(static_cast<int>(i));
      present.push_back(*out.regions[i]);
    }
  const int d = providers.text->dim();
  out.region_embeddings.resize(0, d);
  if (!present.empty()) {
    const auto enc = providers.image->encode_image_regions(scene->frames, present);
    std::vector<int> rows;
    for (std::size_t j = 0; j < present.size(); ++j) {
      if (!enc.errors[j].empty()) {
        log::warn("scene " + scene->scene_id + ": region of proposal " +
                  std::to_string(scene->proposals[static_cast<std::size_t>(candidates[j])].proposal_id) +
                  " not encoded: " + enc.errors[j]);
        continue;
      }
      rows.push_back(static_cast<int>(j));
      out.paired.push_back(candidates[j]);
    }
    out.region_embeddings.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r)
      out.region_embeddings.row(static_cast<Eigen::Index>(r)) = enc.embeddings.vectors.row(rows[r]);
    out.region_embeddings = as_float32(out.region_embeddings);
  }

  std::vector<std::string> texts;
  for (const auto& q : scene->queries) texts.push_back(q.text);
  out.query_embeddings = texts.empty() ? Eigen::MatrixXd(0, d)
                                       : as_float32(providers.text->encode_text(texts, Modality::text_query).vectors);
  return out;
}

Eigen::MatrixXd category_embeddings(const FrozenProviders& providers, const CategoryVocabulary& vocabulary) {
  return as_float32(providers.text->encode_text(vocabulary.labels, Modality::text_category).vectors);
}

std::uint64_t scene_sampling_seed(std::uint64_t seed, int epoch, const std::string& scene_id) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(epoch)), hash_string(scene_id));
}

LossTerms scene_losses(nn::Tape& tape, GroundingModel& model, const PreparedScene& prepared,
                       const nn::Var& category_residual, const LossWeights& weights, std::uint64_t sampling_seed) {
  auto& store = model.params();
  const auto& cfg = model.config();
  const Scene& scene = *prepared.scene;
  const nn::Var zero = tape.constant(nn::Matrix::Zero(1, 1));
  LossTerms terms{zero, zero, zero, zero, zero};

  const nn::Var f3d = encode_proposals(tape, store, cfg.encoder, scene, scene.proposals, sampling_seed);
  const auto a3d = adapt(tape, store, model.point_adapter(), f3d);

  if (!prepared.paired.empty() && (weights.lambda1 != 0.0 || weights.lambda2 != 0.0)) {
    const nn::Var f2d = tape.constant(prepared.region_embeddings);
    const auto a2d = adapt(tape, store, model.image_adapter(), f2d);
    if (weights.lambda1 != 0.0) {
      terms.contrastive_embed =
          contrastive_loss(f2d, nn::gather_rows(f3d, prepared.paired), weights.tau, cfg.normalize);
      terms.contrastive_adapted =
          contrastive_loss(a2d.adapted, nn::gather_rows(a3d.adapted, prepared.paired), weights.tau, cfg.normalize);
    }

    std::vector<int> rows, labels;
    for (std::size_t r = 0; r < prepared.paired.size(); ++r) {
      const auto& cat = scene.proposals[static_cast<std::size_t>(prepared.paired[r])].category_id;
      if (cat) {
        rows.push_back(static_cast<int>(r));
        labels.push_back(*cat);
      }
    }
    if (!rows.empty() && weights.lambda2 != 0.0)
      terms.cls_2d = classification_loss(
          classify_against_categories(nn::gather_rows(a2d.residual, rows), category_residual), labels);
  }

  std::vector<int> rows, labels;
  for (std::size_t i = 0; i < scene.proposals.size(); ++i)
    if (scene.proposals[i].category_id) {
      rows.push_back(static_cast<int>(i));
      labels.push_back(*scene.proposals[i].category_id);
    }
  if (!rows.empty() && weights.lambda3 != 0.0)
    terms.cls_3d =
        classification_loss(classify_against_categories(nn::gather_rows(a3d.residual, rows), category_residual), labels);

  if (!scene.queries.empty() && weights.lambda4 != 0.0) {
    const auto rq = adapt(tape, store, model.text_adapter(), tape.constant(prepared.query_embeddings));
    const nn::Var iq = classify_query(tape, store, GroundingModel::kQueryClassifier, rq.residual);
    std::vector<int> qlabels;
    for (const auto& q : scene.queries) qlabels.push_back(q.target_category_id);
    terms.cls_query = classification_loss(iq, qlabels);
  }
  return terms;
}

TrainResult train(std::span<const PreparedScene> scenes, const Eigen::MatrixXd& category_embeddings,
                  const TrainConfig& config, const FrozenProviders& providers, GroundingModel& model,
                  const TrainCallbacks& callbacks) {
  config.validate();
  if (scenes.empty()) throw ContractError("train: no scenes");
  if (category_embeddings.rows() != model.num_categories() || category_embeddings.cols() != model.dim())
    throw ContractError("train: category embeddings must be K x d");

  audit::TrainingScope scope;
  const std::uint64_t frozen = providers.checksum();
  nn::AdamOptions adam_options;
  adam_options.max_grad_norm = config.max_grad_norm;
  nn::Adam adam(adam_options);
  auto& store = model.params();
  const auto& w = config.loss_weights;

  TrainResult result;
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, 0x5eedULL + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const double lr_base = lr_at_epoch(config, epoch, LrGroup::base);
    const double lr_transformer = lr_at_epoch(config, epoch, LrGroup::transformer);
    double epoch_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size_scenes)) {
      ++step;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size_scenes));
      const double inv = 1.0 / static_cast<double>(end - start);
      store.zero_grad();
      nn::Tape tape;
      const nn::Var rc = adapt(tape, store, model.text_adapter(), tape.constant(category_embeddings)).residual;

      std::vector<nn::Var> totals;
      std::vector<double> weights;
      LossReport mean;
      for (std::size_t b = start; b < end; ++b) {
        const auto& prepared = scenes[order[b]];
        const auto terms = scene_losses(tape, model, prepared, rc, w,
                                        scene_sampling_seed(config.seed, epoch, prepared.scene->scene_id));
        LossReport r{terms.contrastive_embed.scalar(), terms.contrastive_adapted.scalar(), terms.cls_2d.scalar(),
                     terms.cls_3d.scalar(), terms.cls_query.scalar(), 0.0};
        try {
          r.total = total_loss(r, w);
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " at " + step_label(step, epoch) + ", scene " +
                             prepared.scene->scene_id);
        }
        totals.push_back(total_loss(terms, w));
        weights.push_back(inv);
        mean.contrastive_embed += inv * r.contrastive_embed;
        mean.contrastive_adapted += inv * r.contrastive_adapted;
        mean.cls_2d += inv * r.cls_2d;
        mean.cls_3d += inv * r.cls_3d;
        mean.cls_query += inv * r.cls_query;
        epoch_sum += r.total;
      }
      const nn::Var batch = nn::weighted_sum(totals, weights);
      mean.total = batch.scalar();
      tape.backward(batch);
      try {
        adam.step(store, lr_base, lr_transformer);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at " + step_label(step, epoch));
      }

      TrainLogRow row{step, epoch, mean, lr_base};
      result.log.push_back(row);
      if (callbacks.on_step) callbacks.on_step(row);
    }
    result.epoch_mean_total.push_back(epoch_sum / static_cast<double>(scenes.size()));
    if (providers.checksum() != frozen)
      throw FrozenViolation("frozen provider parameters changed during epoch " + std::to_string(epoch));
    if (callbacks.on_epoch) callbacks.on_epoch(epoch, model);
  }
  if (providers.checksum() != frozen) throw FrozenViolation("frozen provider parameters changed during training");
  return result;
}

std::string train_log_header() { return "step,epoch,L_e,L_a,L_cls_2d,L_cls_3d,L_cls_q,total,lr"; }

std::string train_log_line(const TrainLogRow& row) {
  char buf[320];
  const auto& l = row.losses;
  std::snprintf(buf, sizeof buf, "%lld,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", static_cast<long long>(row.step),
                row.epoch, l.contrastive_embed, l.contrastive_adapted, l.cls_2d, l.cls_3d, l.cls_query, l.total,
                row.lr);
  return buf;
}

}  // namespace wsground

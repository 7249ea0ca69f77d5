#include "encoders/point_encoder.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"
#include "nn/layers.hpp"

namespace wsground {

namespace {
const std::string kPrefix = "encoder3d";

std::string sa_prefix(std::size_t level) { return kPrefix + ".backbone.sa" + std::to_string(level); }
std::string layer_prefix(int layer) { return kPrefix + ".transformer." + std::to_string(layer); }
}  // namespace

std::string_view to_string(BackboneKind kind) {
  return kind == BackboneKind::set_abstraction ? "set_abstraction" : "shared_mlp";
}

BackboneKind parse_backbone_kind(std::string_view text) {
  if (text == "set_abstraction") return BackboneKind::set_abstraction;
  if (text == "shared_mlp") return BackboneKind::shared_mlp;
  throw ConfigError("encoder.backbone must be 'set_abstraction' or 'shared_mlp', got '" + std::string(text) + "'");
}

void EncoderConfig::validate() const {
  if (d < 2) throw ConfigError("encoder.d must be >= 2");
  if (point_sample_count < 1) throw ConfigError("encoder.point_sample_count must be >= 1");
  if (transformer_layers < 0) throw ConfigError("encoder.transformer_layers must be >= 0");
  if (transformer_heads < 1 || d % transformer_heads != 0)
    throw ConfigError("encoder.transformer_heads must be >= 1 and divide encoder.d");
  if (transformer_ffn < 0) throw ConfigError("encoder.transformer_ffn must be >= 0");
  auto check_widths = [](const std::vector<int>& widths, const char* field) {
    if (widths.empty()) throw ConfigError(std::string(field) + " must list at least one width");
    for (int w : widths)
      if (w < 1) throw ConfigError(std::string(field) + " widths must be >= 1");
  };
  if (backbone == BackboneKind::shared_mlp) {
    check_widths(shared_mlp, "encoder.shared_mlp");
  } else {
    for (const auto& level : set_abstraction) {
      if (level.centroids < 1 || level.neighbors < 1 || !(level.radius > 0.0))
        throw ConfigError("encoder.set_abstraction levels need centroids >= 1, neighbors >= 1, radius > 0");
      check_widths(level.mlp, "encoder.set_abstraction.mlp");
    }
    check_widths(global_mlp, "encoder.global_mlp");
  }
}

std::vector<std::uint32_t> sample_point_positions(std::size_t available, int count, std::uint64_t seed) {
  if (available == 0) throw ContractError("cannot sample from a proposal with no points");
  Rng rng(seed);
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(count));
  if (available >= static_cast<std::size_t>(count)) {
    std::vector<std::uint32_t> pool(available);
    std::iota(pool.begin(), pool.end(), 0u);
    for (int i = 0; i < count; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng.below(available - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      out.push_back(pool[static_cast<std::size_t>(i)]);
    }
  } else {
    for (int i = 0; i < count; ++i) out.push_back(static_cast<std::uint32_t>(rng.below(available)));
  }
  return out;
}

Eigen::MatrixXd proposal_input(const Scene& scene, const Proposal& proposal, int count, std::uint64_t seed) {
  const auto positions = sample_point_positions(proposal.point_indices.size(), count, seed);
  const Eigen::Vector3d center = proposal.box3d.center();
  const double diag = proposal.box3d.diagonal();
  const double inv_scale = diag > 0.0 ? 1.0 / diag : 1.0;
  Eigen::MatrixXd input(count, 6);
  for (int i = 0; i < count; ++i) {
    const auto row = scene.points.row(proposal.point_indices[positions[static_cast<std::size_t>(i)]]);
    for (int a = 0; a < 3; ++a) input(i, a) = (static_cast<double>(row[a]) - center[a]) * inv_scale;
    for (int a = 3; a < 6; ++a) input(i, a) = static_cast<double>(row[a]);
  }
  return input;
}

std::vector<int> farthest_point_sample(const Eigen::MatrixX3d& xyz, int count) {
  const auto n = static_cast<int>(xyz.rows());
  count = std::min(count, n);
  std::vector<int> picked;
  if (count <= 0) return picked;
  picked.push_back(0);
  Eigen::VectorXd dist = (xyz.rowwise() - xyz.row(0)).rowwise().squaredNorm();
  while (static_cast<int>(picked.size()) < count) {
    Eigen::Index next = 0;
    dist.maxCoeff(&next);  // first maximal index
    picked.push_back(static_cast<int>(next));
    dist = dist.cwiseMin((xyz.rowwise() - xyz.row(next)).rowwise().squaredNorm());
  }
  return picked;
}

std::vector<int> ball_query(const Eigen::MatrixX3d& xyz, const std::vector<int>& centroids, double radius,
                            int neighbors) {
  const double r2 = radius * radius;
  std::vector<int> out;
  out.reserve(centroids.size() * static_cast<std::size_t>(neighbors));
  for (int c : centroids) {
    const std::size_t begin = out.size();
    for (Eigen::Index i = 0; i < xyz.rows() && static_cast<int>(out.size() - begin) < neighbors; ++i)
      if ((xyz.row(i) - xyz.row(c)).squaredNorm() <= r2) out.push_back(static_cast<int>(i));
    if (out.size() == begin) out.push_back(c);
    const int first = out[begin];
    while (static_cast<int>(out.size() - begin) < neighbors) out.push_back(first);
  }
  return out;
}

void init_point_encoder(nn::ParameterStore& store, const EncoderConfig& config) {
  config.validate();
  const auto seed = mix_seed(config.seed, 0x3d3dULL);
  int width = 0;
  if (config.backbone == BackboneKind::shared_mlp) {
    nn::add_mlp(store, kPrefix + ".backbone.mlp", 6, config.shared_mlp, nn::ParamGroup::base, seed);
    width = config.shared_mlp.back();
  } else {
    int in = 3;  // rgb features at the first level
    for (std::size_t l = 0; l < config.set_abstraction.size(); ++l) {
      const auto& level = config.set_abstraction[l];
      nn::add_mlp(store, sa_prefix(l), in + 3, level.mlp, nn::ParamGroup::base, seed);
      in = level.mlp.back();
    }
    nn::add_mlp(store, kPrefix + ".backbone.global", in + 3, config.global_mlp, nn::ParamGroup::base, seed);
    width = config.global_mlp.back();
  }
  nn::add_linear(store, kPrefix + ".token", width, config.d, nn::ParamGroup::base, seed);
  for (int l = 0; l < config.transformer_layers; ++l) {
    const auto p = layer_prefix(l);
    for (const char* name : {".q", ".k", ".v", ".o"})
      nn::add_linear(store, p + name, config.d, config.d, nn::ParamGroup::transformer, seed);
    nn::add_layer_norm(store, p + ".ln1", config.d, nn::ParamGroup::transformer);
    nn::add_linear(store, p + ".ffn1", config.d, config.ffn_width(), nn::ParamGroup::transformer, seed);
    nn::add_linear(store, p + ".ffn2", config.ffn_width(), config.d, nn::ParamGroup::transformer, seed);
    nn::add_layer_norm(store, p + ".ln2", config.d, nn::ParamGroup::transformer);
  }
  nn::add_linear(store, kPrefix + ".out", config.d, config.d, nn::ParamGroup::base, seed);
}

namespace {

nn::Var set_abstraction_token(nn::Tape& tape, nn::ParameterStore& store, const EncoderConfig& config,
                              const Eigen::MatrixXd& input) {
  Eigen::MatrixX3d xyz = input.leftCols<3>();
  nn::Var features = tape.constant(input.rightCols<3>());
  for (std::size_t l = 0; l < config.set_abstraction.size(); ++l) {
    const auto& level = config.set_abstraction[l];
    const auto centroids = farthest_point_sample(xyz, level.centroids);
    const auto groups = ball_query(xyz, centroids, level.radius, level.neighbors);
    nn::Matrix offsets(static_cast<Eigen::Index>(groups.size()), 3);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const int c = centroids[g / static_cast<std::size_t>(level.neighbors)];
      offsets.row(static_cast<Eigen::Index>(g)) = (xyz.row(groups[g]) - xyz.row(c)) / level.radius;
    }
    const nn::Var parts[] = {nn::gather_rows(features, groups), tape.constant(std::move(offsets))};
    nn::Var h = nn::mlp_relu(tape, store, sa_prefix(l), nn::concat_cols(parts), level.mlp.size());
    features = nn::segment_max(h, level.neighbors);
    Eigen::MatrixX3d next(static_cast<Eigen::Index>(centroids.size()), 3);
    for (std::size_t i = 0; i < centroids.size(); ++i) next.row(static_cast<Eigen::Index>(i)) = xyz.row(centroids[i]);
    xyz = std::move(next);
  }
  const nn::Var parts[] = {features, tape.constant(xyz)};
  nn::Var h = nn::mlp_relu(tape, store, kPrefix + ".backbone.global", nn::concat_cols(parts), config.global_mlp.size());
  return nn::segment_max(h, h.rows());
}

nn::Var transformer_layer(nn::Tape& tape, nn::ParameterStore& store, const EncoderConfig& config, int layer,
                          const nn::Var& x) {
  const auto p = layer_prefix(layer);
  const nn::Var q = nn::linear(tape, store, p + ".q", x);
  const nn::Var k = nn::linear(tape, store, p + ".k", x);
  const nn::Var v = nn::linear(tape, store, p + ".v", x);
  const Eigen::Index head_dim = config.d / config.transformer_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<nn::Var> heads;
  for (int h = 0; h < config.transformer_heads; ++h) {
    const Eigen::Index start = h * head_dim;
    const nn::Var scores =
        nn::scale(nn::matmul_bt(nn::slice_cols(q, start, head_dim), nn::slice_cols(k, start, head_dim)), inv_sqrt);
    heads.push_back(nn::matmul(nn::softmax_rows(scores), nn::slice_cols(v, start, head_dim)));
  }
  const nn::Var attended = nn::linear(tape, store, p + ".o", nn::concat_cols(heads));
  const nn::Var x1 = nn::layer_norm(tape, store, p + ".ln1", nn::add(x, attended));
  const nn::Var ffn =
      nn::linear(tape, store, p + ".ffn2", nn::relu(nn::linear(tape, store, p + ".ffn1", x1)));
  return nn::layer_norm(tape, store, p + ".ln2", nn::add(x1, ffn));
}

}  // namespace

nn::Var encode_proposals(nn::Tape& tape, nn::ParameterStore& store, const EncoderConfig& config,
                         const Scene& scene, std::span<const Proposal> proposals, std::uint64_t sampling_seed) {
  if (proposals.empty()) throw ContractError("encode_proposals needs at least one proposal");
  std::vector<nn::Var> tokens;
  tokens.reserve(proposals.size());
  for (const auto& proposal : proposals) {
    const auto seed = mix_seed(sampling_seed, static_cast<std::uint64_t>(proposal.proposal_id));
    const Eigen::MatrixXd input = proposal_input(scene, proposal, config.point_sample_count, seed);
    nn::Var pooled;
    if (config.backbone == BackboneKind::shared_mlp) {
      const nn::Var h =
          nn::mlp_relu(tape, store, kPrefix + ".backbone.mlp", tape.constant(input), config.shared_mlp.size());
      pooled = nn::segment_max(h, h.rows());
    } else {
      pooled = set_abstraction_token(tape, store, config, input);
    }
    tokens.push_back(nn::linear(tape, store, kPrefix + ".token", pooled));
  }
  nn::Var x = nn::concat_rows(tokens);
  for (int l = 0; l < config.transformer_layers; ++l) x = transformer_layer(tape, store, config, l, x);
  return nn::linear(tape, store, kPrefix + ".out", x);
}

EmbeddingSet encode_proposals(const nn::ParameterStore& store, const EncoderConfig& config, const Scene& scene,
                              std::span<const Proposal> proposals, std::uint64_t sampling_seed) {
  nn::Tape tape;
  // Forward only: no backward pass runs on this tape, so parameters are never written.
  auto& mutable_store = const_cast<nn::ParameterStore&>(store);
  EmbeddingSet out;
  out.modality = Modality::point_proposal;
  out.vectors = encode_proposals(tape, mutable_store, config, scene, proposals, sampling_seed).value();
  return out;
}

}  // namespace wsground

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "encoders/embedding.hpp"
#include "encoders/providers.hpp"
#include "nn/parameters.hpp"
#include "nn/tape.hpp"
#include "scene/scene.hpp"

namespace wsground {

enum class BackboneKind { set_abstraction, shared_mlp };

std::string_view to_string(BackboneKind kind);
BackboneKind parse_backbone_kind(std::string_view text);

struct SetAbstractionLevel {
  int centroids = 128;
  double radius = 0.15;  // in normalized proposal coordinates
  int neighbors = 16;
  std::vector<int> mlp = {32, 64};
};

struct EncoderConfig {
  ProviderBackend backend = ProviderBackend::toy;
  int d = 512;
  int point_sample_count = 1024;
  int transformer_layers = 3;
  int transformer_heads = 8;
  int transformer_ffn = 0;  // 0 means 2*d
  std::uint64_t seed = 0;
  BackboneKind backbone = BackboneKind::set_abstraction;
  std::vector<int> shared_mlp = {64, 128};
  std::vector<SetAbstractionLevel> set_abstraction = {{128, 0.15, 16, {32, 64}}, {32, 0.3, 16, {64, 128}}};
  std::vector<int> global_mlp = {128, 256};

  int ffn_width() const { return transformer_ffn > 0 ? transformer_ffn : 2 * d; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Positions (into a proposal's point list) of the sampled points: without
/// replacement when available >= count, uniform with replacement otherwise.
std::vector<std::uint32_t> sample_point_positions(std::size_t available, int count, std::uint64_t seed);

/// count x 6 network input: xyz centered on the box centroid and divided by
/// the box diagonal, followed by rgb.
Eigen::MatrixXd proposal_input(const Scene& scene, const Proposal& proposal, int count, std::uint64_t seed);

/// Farthest point sampling from row 0; ties resolve to the lowest index.
std::vector<int> farthest_point_sample(const Eigen::MatrixX3d& xyz, int count);
/// For each centroid the first `neighbors` points within radius, in index
/// order, padded with the first hit.
std::vector<int> ball_query(const Eigen::MatrixX3d& xyz, const std::vector<int>& centroids, double radius,
                            int neighbors);

void init_point_encoder(nn::ParameterStore& store, const EncoderConfig& config);

// Per-proposal backbone token followed by self-attention across all proposal
// tokens of the scene (no positional encoding), then an output projection.
// Returns M x d and records every op on the tape.
nn::Var encode_proposals(nn::Tape& tape, nn::ParameterStore& store, const EncoderConfig& config,
                         const Scene& scene, std::span<const Proposal> proposals, std::uint64_t sampling_seed);

EmbeddingSet encode_proposals(const nn::ParameterStore& store, const EncoderConfig& config, const Scene& scene,
                              std::span<const Proposal> proposals, std::uint64_t sampling_seed);

}  // namespace wsground

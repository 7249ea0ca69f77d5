#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string_view>

namespace wsground {

enum class Modality { text_query = 0, text_category = 1, image_region = 2, point_proposal = 3 };

std::string_view to_string(Modality modality);

// n x d embedding rows of one modality.
struct EmbeddingSet {
  Modality modality = Modality::text_query;
  Eigen::MatrixXd vectors;

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
  bool finite() const { return vectors.allFinite(); }
};

// Cache layout: "WSGE", uint32 version, uint32 modality, uint64 n, uint64 d,
// then n*d little-endian float32, row-major.
void write_embedding_cache(const std::filesystem::path& path, const EmbeddingSet& set);
EmbeddingSet read_embedding_cache(const std::filesystem::path& path);

}  // namespace wsground

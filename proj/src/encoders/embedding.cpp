#include "encoders/embedding.hpp"

#include <array>
#include <fstream>
#include <vector>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace wsground {

namespace {
constexpr std::array<char, 4> kMagic = {'W', 'S', 'G', 'E'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string_view to_string(Modality modality) {
  switch (modality) {
    case Modality::text_query: return "text_query";
    case Modality::text_category: return "text_category";
    case Modality::image_region: return "image_region";
    case Modality::point_proposal: return "point_proposal";
  }
  return "unknown";
}

void write_embedding_cache(const std::filesystem::path& path, const EmbeddingSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write embedding cache " + path.string());
  out.write(kMagic.data(), kMagic.size());
  binary::put<std::uint32_t>(out, kVersion);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(set.modality));
  binary::put<std::uint64_t>(out, static_cast<std::uint64_t>(set.size()));
  binary::put<std::uint64_t>(out, static_cast<std::uint64_t>(set.dim()));
  for (Eigen::Index r = 0; r < set.size(); ++r)
    for (Eigen::Index c = 0; c < set.dim(); ++c) binary::put<float>(out, static_cast<float>(set.vectors(r, c)));
}

EmbeddingSet read_embedding_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("missing embedding cache " + path.string());
  std::array<char, 4> magic{};
  binary::get_bytes(in, magic.data(), magic.size(), "embedding cache header " + path.string());
  if (magic != kMagic) throw LoadError("not an embedding cache: " + path.string());
  if (binary::get<std::uint32_t>(in, path.string()) != kVersion)
    throw LoadError("unsupported embedding cache version in " + path.string());
  const auto modality = binary::get<std::uint32_t>(in, path.string());
  if (modality > 3) throw LoadError("bad modality tag in " + path.string());
  const auto n = binary::get<std::uint64_t>(in, path.string());
  const auto d = binary::get<std::uint64_t>(in, path.string());
  std::vector<float> raw(n * d);
  binary::get_bytes(in, raw.data(), raw.size() * sizeof(float), "embedding payload " + path.string());
  EmbeddingSet set;
  set.modality = static_cast<Modality>(modality);
  set.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      set.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = raw[r * d + c];
  return set;
}

}  // namespace wsground

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "encoders/embedding.hpp"
#include "projection/projection.hpp"
#include "scene/scene.hpp"

namespace wsground {

enum class ProviderBackend { toy, vlm };

std::string_view to_string(ProviderBackend backend);
ProviderBackend parse_provider_backend(std::string_view text);

// Frozen text encoder. Implementations are immutable after construction.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual int dim() const = 0;
  virtual EmbeddingSet encode_text(const std::vector<std::string>& texts,
                                   Modality modality = Modality::text_query) const = 0;
  /// Digest of every value that determines the encoder's output.
  virtual std::uint64_t parameter_checksum() const = 0;
};

struct RegionEncoding {
  EmbeddingSet embeddings;          // one row per input region; failed rows are zero
  std::vector<std::string> errors;  // empty string = encoded
};

// Frozen image-region encoder.
class ImageEncoder {
 public:
  virtual ~ImageEncoder() = default;
  virtual int dim() const = 0;
  virtual RegionEncoding encode_image_regions(std::span<const Frame> frames,
                                              const std::vector<Region2D>& regions) const = 0;
  virtual std::uint64_t parameter_checksum() const = 0;
};

// Deterministic stand-in for a vision-language model. Category label c maps
// to the basis vector e_c; a sentence maps to the weighted sum of the labels
// it mentions (first mention 1.0, later mentions 0.3); every string carries a
// hash-seeded perturbation of norm kToyPerturbation. Requires d >= K.
class ToyTextEncoder final : public TextEncoder {
 public:
  static constexpr double kToyPerturbation = 0.04;
  static constexpr double kSecondaryMentionWeight = 0.3;

  ToyTextEncoder(std::vector<std::string> labels, int d, std::uint64_t seed);

  int dim() const override { return d_; }
  EmbeddingSet encode_text(const std::vector<std::string>& texts, Modality modality) const override;
  std::uint64_t parameter_checksum() const override;

  Eigen::VectorXd encode_one(const std::string& text) const;
  const std::vector<std::string>& labels() const { return labels_; }
  /// Categories mentioned in text, in order of first appearance.
  std::vector<int> mentioned_categories(const std::string& text) const;

 private:
  std::vector<std::string> labels_;
  int d_;
  std::uint64_t seed_;
};

// Reads the crop, assigns it the category whose palette color covers the
// most pixels, and returns that label's toy text embedding plus a
// region-seeded perturbation. Crops showing no palette color map to a
// seeded "background" vector.
class ToyImageEncoder final : public ImageEncoder {
 public:
  static constexpr double kPaletteTolerance = 0.25;

  ToyImageEncoder(std::shared_ptr<const ToyTextEncoder> text, int num_categories, std::uint64_t seed);

  int dim() const override { return text_->dim(); }
  RegionEncoding encode_image_regions(std::span<const Frame> frames,
                                      const std::vector<Region2D>& regions) const override;
  std::uint64_t parameter_checksum() const override;

  /// Category with the most palette-colored pixels in rect; nullopt if none.
  std::optional<int> dominant_category(const Image& image, const Rect& rect) const;

 private:
  std::shared_ptr<const ToyTextEncoder> text_;
  int num_categories_;
  std::uint64_t seed_;
};

struct FrozenProviders {
  std::shared_ptr<const TextEncoder> text;
  std::shared_ptr<const ImageEncoder> image;

  std::uint64_t checksum() const;
};

/// Throws BackendError when the backend cannot be brought up; never falls back.
FrozenProviders make_frozen_providers(ProviderBackend backend, const CategoryVocabulary& vocabulary, int d,
                                      std::uint64_t seed);

}  // namespace wsground

#include "encoders/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"

namespace wsground {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

Eigen::VectorXd seeded_direction(int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  const double n = v.norm();
  return n > 0.0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Unit(d, 0);
}

constexpr std::uint64_t kPerturbationTag = 0x70657274ULL;
constexpr std::uint64_t kUnknownTextTag = 0x756e6b6eULL;
constexpr std::uint64_t kRegionTag = 0x7265676eULL;
constexpr std::uint64_t kBackgroundTag = 0x626b6764ULL;

}  // namespace

std::string_view to_string(ProviderBackend backend) { return backend == ProviderBackend::toy ? "toy" : "vlm"; }

ProviderBackend parse_provider_backend(std::string_view text) {
  if (text == "toy") return ProviderBackend::toy;
  if (text == "vlm") return ProviderBackend::vlm;
  throw ConfigError("backend must be 'toy' or 'vlm', got '" + std::string(text) + "'");
}

ToyTextEncoder::ToyTextEncoder(std::vector<std::string> labels, int d, std::uint64_t seed)
    : labels_(std::move(labels)), d_(d), seed_(seed) {
  if (d_ < 2) throw BackendError("toy text backend needs d >= 2");
  if (static_cast<int>(labels_.size()) > d_)
    throw BackendError("toy text backend needs d >= number of categories (" + std::to_string(labels_.size()) +
                       " > " + std::to_string(d_) + ")");
}

std::vector<int> ToyTextEncoder::mentioned_categories(const std::string& text) const {
  const std::string hay = lowercase(text);
  struct Hit {
    std::size_t pos, len;
    int cat;
  };
  std::vector<Hit> hits;
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    const std::string needle = lowercase(labels_[c]);
    if (needle.empty()) continue;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
      const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
      const std::size_t end = pos + needle.size();
      const bool right_ok = end == hay.size() || !is_word_char(hay[end]);
      if (left_ok && right_ok) hits.push_back({pos, needle.size(), static_cast<int>(c)});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.pos != b.pos ? a.pos < b.pos : a.len > b.len;
  });
  std::vector<int> cats;
  std::size_t covered_until = 0;
  for (const auto& h : hits) {
    if (h.pos < covered_until) continue;
    covered_until = h.pos + h.len;
    if (std::find(cats.begin(), cats.end(), h.cat) == cats.end()) cats.push_back(h.cat);
  }
  return cats;
}

Eigen::VectorXd ToyTextEncoder::encode_one(const std::string& text) const {
  const std::uint64_t h = hash_string(text);
  const auto cats = mentioned_categories(text);
  if (cats.empty()) return seeded_direction(d_, mix_seed(seed_ ^ kUnknownTextTag, h));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d_);
  for (std::size_t i = 0; i < cats.size(); ++i) v[cats[i]] += i == 0 ? 1.0 : kSecondaryMentionWeight;
  v += kToyPerturbation * seeded_direction(d_, mix_seed(seed_ ^ kPerturbationTag, h));
  return v;
}

EmbeddingSet ToyTextEncoder::encode_text(const std::vector<std::string>& texts, Modality modality) const {
  EmbeddingSet out;
  out.modality = modality;
  out.vectors.resize(static_cast<Eigen::Index>(texts.size()), d_);
  for (std::size_t i = 0; i < texts.size(); ++i)
    out.vectors.row(static_cast<Eigen::Index>(i)) = encode_one(texts[i]).transpose();
  return out;
}

std::uint64_t ToyTextEncoder::parameter_checksum() const {
  Fnv1a h;
  h.str("toy-text").i64(d_).u64(seed_).f64(kToyPerturbation).f64(kSecondaryMentionWeight);
  for (const auto& l : labels_) h.str(l);
  return h.digest();
}

ToyImageEncoder::ToyImageEncoder(std::shared_ptr<const ToyTextEncoder> text, int num_categories,
                                 std::uint64_t seed)
    : text_(std::move(text)), num_categories_(num_categories), seed_(seed) {
  if (!text_) throw BackendError("toy image backend needs a toy text backend");
}

std::optional<int> ToyImageEncoder::dominant_category(const Image& image, const Rect& rect) const {
  const int x0 = std::max(0, static_cast<int>(std::floor(rect.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(rect.y)));
  const int x1 = std::min(image.width, static_cast<int>(std::ceil(rect.x + rect.w)));
  const int y1 = std::min(image.height, static_cast<int>(std::ceil(rect.y + rect.h)));
  std::vector<Eigen::Vector3d> palette;
  for (int c = 0; c < num_categories_; ++c) palette.push_back(category_palette_color(c, num_categories_));
  std::vector<int> votes(static_cast<std::size_t>(num_categories_), 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const auto* px = image.pixel(x, y);
      const Eigen::Vector3d rgb(px[0] / 255.0, px[1] / 255.0, px[2] / 255.0);
      int best = -1;
      double best_dist = kPaletteTolerance;
      for (int c = 0; c < num_categories_; ++c) {
        const double dist = (rgb - palette[static_cast<std::size_t>(c)]).norm();
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      if (best >= 0) ++votes[static_cast<std::size_t>(best)];
    }
  const auto it = std::max_element(votes.begin(), votes.end());
  if (it == votes.end() || *it == 0) return std::nullopt;
  return static_cast<int>(it - votes.begin());
}

RegionEncoding ToyImageEncoder::encode_image_regions(std::span<const Frame> frames,
                                                     const std::vector<Region2D>& regions) const {
  RegionEncoding out;
  out.embeddings.modality = Modality::image_region;
  out.embeddings.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(regions.size()), dim());
  out.errors.assign(regions.size(), {});
  const auto category_vectors = text_->encode_text(text_->labels(), Modality::text_category);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& region = regions[i];
    const auto frame = std::find_if(frames.begin(), frames.end(),
                                    [&](const Frame& f) { return f.frame_id == region.frame_id; });
    if (frame == frames.end()) {
      out.errors[i] = "unknown frame " + std::to_string(region.frame_id);
      continue;
    }
    const Rect r = clamp_rect(region.rect, frame->width(), frame->height());
    if (!(r.w > 0.0) || !(r.h > 0.0)) {
      out.errors[i] = "degenerate region rect in frame " + std::to_string(region.frame_id);
      continue;
    }
    const std::uint64_t region_hash =
        Fnv1a().i64(region.frame_id).f64(r.x).f64(r.y).f64(r.w).f64(r.h).digest();
    Eigen::VectorXd v;
    if (auto cat = dominant_category(frame->image, r)) {
      v = category_vectors.vectors.row(*cat).transpose();
      v += ToyTextEncoder::kToyPerturbation * seeded_direction(dim(), mix_seed(seed_ ^ kRegionTag, region_hash));
    } else {
      v = seeded_direction(dim(), mix_seed(seed_ ^ kBackgroundTag, region_hash));
    }
    out.embeddings.vectors.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return out;
}

std::uint64_t ToyImageEncoder::parameter_checksum() const {
  return Fnv1a()
      .str("toy-image")
      .i64(num_categories_)
      .u64(seed_)
      .f64(kPaletteTolerance)
      .u64(text_->parameter_checksum())
      .digest();
}

std::uint64_t FrozenProviders::checksum() const {
  return Fnv1a().u64(text ? text->parameter_checksum() : 0).u64(image ? image->parameter_checksum() : 0).digest();
}

FrozenProviders make_frozen_providers(ProviderBackend backend, const CategoryVocabulary& vocabulary, int d,
                                      std::uint64_t seed) {
  if (backend == ProviderBackend::vlm)
    throw BackendError(
        "vlm backend unavailable: this build links no vision-language runtime; "
        "use backend 'toy' or plug a TextEncoder/ImageEncoder implementation into the library");
  auto text = std::make_shared<const ToyTextEncoder>(vocabulary.labels, d, seed);
  auto image = std::make_shared<const ToyImageEncoder>(text, vocabulary.size(), seed);
  return {text, image};
}

}  // namespace wsground

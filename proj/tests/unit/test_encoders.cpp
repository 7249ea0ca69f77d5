#include <doctest.h>

#include <algorithm>
#include <set>

#include "encoders/point_encoder.hpp"
#include "encoders/providers.hpp"
#include "helpers.hpp"
#include "projection/projection.hpp"

using namespace wsground;

namespace {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

}  // namespace

TEST_CASE("toy text encoder maps a label near its basis vector") {
  const std::vector<std::string> labels{"bed", "chair", "table"};
  ToyTextEncoder text(labels, 8, 3);
  const Eigen::VectorXd v = text.encode_one("chair");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(8);
  e[1] = 1.0;
  CHECK((v - e).norm() <= 0.05);
  CHECK(text.encode_one("chair") == v);
  const auto set = text.encode_text(labels, Modality::text_category);
  CHECK(set.size() == 3);
  CHECK(set.dim() == 8);
  CHECK(set.modality == Modality::text_category);
}

TEST_CASE("toy text encoder needs room for every label") {
  CHECK_THROWS(ToyTextEncoder({"a", "b", "c"}, 2, 0));
}

TEST_CASE("mentioned categories come in order of appearance") {
  ToyTextEncoder text({"bed", "chair", "table"}, 4, 0);
  CHECK(text.mentioned_categories("the chair near the bed") == std::vector<int>{1, 0});
}

TEST_CASE("toy region encoding lands near the label embedding") {
  const Scene s = generate_synthetic_scene(9, 5, 5, 3);
  const auto providers = make_frozen_providers(ProviderBackend::toy, s.categories, 16, 1);
  std::vector<Region2D> regions;
  std::vector<int> cats;
  for (const auto& p : s.proposals) {
    if (auto r = best_frame_region(p, s, ExtensionMode::boundary_extended)) {
      regions.push_back(*r);
      cats.push_back(*p.category_id);
    }
  }
  REQUIRE(!regions.empty());
  const auto enc = providers.image->encode_image_regions(s.frames, regions);
  CHECK(enc.embeddings.size() == static_cast<Eigen::Index>(regions.size()));
  for (std::size_t i = 0; i < regions.size(); ++i) {
    CHECK(enc.errors[i].empty());
    const auto t = providers.text->encode_text({s.categories.labels[cats[i]]}, Modality::text_category);
    CHECK(cosine(enc.embeddings.vectors.row(i).transpose(), t.vectors.row(0).transpose()) >= 0.99);
  }
  CHECK(providers.image->encode_image_regions(s.frames, {}).embeddings.size() == 0);
}

TEST_CASE("degenerate region yields a per-region error") {
  const Scene s = generate_synthetic_scene(9, 2, 3, 1);
  const auto providers = make_frozen_providers(ProviderBackend::toy, s.categories, 8, 1);
  Region2D bad{s.frames[0].frame_id, {5, 5, 0, 0}, 0};
  const auto enc = providers.image->encode_image_regions(s.frames, {bad});
  REQUIRE(enc.errors.size() == 1);
  CHECK_FALSE(enc.errors[0].empty());
}

TEST_CASE("unavailable backend fails at initialization") {
  CategoryVocabulary v{{"a", "b"}};
  CHECK_THROWS_AS(make_frozen_providers(ProviderBackend::vlm, v, 8, 0), BackendError);
}

TEST_CASE("point sampling contracts") {
  const auto big = sample_point_positions(2000, 1024, 1);
  CHECK(big.size() == 1024);
  CHECK(std::set<std::uint32_t>(big.begin(), big.end()).size() == 1024);
  CHECK(std::all_of(big.begin(), big.end(), [](auto i) { return i < 2000; }));

  const auto small = sample_point_positions(500, 1024, 1);
  CHECK(small.size() == 1024);
  CHECK(std::all_of(small.begin(), small.end(), [](auto i) { return i < 500; }));
  CHECK(sample_point_positions(500, 1024, 1) == small);
}

TEST_CASE("farthest point sampling and ball query") {
  Eigen::MatrixX3d xyz(4, 3);
  xyz << 0, 0, 0, 1, 0, 0, 5, 0, 0, 0.5, 0, 0;
  CHECK(farthest_point_sample(xyz, 2) == std::vector<int>{0, 2});
  const auto nb = ball_query(xyz, {0}, 0.6, 3);
  CHECK(nb == std::vector<int>{0, 3, 0});
}

TEST_CASE("proposal encoder is permutation equivariant") {
  auto cfg = testing::small_run_config().model.encoder;
  for (auto backbone : {BackboneKind::shared_mlp, BackboneKind::set_abstraction}) {
    cfg.backbone = backbone;
    cfg.set_abstraction = {{8, 0.3, 4, {16}}};
    cfg.global_mlp = {16};
    nn::ParameterStore store;
    init_point_encoder(store, cfg);
    const Scene s = generate_synthetic_scene(4, 3, 3, 1);
    const auto fwd = encode_proposals(store, cfg, s, s.proposals, 77);
    CHECK(fwd.size() == 3);
    CHECK(fwd.dim() == cfg.d);
    const std::vector<Proposal> permuted{s.proposals[2], s.proposals[0], s.proposals[1]};
    const auto perm = encode_proposals(store, cfg, s, permuted, 77);
    CHECK((perm.vectors.row(0) - fwd.vectors.row(2)).norm() < 1e-9);
    CHECK((perm.vectors.row(1) - fwd.vectors.row(0)).norm() < 1e-9);
    CHECK((perm.vectors.row(2) - fwd.vectors.row(1)).norm() < 1e-9);
  }
}

TEST_CASE("embedding cache round-trip") {
  testing::TempDir dir("emb");
  EmbeddingSet set{Modality::image_region, Eigen::MatrixXd::Random(3, 5).cast<float>().cast<double>()};
  write_embedding_cache(dir / "e.bin", set);
  const auto back = read_embedding_cache(dir / "e.bin");
  CHECK(back.modality == Modality::image_region);
  CHECK(back.vectors == set.vectors);
}

TEST_CASE("encoder config validation") {
  EncoderConfig c;
  CHECK_NOTHROW(c.validate());
  c.transformer_heads = 7;
  CHECK_THROWS(c.validate());
}

#include <doctest.h>

#include <cmath>

#include "adaptation/adaptation.hpp"
#include "common/error.hpp"
#include "losses/losses.hpp"

using namespace wsground;

namespace {

EmbeddingSet rows(Modality m, Eigen::MatrixXd v) { return {m, std::move(v)}; }

}  // namespace

TEST_CASE("adapter alpha endpoints") {
  nn::ParameterStore store;
  Adapter ad{"ad", 4, 6, 0.0};
  init_adapter(store, ad, 3);
  const EmbeddingSet f = rows(Modality::text_query, Eigen::MatrixXd::Random(3, 4));
  CHECK(adapt(f, store, ad).residual.vectors == f.vectors);
  ad.alpha = 1.0;
  const auto out = adapt(f, store, ad);
  CHECK(out.residual.vectors == out.adapted.vectors);
}

TEST_CASE("adapter residual is the convex mix") {
  nn::Tape tape;
  Eigen::MatrixXd f(1, 2), a(1, 2);
  f << 2, 0;
  a << 0, 2;
  const nn::Var r = nn::mix(tape.constant(a), tape.constant(f), 0.5);
  CHECK(r.value()(0, 0) == 1.0);
  CHECK(r.value()(0, 1) == 1.0);

  nn::ParameterStore store;
  Adapter ad{"ad", 3, 5, 0.5};
  init_adapter(store, ad, 1);
  const auto f3 = rows(Modality::text_query, Eigen::MatrixXd::Random(2, 3));
  const auto out = adapt(f3, store, ad);
  CHECK((out.residual.vectors - (0.5 * out.adapted.vectors + 0.5 * f3.vectors)).norm() < 1e-12);
}

TEST_CASE("adapter width mismatch is a contract error") {
  nn::ParameterStore store;
  Adapter ad{"ad", 4, 4, 0.5};
  init_adapter(store, ad, 1);
  CHECK_THROWS_AS(adapt(rows(Modality::text_query, Eigen::MatrixXd::Zero(1, 3)), store, ad), ContractError);
}

TEST_CASE("category logits and softmax") {
  const auto rc = rows(Modality::text_category, Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd r(2, 2);
  r << 3, 4, 0, 0;
  const auto logits = classify_against_categories(rows(Modality::point_proposal, r), rc, LogitSource::proposal3d);
  CHECK(logits.logits(0, 0) == 3);
  CHECK(logits.logits(0, 1) == 4);
  const Eigen::MatrixXd p = softmax(logits.logits);
  CHECK(p(0, 0) == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(p(0, 1) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(p(1, 0) == doctest::Approx(0.5));
  const auto empty =
      classify_against_categories(rows(Modality::point_proposal, Eigen::MatrixXd(0, 2)), rc, LogitSource::region2d);
  CHECK(empty.logits.rows() == 0);
  CHECK(empty.logits.cols() == 2);
}

TEST_CASE("query classifier") {
  nn::ParameterStore store;
  init_query_classifier(store, "qc", 3, 4, 5);
  const auto rq = rows(Modality::text_query, Eigen::MatrixXd::Random(1, 3));
  const auto seeded = classify_query(rq, store, "qc").logits;
  nn::ParameterStore again;
  init_query_classifier(again, "qc", 3, 4, 5);
  CHECK(classify_query(rq, again, "qc").logits == seeded);

  store.get("qc.weight").value.setZero();
  const Eigen::MatrixXd p = softmax(classify_query(rq, store, "qc").logits);
  for (int c = 0; c < 4; ++c) CHECK(p(0, c) == doctest::Approx(0.25));
  store.get("qc.bias").value(0, 0) = 10;
  Eigen::Index arg;
  classify_query(rq, store, "qc").logits.row(0).maxCoeff(&arg);
  CHECK(arg == 0);
}

TEST_CASE("descending order is stable") {
  Eigen::VectorXd v(4);
  v << 1, 3, 3, 2;
  CHECK(descending_order(v) == std::vector<int>{1, 2, 3, 0});
}

TEST_CASE("contrastive loss reference values") {
  Eigen::MatrixXd a(1, 2), b(1, 2);
  a << 1, 2;
  b << -3, 1;
  CHECK(contrastive_loss(rows(Modality::image_region, a), rows(Modality::point_proposal, b), 0.07, true) == 0.0);

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd swapped(2, 2);
  swapped << 0, 1, 1, 0;
  const double matched =
      contrastive_loss(rows(Modality::image_region, eye), rows(Modality::point_proposal, eye), 1.0, true);
  const double mismatched =
      contrastive_loss(rows(Modality::image_region, eye), rows(Modality::point_proposal, swapped), 1.0, true);
  CHECK(matched == doctest::Approx(2 * std::log(1 + std::exp(-1.0))));
  CHECK(mismatched == doctest::Approx(2 * std::log(1 + std::exp(1.0))));
  CHECK(mismatched > matched);
  CHECK(contrastive_loss(rows(Modality::image_region, Eigen::MatrixXd(0, 2)),
                         rows(Modality::point_proposal, Eigen::MatrixXd(0, 2)), 1.0, true) == 0.0);
}

TEST_CASE("contrastive loss sharpens as tau shrinks at the matched optimum") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  double previous = std::numeric_limits<double>::infinity();
  for (double tau : {1.0, 0.5, 0.2, 0.07, 0.01}) {
    const double l = contrastive_loss(rows(Modality::image_region, eye), rows(Modality::point_proposal, eye), tau, true);
    CHECK(std::isfinite(l));
    CHECK(l >= 0.0);
    CHECK(l < previous);
    previous = l;
  }
}

TEST_CASE("cross-entropy reference values") {
  const std::vector<int> label0{0};
  ClassificationLogits uniform{Eigen::MatrixXd::Zero(1, 4), LogitSource::query};
  CHECK(classification_loss(uniform, label0) == doctest::Approx(std::log(4.0)));
  Eigen::MatrixXd l(1, 2);
  l << 10, 0;
  CHECK(classification_loss({l, LogitSource::query}, label0) == doctest::Approx(4.54e-5).epsilon(1e-3));
  l << 1000, 0;
  CHECK(classification_loss({l, LogitSource::query}, label0) < 1e-12);
  CHECK(classification_loss({Eigen::MatrixXd(0, 2), LogitSource::query}, std::vector<int>{}) == 0.0);
}

TEST_CASE("weighted total") {
  LossReport r;
  r.contrastive_embed = 0.5;
  r.contrastive_adapted = 0.5;
  r.cls_2d = 0.2;
  r.cls_3d = 0.3;
  r.cls_query = 0.1;
  LossWeights w;
  CHECK(total_loss(r, w) == doctest::Approx(1.6));
  w.lambda1 = 0;
  CHECK(total_loss(r, w) == doctest::Approx(0.6));
  w.lambda2 = w.lambda3 = w.lambda4 = 0;
  CHECK(total_loss(r, w) == 0.0);
  r.cls_3d = std::nan("");
  w = LossWeights{};
  try {
    total_loss(r, w);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("cls_3d") != std::string::npos);
  }
}

TEST_CASE("tape gradients of the contrastive loss match finite differences") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 4), b = Eigen::MatrixXd::Random(3, 4);
  nn::Parameter pa{"a", a, Eigen::MatrixXd::Zero(3, 4)};
  nn::Tape tape;
  const nn::Var loss = contrastive_loss(tape.parameter(pa), tape.constant(b), 0.3, true);
  tape.backward(loss);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      Eigen::MatrixXd up = a, down = a;
      up(i, j) += h;
      down(i, j) -= h;
      const double num = (contrastive_loss(rows(Modality::image_region, up), rows(Modality::point_proposal, b), 0.3, true) -
                          contrastive_loss(rows(Modality::image_region, down), rows(Modality::point_proposal, b), 0.3, true)) /
                         (2 * h);
      CHECK(pa.grad(i, j) == doctest::Approx(num).epsilon(1e-5));
    }
}

// Copyright 2026 The RandEnc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "randenc/classifier.hpp"
#include "randenc/metrics.hpp"
#include "randenc/rng.hpp"

using namespace randenc;

namespace {

LinearHead random_head(HeadKind kind, Index c, Index f, unsigned seed) {
  LinearHead h = LinearHead::zeros(kind, c, f);
  h.weights = oracle::gaussian(c, f, seed);
  h.bias = oracle::gaussian(c, 1, seed + 1000);
  return h;
}

Matrix random_distributions(Index n, Index k, unsigned seed) {
  Matrix t = oracle::gaussian(n, k, seed).array().exp();
  for (Index i = 0; i < n; ++i) t.row(i) /= t.row(i).sum();
  // Some exact zeros exercise the 0 log 0 convention.
  t(0, 0) = 0.0;
  t.row(0) /= t.row(0).sum();
  return t;
}

double relative_error(double a, double b) {
  const double scale = std::abs(a) + std::abs(b);
  return scale < 1e-10 ? 0.0 : std::abs(a - b) / scale;
}

Examples toy(const Matrix& x, std::vector<int> y) {
  Examples e;
  e.features = x;
  e.labels = std::move(y);
  return e;
}

}  // namespace

TEST_CASE("build_features per mode") {
  const Vector u{{1, 2}};
  CHECK(build_features(FeatureMode::pair_class, u, u) == Vector{{1, 2, 1, 2, 0, 0, 1, 4}});
  CHECK(build_features(FeatureMode::pair_related, Vector{{1, 0}}, Vector{{0, 1}}) ==
        Vector{{1, 1, 0, 0}});
  CHECK(build_features(FeatureMode::single, Vector{{3}}) == Vector{{3}});
  CHECK(feature_dim(FeatureMode::pair_class, 5) == 20);
  CHECK(feature_dim(FeatureMode::pair_related, 5) == 10);
  CHECK_THROWS_AS(build_features(FeatureMode::pair_class, u), Error);
  CHECK_THROWS_AS(build_features(FeatureMode::pair_class, u, Vector{{1}}), DimensionError);
  const Matrix a = oracle::gaussian(3, 2, 1), b = oracle::gaussian(3, 2, 2);
  const Matrix f = build_feature_matrix(FeatureMode::pair_class, a, &b);
  CHECK(f.row(1).transpose() ==
        build_features(FeatureMode::pair_class, a.row(1).transpose(), Vector(b.row(1).transpose())));
}

TEST_CASE("zero head gives ln 2 for two classes and uniform predictions") {
  const LinearHead h = LinearHead::zeros(HeadKind::classification, 2, 3);
  const LossGradient g = loss_and_gradient(h, toy(oracle::gaussian(4, 3, 1), {0, 1, 1, 0}), 0.0);
  CHECK(g.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const Vector p = predict(LinearHead::zeros(HeadKind::classification, 3, 2), Vector{{4, -1}});
  for (Index i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(1.0 / 3));
}

TEST_CASE("cross-entropy loss matches the oracle and finite differences") {
  for (unsigned draw = 0; draw < 20; ++draw) {
    const LinearHead h = random_head(HeadKind::classification, 4, 6, draw);
    Examples e = toy(oracle::gaussian(9, 6, 50 + draw), {});
    for (int i = 0; i < 9; ++i) e.labels.push_back(static_cast<int>((i * 7 + draw) % 4));
    const double l2 = 0.01 * draw;
    const LossGradient g = loss_and_gradient(h, e, l2);
    CHECK(g.loss == doctest::Approx(oracle::cross_entropy(h.weights, h.bias, e.features, e.labels, l2)).epsilon(1e-12));
    const double step = 1e-5;
    double worst = 0.0;
    for (Index i = 0; i < h.weights.size(); ++i) {
      LinearHead up = h, down = h;
      up.weights.data()[i] += step;
      down.weights.data()[i] -= step;
      const double fd = (oracle::cross_entropy(up.weights, up.bias, e.features, e.labels, l2) -
                         oracle::cross_entropy(down.weights, down.bias, e.features, e.labels, l2)) /
                        (2 * step);
      worst = std::max(worst, relative_error(fd, g.grad_weights.data()[i]));
    }
    for (Index i = 0; i < h.bias.size(); ++i) {
      LinearHead up = h, down = h;
      up.bias(i) += step;
      down.bias(i) -= step;
      const double fd = (oracle::cross_entropy(up.weights, up.bias, e.features, e.labels, l2) -
                         oracle::cross_entropy(down.weights, down.bias, e.features, e.labels, l2)) /
                        (2 * step);
      worst = std::max(worst, relative_error(fd, g.grad_bias(i)));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("KL loss matches the oracle and finite differences") {
  for (unsigned draw = 0; draw < 20; ++draw) {
    const LinearHead h = random_head(HeadKind::relatedness, 5, 4, 300 + draw);
    Examples e;
    e.features = oracle::gaussian(7, 4, 400 + draw);
    e.targets = random_distributions(7, 5, 500 + draw);
    const double l2 = 0.005 * draw;
    const LossGradient g = loss_and_gradient(h, e, l2);
    CHECK(g.loss == doctest::Approx(oracle::kl_loss(h.weights, h.bias, e.features, e.targets, l2)).epsilon(1e-12));
    const double step = 1e-5;
    double worst = 0.0;
    for (Index i = 0; i < h.weights.size(); ++i) {
      LinearHead up = h, down = h;
      up.weights.data()[i] += step;
      down.weights.data()[i] -= step;
      const double fd = (oracle::kl_loss(up.weights, up.bias, e.features, e.targets, l2) -
                         oracle::kl_loss(down.weights, down.bias, e.features, e.targets, l2)) /
                        (2 * step);
      worst = std::max(worst, relative_error(fd, g.grad_weights.data()[i]));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("KL gradient vanishes when the target equals the model") {
  const LinearHead h = random_head(HeadKind::relatedness, 4, 3, 9);
  Examples e;
  e.features = oracle::gaussian(5, 3, 10);
  e.targets = predict_batch(h, e.features);
  const LossGradient g = loss_and_gradient(h, e, 0.0);
  CHECK(g.grad_weights.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(g.grad_bias.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(g.loss) < 1e-10);
}

TEST_CASE("loss_and_gradient rejects bad targets") {
  const LinearHead h = LinearHead::zeros(HeadKind::classification, 2, 2);
  CHECK_THROWS_AS(loss_and_gradient(h, toy(Matrix::Ones(1, 2), {2}), 0.0), Error);
  LinearHead r = LinearHead::zeros(HeadKind::relatedness, 2, 2);
  Examples e;
  e.features = Matrix::Ones(1, 2);
  e.targets = Matrix::Constant(1, 2, 0.6);
  CHECK_THROWS_AS(loss_and_gradient(r, e, 0.0), Error);
}

TEST_CASE("predict: normalization, ties and positive scaling") {
  for (unsigned k = 0; k < 20; ++k) {
    const LinearHead h = random_head(HeadKind::classification, 5, 4, k);
    const Vector x = oracle::gaussian(4, 1, 100 + k);
    const Vector p = predict(h, x);
    CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    LinearHead hot = h;
    hot.weights *= 10;
    hot.bias *= 10;
    CHECK(argmax(predict(hot, x)) == argmax(p));
  }
  CHECK(argmax(Vector{{0.2, 0.4, 0.4}}) == 1);
  CHECK_THROWS_AS(predict(LinearHead::zeros(HeadKind::classification, 2, 3), Vector::Ones(2)),
                  DimensionError);
}

TEST_CASE("score distributions and expected scores") {
  const std::vector<double> s{1, 2, 3, 4, 5};
  const Vector p = score_to_distribution(3.7, s);
  CHECK(p(2) == doctest::Approx(0.3));
  CHECK(p(3) == doctest::Approx(0.7));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(score_to_distribution(5.0, s)(4) == 1.0);
  CHECK(expected_score(Vector{{0, 0, 0.3, 0.7, 0}}, s) == doctest::Approx(3.7));
  CHECK(expected_score(Vector::Unit(5, 1), s) == 2.0);
  CHECK(expected_score(Vector::Constant(5, 0.2), s) == doctest::Approx(3.0));
  RandomStream r = SeededRng(1, "scores").stream();
  for (int i = 0; i < 100; ++i) {
    const double x = r.uniform(1, 5);
    CHECK(std::abs(expected_score(score_to_distribution(x, s), s) - x) < 1e-9);
  }
  CHECK_THROWS_AS(score_to_distribution(5.5, s), Error);
  CHECK_THROWS_AS(score_to_distribution(0.9, s), Error);
}

TEST_CASE("accuracy and Pearson") {
  const std::vector<int> a{0, 1, 2, 1}, b{0, 1, 1, 1};
  CHECK(accuracy(a, b) == 0.75);
  const std::vector<double> x{1, 2, 3}, y{2, 4, 6}, z{-1, -2, -3};
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 1, 1}), NumericalError);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), DimensionError);
  RandomStream r = SeededRng(2, "pearson").stream();
  std::vector<double> u, v;
  for (int i = 0; i < 1000; ++i) {
    u.push_back(r.normal());
    v.push_back(0.3 * u.back() + r.normal());
  }
  CHECK(std::abs(pearson(u, v) - oracle::pearson(u, v)) < 1e-12);
}

TEST_CASE("training separates a separable toy set") {
  Matrix x(4, 2);
  x << 1, 1, 2, 1, -1, -1, -2, -1;
  const Examples e = toy(x, {1, 1, 0, 0});
  TrainSpec spec;
  spec.batch_size = 4;
  const TrainResult r = train(LinearHead::zeros(HeadKind::classification, 2, 2), e, e, spec);
  CHECK(evaluate_metric(r.head, e) == 1.0);
}

TEST_CASE("a linear head cannot solve XOR") {
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  const Examples e = toy(x, {0, 1, 1, 0});
  TrainSpec spec;
  spec.batch_size = 4;
  const TrainResult r = train(LinearHead::zeros(HeadKind::classification, 2, 2), e, e, spec);
  CHECK(evaluate_metric(r.head, e) <= 0.75);
  // Exhaustive: no line through a grid of directions and offsets classifies all four.
  int best = 0;
  for (int a = 0; a < 360; ++a)
    for (int c = -40; c <= 40; ++c) {
      const double w0 = std::cos(a * M_PI / 180), w1 = std::sin(a * M_PI / 180), b = c / 20.0;
      int correct = 0;
      for (Index i = 0; i < 4; ++i) correct += ((w0 * x(i, 0) + w1 * x(i, 1) + b > 0) == (e.labels[static_cast<std::size_t>(i)] == 1));
      best = std::max(best, correct);
    }
  CHECK(best == 3);
}

TEST_CASE("training is deterministic and returns the best check") {
  const Matrix x = oracle::gaussian(120, 5, 3);
  std::vector<int> y;
  for (Index i = 0; i < 120; ++i) y.push_back(x(i, 0) + 0.5 * x(i, 1) + 0.3 * x(i, 4) > 0 ? 1 : 0);
  const Examples tr = toy(x.topRows(80), std::vector<int>(y.begin(), y.begin() + 80));
  const Examples va = toy(x.bottomRows(40), std::vector<int>(y.begin() + 80, y.end()));
  TrainSpec spec;
  spec.seed = 4;
  spec.batch_size = 16;
  const TrainResult a = train(LinearHead::zeros(HeadKind::classification, 2, 5), tr, va, spec);
  const TrainResult b = train(LinearHead::zeros(HeadKind::classification, 2, 5), tr, va, spec);
  CHECK(a.head.weights == b.head.weights);
  CHECK(a.head.bias == b.head.bias);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].train_loss == b.log[i].train_loss);
  double best = -1;
  for (const auto& rec : a.log) best = std::max(best, rec.metric);
  CHECK(a.best_metric == best);
  CHECK(evaluate_metric(a.head, va) == best);
  CHECK(a.epochs_run <= 200);
  CHECK(a.log.front().epoch == 4);
}

TEST_CASE("early stopping after five non-improving checks") {
  // Validation accuracy is pinned at 1 from the first check, so the run
  // stops after the sixth check.
  Matrix x(4, 1);
  x << 1, 2, -1, -2;
  const Examples e = toy(x, {1, 1, 0, 0});
  TrainSpec spec;
  spec.batch_size = 4;
  const TrainResult r = train(LinearHead::zeros(HeadKind::classification, 2, 1), e, e, spec);
  CHECK(r.log.size() == 6);
  CHECK(r.epochs_run == 24);
  CHECK(r.best_epoch == 4);
}

TEST_CASE("full-batch loss with l2 is non-increasing across checks") {
  const Matrix x = oracle::gaussian(60, 4, 8);
  std::vector<int> y;
  for (Index i = 0; i < 60; ++i) y.push_back(x(i, 0) - x(i, 2) > 0.3 ? 1 : 0);
  const Examples e = toy(x, y);
  TrainSpec spec;
  spec.batch_size = 60;
  spec.l2 = 0.01;
  spec.patience = 1000;
  const TrainResult r = train(LinearHead::zeros(HeadKind::classification, 2, 4), e, e, spec);
  for (std::size_t i = 1; i < r.log.size(); ++i)
    CHECK(r.log[i].train_loss <= r.log[i - 1].train_loss + 1e-6);
}

TEST_CASE("relatedness head trains toward Pearson") {
  const Matrix x = oracle::gaussian(200, 3, 5);
  const std::vector<double> support{1, 2, 3, 4, 5};
  Examples e;
  e.features = x;
  e.targets = Matrix(200, 5);
  for (Index i = 0; i < 200; ++i) {
    const double s = std::clamp(3.0 + x(i, 0), 1.0, 5.0);
    e.scores.push_back(s);
    e.targets.row(i) = score_to_distribution(s, support).transpose();
  }
  LinearHead h = LinearHead::zeros(HeadKind::relatedness, 5, 3);
  h.support = support;
  TrainSpec spec;
  const TrainResult r = train(h, e, e, spec);
  CHECK(r.best_metric > 0.9);
}

TEST_CASE("training rejects empty sets and surfaces non-finite losses") {
  const LinearHead h = LinearHead::zeros(HeadKind::classification, 2, 1);
  const Examples empty = toy(Matrix(0, 1), {});
  Matrix x(2, 1);
  x << 1, -1;
  CHECK_THROWS_AS(train(h, empty, toy(x, {0, 1}), TrainSpec{}), Error);
  Matrix bad(2, 1);
  bad << std::numeric_limits<double>::infinity(), 1;
  CHECK_THROWS_AS(train(h, toy(bad, {0, 1}), toy(x, {0, 1}), TrainSpec{}), NumericalError);
}

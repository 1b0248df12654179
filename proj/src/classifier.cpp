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

#include "randenc/classifier.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "randenc/metrics.hpp"
#include "randenc/rng.hpp"

namespace randenc {

std::string_view to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::single: return "single";
    case FeatureMode::pair_class: return "pair_class";
    case FeatureMode::pair_related: return "pair_related";
  }
  return "single";
}

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "single") return FeatureMode::single;
  if (s == "pair_class") return FeatureMode::pair_class;
  if (s == "pair_related") return FeatureMode::pair_related;
  throw Error("unknown feature mode: " + std::string(s));
}

Index feature_dim(FeatureMode mode, Index dim) {
  switch (mode) {
    case FeatureMode::single: return dim;
    case FeatureMode::pair_class: return 4 * dim;
    case FeatureMode::pair_related: return 2 * dim;
  }
  return dim;
}

Vector build_features(FeatureMode mode, const Vector& u, const std::optional<Vector>& v) {
  if (mode == FeatureMode::single) {
    if (v) throw Error("build_features: single mode takes one sentence");
    return u;
  }
  if (!v) throw Error("build_features: pair mode needs a second sentence");
  if (v->size() != u.size()) throw DimensionError("build_features: sentence dims differ");
  Vector out(feature_dim(mode, u.size()));
  if (mode == FeatureMode::pair_class) {
    out << u, *v, (u - *v).cwiseAbs(), u.cwiseProduct(*v);
  } else {
    out << (u - *v).cwiseAbs(), u.cwiseProduct(*v);
  }
  return out;
}

Matrix build_feature_matrix(FeatureMode mode, const Matrix& u, const Matrix* v) {
  if (mode == FeatureMode::single) {
    if (v) throw Error("build_feature_matrix: single mode takes one sentence matrix");
    return u;
  }
  if (!v) throw Error("build_feature_matrix: pair mode needs a second sentence matrix");
  if (v->rows() != u.rows() || v->cols() != u.cols())
    throw DimensionError("build_feature_matrix: sentence matrices differ in shape");
  Matrix out(u.rows(), feature_dim(mode, u.cols()));
  if (mode == FeatureMode::pair_class) {
    out << u, *v, (u - *v).cwiseAbs(), u.cwiseProduct(*v);
  } else {
    out << (u - *v).cwiseAbs(), u.cwiseProduct(*v);
  }
  return out;
}

LinearHead LinearHead::zeros(HeadKind kind, Index classes, Index features) {
  LinearHead h;
  h.kind = kind;
  h.weights = Matrix::Zero(classes, features);
  h.bias = Vector::Zero(classes);
  return h;
}

namespace {

// Row-wise softmax of logits, in place; returns log-sum-exp per row.
Vector softmax_rows(Matrix& logits) {
  Vector lse(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i).array() = (logits.row(i).array() - m).exp();
    const double s = logits.row(i).sum();
    logits.row(i) /= s;
    lse(i) = m + std::log(s);
  }
  return lse;
}

void check_head(const LinearHead& head, const Matrix& features) {
  if (features.cols() != head.feature_dim())
    throw DimensionError("head expects " + std::to_string(head.feature_dim()) +
                         " features, got " + std::to_string(features.cols()));
}

}  // namespace

LossGradient loss_and_gradient(const LinearHead& head, const Examples& batch, double l2) {
  check_head(head, batch.features);
  const Index n = batch.size();
  const Index c = head.num_classes();
  if (n == 0) throw Error("loss_and_gradient: empty batch");
  Matrix probs = (batch.features * head.weights.transpose()).rowwise() + head.bias.transpose();
  Matrix logits = probs;
  const Vector lse = softmax_rows(probs);

  Matrix residual = probs;  // dLoss/dlogits * n
  double loss = 0.0;
  if (head.kind == HeadKind::classification) {
    if (static_cast<Index>(batch.labels.size()) != n)
      throw DimensionError("loss_and_gradient: label count does not match features");
    for (Index i = 0; i < n; ++i) {
      const int y = batch.labels[static_cast<std::size_t>(i)];
      if (y < 0 || y >= c) throw Error("loss_and_gradient: target class out of range");
      loss += lse(i) - logits(i, y);
      residual(i, y) -= 1.0;
    }
  } else {
    if (batch.targets.rows() != n || batch.targets.cols() != c)
      throw DimensionError("loss_and_gradient: target distribution shape mismatch");
    for (Index i = 0; i < n; ++i) {
      const auto t = batch.targets.row(i);
      if ((t.array() < 0.0).any() || std::abs(t.sum() - 1.0) > 1e-6)
        throw Error("loss_and_gradient: target row is not a probability vector");
      for (Index k = 0; k < c; ++k) {
        if (t(k) > 0.0) loss += t(k) * (std::log(t(k)) - (logits(i, k) - lse(i)));
      }
    }
    residual -= batch.targets;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  LossGradient out;
  out.loss = loss * inv_n + 0.5 * l2 * head.weights.squaredNorm();
  out.grad_weights = inv_n * residual.transpose() * batch.features + l2 * head.weights;
  out.grad_bias = inv_n * residual.colwise().sum().transpose();
  return out;
}

Vector predict(const LinearHead& head, const Vector& features) {
  if (features.size() != head.feature_dim())
    throw DimensionError("predict: feature dimension mismatch");
  Matrix logits = (head.weights * features + head.bias).transpose();
  softmax_rows(logits);
  return logits.row(0).transpose();
}

Matrix predict_batch(const LinearHead& head, const Matrix& features) {
  check_head(head, features);
  Matrix logits = (features * head.weights.transpose()).rowwise() + head.bias.transpose();
  softmax_rows(logits);
  return logits;
}

Index argmax(const Vector& probs) {
  Index best = 0;
  for (Index k = 1; k < probs.size(); ++k)
    if (probs(k) > probs(best)) best = k;
  return best;
}

Vector score_to_distribution(double score, std::span<const double> support) {
  const std::size_t k = support.size();
  if (k < 2) throw Error("score_to_distribution: support needs at least two points");
  if (!(score >= support.front() && score <= support.back()))
    throw Error("score_to_distribution: score " + std::to_string(score) +
                " outside support range");
  Vector p = Vector::Zero(static_cast<Index>(k));
  if (score == support.back()) {
    p(static_cast<Index>(k) - 1) = 1.0;
    return p;
  }
  std::size_t i = 0;
  while (i + 1 < k && support[i + 1] <= score) ++i;
  const double upper = (score - support[i]) / (support[i + 1] - support[i]);
  p(static_cast<Index>(i)) = 1.0 - upper;
  p(static_cast<Index>(i) + 1) = upper;
  return p;
}

double expected_score(const Vector& probs, std::span<const double> support) {
  if (static_cast<std::size_t>(probs.size()) != support.size())
    throw DimensionError("expected_score: support size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) s += probs(static_cast<Index>(k)) * support[k];
  return s;
}

double evaluate_metric(const LinearHead& head, const Examples& data) {
  const Matrix probs = predict_batch(head, data.features);
  if (head.kind == HeadKind::classification) {
    std::vector<int> pred(static_cast<std::size_t>(probs.rows()));
    for (Index i = 0; i < probs.rows(); ++i)
      pred[static_cast<std::size_t>(i)] = static_cast<int>(argmax(probs.row(i).transpose()));
    return accuracy(pred, data.labels);
  }
  std::vector<double> predicted(static_cast<std::size_t>(probs.rows()));
  for (Index i = 0; i < probs.rows(); ++i)
    predicted[static_cast<std::size_t>(i)] = expected_score(probs.row(i).transpose(), head.support);
  try {
    return pearson(predicted, data.scores);
  } catch (const NumericalError&) {
    return 0.0;  // constant predictions carry no correlation
  }
}

namespace {

Examples gather(const Examples& src, std::span<const Index> rows) {
  Examples out;
  out.features.resize(static_cast<Index>(rows.size()), src.features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.features.row(static_cast<Index>(r)) = src.features.row(rows[r]);
  if (!src.labels.empty()) {
    out.labels.reserve(rows.size());
    for (Index r : rows) out.labels.push_back(src.labels[static_cast<std::size_t>(r)]);
  }
  if (src.targets.size() > 0) {
    out.targets.resize(static_cast<Index>(rows.size()), src.targets.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.targets.row(static_cast<Index>(r)) = src.targets.row(rows[r]);
  }
  return out;
}

struct AdamState {
  Matrix m_w, v_w;
  Vector m_b, v_b;
  long step = 0;
};

void adam_update(LinearHead& head, const LossGradient& g, AdamState& s, const AdamSpec& a) {
  ++s.step;
  const double c1 = 1.0 - std::pow(a.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(a.beta2, static_cast<double>(s.step));
  s.m_w = a.beta1 * s.m_w + (1.0 - a.beta1) * g.grad_weights;
  s.v_w = a.beta2 * s.v_w + (1.0 - a.beta2) * g.grad_weights.cwiseAbs2();
  s.m_b = a.beta1 * s.m_b + (1.0 - a.beta1) * g.grad_bias;
  s.v_b = a.beta2 * s.v_b + (1.0 - a.beta2) * g.grad_bias.cwiseAbs2();
  head.weights.array() -=
      a.learning_rate * (s.m_w.array() / c1) / ((s.v_w.array() / c2).sqrt() + a.epsilon);
  head.bias.array() -=
      a.learning_rate * (s.m_b.array() / c1) / ((s.v_b.array() / c2).sqrt() + a.epsilon);
}

}  // namespace

TrainResult train(const LinearHead& init, const Examples& train_set, const Examples& validation,
                  const TrainSpec& spec) {
  if (train_set.size() == 0 || validation.size() == 0)
    throw Error("train: train and validation sets must be non-empty");
  if (spec.batch_size < 1 || spec.max_epochs < 1 || spec.patience < 1 || spec.check_every < 1)
    throw Error("train: batch_size, max_epochs, patience and check_every must be positive");
  if (!(spec.l2 >= 0.0)) throw Error("train: l2 must be non-negative");
  check_head(init, train_set.features);

  if (init.kind == HeadKind::classification) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(init.num_classes()), 0);
    for (int y : train_set.labels)
      if (y >= 0 && y < init.num_classes()) ++counts[static_cast<std::size_t>(y)];
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (counts[k] == 0) std::cerr << "warning: class " << k << " has no training examples\n";
  }

  LinearHead head = init;
  AdamState state{Matrix::Zero(head.weights.rows(), head.weights.cols()),
                  Matrix::Zero(head.weights.rows(), head.weights.cols()),
                  Vector::Zero(head.bias.size()), Vector::Zero(head.bias.size()), 0};
  RandomStream shuffle = SeededRng(spec.seed, "train/shuffle").stream();
  std::vector<Index> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), Index{0});

  TrainResult result;
  result.head = head;
  result.best_metric = -std::numeric_limits<double>::infinity();
  int bad_checks = 0;

  auto run_check = [&](int epoch) {
    CheckRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_and_gradient(head, train_set, spec.l2).loss;
    rec.metric = evaluate_metric(head, validation);
    rec.improved = rec.metric > result.best_metric;
    if (rec.improved) {
      result.best_metric = rec.metric;
      result.best_epoch = epoch;
      result.head = head;
      bad_checks = 0;
    } else {
      ++bad_checks;
    }
    result.log.push_back(rec);
  };

  const auto bs = static_cast<std::size_t>(spec.batch_size);
  for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t stop = std::min(order.size(), start + bs);
      const Examples batch =
          gather(train_set, std::span<const Index>(order).subspan(start, stop - start));
      const LossGradient g = loss_and_gradient(head, batch, spec.l2);
      if (!std::isfinite(g.loss))
        throw NumericalError("train: loss became non-finite at epoch " + std::to_string(epoch));
      adam_update(head, g, state, spec.adam);
    }
    result.epochs_run = epoch;
    const bool last = epoch == spec.max_epochs;
    if (epoch % spec.check_every == 0 || (last && result.log.empty())) {
      run_check(epoch);
      if (bad_checks >= spec.patience) break;
    }
  }
  return result;
}

}  // namespace randenc

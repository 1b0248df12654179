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

#pragma once

// Linear heads: multinomial logistic regression for classification and a
// KL-trained class-distribution head with expected-score readout for
// relatedness. This is the only trained component.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randenc/types.hpp"

namespace randenc {

enum class FeatureMode { single, pair_class, pair_related };
enum class HeadKind { classification, relatedness };

std::string_view to_string(FeatureMode m);
FeatureMode parse_feature_mode(std::string_view s);

// Output dimension for sentence dimension `dim`: D, 4D or 2D.
Index feature_dim(FeatureMode mode, Index dim);

// single: u; pair_class: [u; v; |u - v|; u * v]; pair_related: [|u - v|; u * v].
Vector build_features(FeatureMode mode, const Vector& u, const std::optional<Vector>& v = {});

// Row-wise build_features over aligned sentence matrices.
Matrix build_feature_matrix(FeatureMode mode, const Matrix& u, const Matrix* v = nullptr);

struct LinearHead {
  HeadKind kind = HeadKind::classification;
  Matrix weights;  // C x F
  Vector bias;     // C
  std::vector<std::string> classes;  // classification labels, index order
  std::vector<double> support;       // relatedness score support s_1 < ... < s_K

  Index num_classes() const { return weights.rows(); }
  Index feature_dim() const { return weights.cols(); }

  static LinearHead zeros(HeadKind kind, Index classes, Index features);
};

// Training or evaluation examples for a head. Classification uses `labels`;
// relatedness uses `targets` (probability rows) for the loss and `scores`
// for the Pearson metric.
struct Examples {
  Matrix features;                // N x F
  std::vector<int> labels;        // classification
  Matrix targets;                 // relatedness: N x K
  std::vector<double> scores;     // relatedness gold scores

  Index size() const { return features.rows(); }
};

struct LossGradient {
  double loss = 0.0;
  Matrix grad_weights;
  Vector grad_bias;
};

// Mean cross-entropy (classification) or mean KL(target || model)
// (relatedness) over the rows of `batch`, plus (l2 / 2) * ||weights||^2.
LossGradient loss_and_gradient(const LinearHead& head, const Examples& batch, double l2);

// Softmax of the affine map for one feature vector.
Vector predict(const LinearHead& head, const Vector& features);
// Softmax rows for a feature matrix.
Matrix predict_batch(const LinearHead& head, const Matrix& features);

// Index of the largest entry; ties go to the lowest index.
Index argmax(const Vector& probs);

Vector score_to_distribution(double score, std::span<const double> support);
double expected_score(const Vector& probs, std::span<const double> support);

struct AdamSpec {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AdamSpec&) const = default;
};

struct TrainSpec {
  AdamSpec adam{};
  Index batch_size = 64;
  int max_epochs = 200;
  int patience = 5;     // consecutive non-improving checks before stopping
  int check_every = 4;  // epochs between validation checks
  double l2 = 0.0;
  std::uint64_t seed = 0;  // minibatch shuffling
  bool operator==(const TrainSpec&) const = default;
};

struct CheckRecord {
  int epoch = 0;
  double train_loss = 0.0;  // full training-set loss at the check
  double metric = 0.0;      // validation accuracy or Pearson r
  bool improved = false;
};

struct TrainResult {
  LinearHead head;           // snapshot at the best check
  double best_metric = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  std::vector<CheckRecord> log;
};

// Validation metric of a head: accuracy, or Pearson r of expected scores.
double evaluate_metric(const LinearHead& head, const Examples& data);

// Minibatch Adam with early stopping on the validation metric.
TrainResult train(const LinearHead& init, const Examples& train_set, const Examples& validation,
                  const TrainSpec& spec);

}  // namespace randenc

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

// Evaluation protocol: encode once per (seed, encoder setting), train linear
// heads per grid point and fold, select on the dev metric, report test
// metrics aggregated over seeds.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randenc/classifier.hpp"
#include "randenc/dataset.hpp"
#include "randenc/embed_store.hpp"
#include "randenc/encoders.hpp"

namespace randenc {

enum class SplitMode { provided_splits, kfold };
enum class TuningMode { per_task, best_overall };
enum class MetricKind { accuracy, pearson };

std::string_view to_string(SplitMode m);
std::string_view to_string(TuningMode m);
std::string_view to_string(MetricKind m);
SplitMode parse_split_mode(std::string_view s);
TuningMode parse_tuning_mode(std::string_view s);

struct GridPoint {
  PoolKind pooling = PoolKind::max;
  Activation activation = Activation::none;
  double spectral_radius = 0.8;
  double input_scale = 0.1;
  double sparsity = 0.0;
  double l2 = 0.0;

  // Compact description of the fields that matter for `family`.
  std::string describe(Family family) const;
  bool operator==(const GridPoint&) const = default;
};

// Ordered list of grid points; the order is the tie-break order.
struct HyperGrid {
  std::vector<GridPoint> points;

  // Pooling {mean, max}; BOREP activation {none, relu}; ESN radius
  // {0.4, 0.6, 0.8, 1.0}, input scale {0.01, 0.05, 0.1, 0.2}, sparsity
  // {0, 0.25, 0.5, 0.75}, activation {relu, none}; optional l2 sweep
  // {0, 1e-4, 1e-3, 1e-2} innermost. Enumerated lexicographically.
  static HyperGrid defaults(Family family, bool l2_sweep = false);

  // The single point described by `config` (and l2).
  static HyperGrid single(const EncoderConfig& config, double l2 = 0.0);
};

struct Protocol {
  SplitMode split_mode = SplitMode::provided_splits;
  int folds = 10;
  double inner_dev_fraction = 0.1;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  TuningMode tuning = TuningMode::per_task;
  std::optional<HyperGrid> grid;  // unset: HyperGrid::defaults(family, l2_sweep)
  bool l2_sweep = false;
  TrainSpec train{};
  int workers = 1;
};

// base + {0, ..., count - 1}
std::vector<std::uint64_t> make_seeds(std::uint64_t base, int count);

struct EvalResult {
  std::string task;
  MetricKind metric = MetricKind::accuracy;
  EncoderConfig config;  // template; seed field is the base seed
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed;  // test metric per seed (fold mean in kfold mode)
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  // Chosen grid point per seed, one entry per fold.
  std::vector<std::vector<std::string>> chosen;
  std::size_t encoder_builds = 0;
  std::size_t encode_passes = 0;  // full passes over the dataset's sentences
};

// Population mean and standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

// k disjoint folds covering 0..n-1 after a seeded shuffle; the first n mod k
// folds hold one extra index.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed);

MetricKind metric_for(const TaskDataset& dataset);

EvalResult evaluate_task(const EncoderConfig& config, const EmbeddingTable& table,
                         const TaskDataset& dataset, const Protocol& protocol);

struct BestOverallResult {
  HyperGrid grid;
  std::optional<std::size_t> accuracy_point;  // index into grid.points
  std::optional<std::size_t> pearson_point;
  std::vector<EvalResult> results;            // one per dataset, input order
};

BestOverallResult tune_best_overall(const EncoderConfig& config, const EmbeddingTable& table,
                                    std::span<const TaskDataset> datasets,
                                    const Protocol& protocol);

// Per-unit scores behind both tuning modes: scores[seed][fold][point].
struct UnitScore {
  double dev = 0.0;
  double test = 0.0;
};

struct GridScores {
  HyperGrid grid;
  MetricKind metric = MetricKind::accuracy;
  std::vector<std::vector<std::vector<UnitScore>>> scores;
  std::size_t encoder_builds = 0;
  std::size_t encode_passes = 0;
};

GridScores score_grid(const EncoderConfig& config, const EmbeddingTable& table,
                      const TaskDataset& dataset, const Protocol& protocol);

}  // namespace randenc

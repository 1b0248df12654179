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

// Analysis experiments at desk scale: dimension sweeps, random
// re-projection of external sentence vectors, Johnson-Lindenstrauss
// distortion, padded-pooling "sparsed" statistics and synthetic tasks.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "randenc/dataset.hpp"
#include "randenc/embed_store.hpp"
#include "randenc/encoders.hpp"
#include "randenc/evalharness.hpp"

namespace randenc {

struct SweepCurve {
  std::vector<Index> dims;
  std::vector<EvalResult> results;  // one per dim
};

// evaluate_task at each output dimension; dims must be strictly increasing.
SweepCurve dim_sweep(const EncoderConfig& config, std::span<const Index> dims,
                     const EmbeddingTable& table, const TaskDataset& dataset,
                     const Protocol& protocol);

// Plot-ready CSV, header `dim,seed,metric`, one row per (dim, seed).
void write_sweep_csv(const SweepCurve& curve, const std::filesystem::path& path);

// target_dim x source_dim random matrix from the "project/W" stream.
Matrix projection_matrix(Index source_dim, Index target_dim, InitScheme scheme,
                         std::uint64_t seed);

// Applies `projection` (target x source) to every row of `vectors`.
Matrix project_rows(const Matrix& vectors, const Matrix& projection);

Matrix random_project_vectors(const Matrix& vectors, Index target_dim, InitScheme scheme,
                              std::uint64_t seed);

struct JlStats {
  std::size_t pairs = 0;
  double epsilon = 0.05;
  double max_abs = 0.0;          // cosine distortion
  double mean_abs = 0.0;
  double fraction_within = 0.0;  // pairs with |distortion| <= epsilon
  double mean_norm_ratio = 0.0;  // scaled projected norm / original norm
};

// Pairwise cosine distortion of a random projection. Norms are compared
// after rescaling by 1 / sqrt(target_dim * entry variance of the scheme).
JlStats jl_distortion(const Matrix& vectors, Index target_dim, std::uint64_t seed,
                      double epsilon = 0.05, InitScheme scheme = InitScheme::heuristic);

struct SparsedReport {
  std::size_t total = 0;
  std::size_t sparsed = 0;
  std::vector<std::string> classes;
  std::vector<std::size_t> per_class_total;
  std::vector<std::size_t> per_class_sparsed;
  Index batch_size = 1;
  SortMode sort_mode = SortMode::sorted_by_length;
};

// An example is sparsed when its padded-mode vector differs in any
// coordinate from its length-mode vector under the given batching.
// Requires max pooling.
SparsedReport sparsed_stats(const Encoder& encoder, const EmbeddingTable& table,
                            const TaskDataset& dataset, Index batch_size, SortMode sort_mode);

nlohmann::ordered_json sparsed_to_json(const SparsedReport& report);

enum class SyntheticKind { word_content, xor_words, length_bins, bigram_shift };

std::string_view to_string(SyntheticKind k);
SyntheticKind parse_synthetic_kind(std::string_view s);

struct SyntheticParams {
  Index vocab_size = 200;    // filler tokens
  Index embed_dim = 16;
  Index min_len = 6;
  Index max_len = 12;
  std::size_t examples = 1000;  // bigram_shift: source sentences (two examples each)
  Index marked = 8;          // word_content: number of marked tokens
  int bins = 6;              // length_bins
  // xor_words: weight of the presence combinations (none, a only, b only, both).
  std::vector<double> balance = {1, 1, 1, 1};
  double train_fraction = 0.6;
  double dev_fraction = 0.2;
  InitScheme scheme = InitScheme::normal;
};

SyntheticParams default_params(SyntheticKind kind);

struct SyntheticTask {
  TaskDataset dataset;
  EmbeddingTable table;
};

SyntheticTask gen_synthetic(SyntheticKind kind, const SyntheticParams& params,
                            std::uint64_t seed);

// Length-bin label for a sentence of `length` tokens.
int length_bin(Index length, Index min_len, Index max_len, int bins);

// Four sentences over a 2-d table in which padded max pooling changes the
// representation of a short all-negative sentence when it shares a batch
// with a longer one, while sorted batching keeps it with a short partner.
SyntheticTask padding_corpus();

}  // namespace randenc

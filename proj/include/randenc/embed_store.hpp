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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "randenc/numerics.hpp"
#include "randenc/types.hpp"

namespace randenc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One row per token, sentence order preserved. rows() is the sentence length.
using TokenMatrix = Matrix;

struct EmbeddingSource {
  enum class Kind { pretrained, random };
  Kind kind = Kind::pretrained;
  InitScheme scheme = InitScheme::heuristic;  // random only
  std::uint64_t seed = 0;                     // random only
};

struct Lookup {
  Vector values;
  bool oov = false;
};

// Immutable token -> d-vector store. Absent tokens read as the zero vector.
class EmbeddingTable {
 public:
  // Tokens must be unique; `matrix` is |tokens| x dim with finite entries.
  EmbeddingTable(std::vector<std::string> tokens, RowMatrix matrix, EmbeddingSource source = {},
                 std::size_t duplicates_skipped = 0);

  Index dim() const { return matrix_.cols(); }
  Index size() const { return matrix_.rows(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const RowMatrix& matrix() const { return matrix_; }
  const EmbeddingSource& source() const { return source_; }

  // Lines skipped by the loader because the token was already present.
  std::size_t duplicates_skipped() const { return duplicates_skipped_; }

  std::optional<Index> find(std::string_view token) const;
  Lookup lookup(std::string_view token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Index> index_;
  RowMatrix matrix_;
  EmbeddingSource source_;
  std::size_t duplicates_skipped_ = 0;
};

// Text format: `token v1 ... vd` per line, optional leading `N d` header.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::optional<Index> expected_dim = std::nullopt);

// Writes the text format with a count header and round-trip precision.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// Binary cache: f64 vectors at `base` plus `<base>.vocab` (one token per line).
void save_embeddings_binary(const EmbeddingTable& table, const std::filesystem::path& base);
EmbeddingTable load_embeddings_binary(const std::filesystem::path& base);

TokenMatrix embed_sentence(const EmbeddingTable& table, std::span<const std::string> tokens);

EmbeddingTable generate_random_table(std::span<const std::string> vocab, Index dim,
                                     InitScheme scheme, std::uint64_t seed);

// Splits on single spaces; empty fields are dropped.
std::vector<std::string> split_tokens(std::string_view text);

}  // namespace randenc

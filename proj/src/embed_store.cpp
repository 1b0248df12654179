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

#include "randenc/embed_store.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "randenc/vector_io.hpp"

namespace randenc {
namespace fs = std::filesystem;

namespace {

bool parse_double(std::string_view field, double& out) {
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_integer(std::string_view field, long long& out) {
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t stop = std::min(text.find(' ', start), text.size());
    if (stop > start) out.emplace_back(text.substr(start, stop - start));
    start = stop + 1;
  }
  return out;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, RowMatrix matrix,
                               EmbeddingSource source, std::size_t duplicates_skipped)
    : tokens_(std::move(tokens)),
      matrix_(std::move(matrix)),
      source_(source),
      duplicates_skipped_(duplicates_skipped) {
  if (matrix_.cols() < 1) throw DimensionError("embedding dim must be positive");
  if (static_cast<Index>(tokens_.size()) != matrix_.rows())
    throw DimensionError("embedding table: token count does not match matrix rows");
  if (!matrix_.allFinite()) throw NumericalError("embedding table: non-finite entry");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<Index>(i)).second)
      throw Error("embedding table: duplicate token '" + tokens_[i] + "'");
  }
}

std::optional<Index> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Lookup EmbeddingTable::lookup(std::string_view token) const {
  if (auto row = find(token)) return {matrix_.row(*row).transpose(), false};
  return {Vector::Zero(dim()), true};
}

EmbeddingTable load_embeddings(const fs::path& path, std::optional<Index> expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file " + path.string());

  std::vector<std::string> tokens;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  std::size_t duplicates = 0;
  Index dim = 0;
  std::optional<Index> header_dim;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;

  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tokens(line);
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";

    if (first_content) {
      first_content = false;
      long long n = 0, d = 0;
      if (fields.size() == 2 && parse_integer(fields[0], n) && parse_integer(fields[1], d)) {
        if (n < 0 || d < 1) throw ParseError(where + "invalid count header");
        header_dim = static_cast<Index>(d);
        continue;
      }
    }
    if (fields.size() < 2) throw ParseError(where + "expected a token followed by values");
    const Index line_dim = static_cast<Index>(fields.size()) - 1;
    if (dim == 0) {
      dim = line_dim;
      if (header_dim && *header_dim != dim)
        throw ParseError(where + "dimension " + std::to_string(dim) +
                         " does not match header dimension " + std::to_string(*header_dim));
      if (expected_dim && *expected_dim != dim)
        throw DimensionError(where + "dimension " + std::to_string(dim) +
                             " does not match expected " + std::to_string(*expected_dim));
    } else if (line_dim != dim) {
      throw ParseError(where + "inconsistent dimensionality: " + std::to_string(line_dim) +
                       " values, expected " + std::to_string(dim));
    }
    std::vector<double> row(static_cast<std::size_t>(dim));
    for (Index j = 0; j < dim; ++j) {
      const std::string& f = fields[static_cast<std::size_t>(j) + 1];
      if (!parse_double(f, row[static_cast<std::size_t>(j)]) ||
          !std::isfinite(row[static_cast<std::size_t>(j)]))
        throw ParseError(where + "non-numeric field '" + f + "'");
    }
    if (!seen.insert(fields[0]).second) {
      ++duplicates;
      continue;
    }
    tokens.push_back(std::move(fields[0]));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (tokens.empty()) throw ParseError(path.string() + ": no embedding vectors found");

  RowMatrix matrix = Eigen::Map<const RowMatrix>(values.data(), static_cast<Index>(tokens.size()), dim);
  return EmbeddingTable(std::move(tokens), std::move(matrix), {}, duplicates);
}

void save_embeddings(const EmbeddingTable& table, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[32];
  for (Index i = 0; i < table.size(); ++i) {
    out << table.tokens()[static_cast<std::size_t>(i)];
    for (Index j = 0; j < table.dim(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), table.matrix()(i, j));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

void save_embeddings_binary(const EmbeddingTable& table, const fs::path& base) {
  write_vectors(base, Matrix(table.matrix()), Dtype::f64);
  std::ofstream vocab(base.string() + ".vocab");
  if (!vocab) throw Error("cannot write " + base.string() + ".vocab");
  for (const auto& t : table.tokens()) vocab << t << '\n';
}

EmbeddingTable load_embeddings_binary(const fs::path& base) {
  Matrix m = read_vectors(base);
  std::ifstream vocab(base.string() + ".vocab");
  if (!vocab) throw Error("cannot open " + base.string() + ".vocab");
  std::vector<std::string> tokens;
  for (std::string line; std::getline(vocab, line);) tokens.push_back(line);
  return EmbeddingTable(std::move(tokens), RowMatrix(m));
}

TokenMatrix embed_sentence(const EmbeddingTable& table, std::span<const std::string> tokens) {
  TokenMatrix out = TokenMatrix::Zero(static_cast<Index>(tokens.size()), table.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (auto row = table.find(tokens[i])) out.row(static_cast<Index>(i)) = table.matrix().row(*row);
  }
  return out;
}

EmbeddingTable generate_random_table(std::span<const std::string> vocab, Index dim,
                                     InitScheme scheme, std::uint64_t seed) {
  if (vocab.empty()) throw Error("generate_random_table: empty vocabulary");
  if (dim < 1) throw DimensionError("generate_random_table: dim must be positive");
  std::unordered_set<std::string_view> seen;
  for (const auto& t : vocab)
    if (!seen.insert(t).second) throw Error("generate_random_table: duplicate token '" + t + "'");
  RowMatrix m = init_matrix(static_cast<Index>(vocab.size()), dim, scheme,
                            SeededRng(seed, "embeddings"));
  return EmbeddingTable(std::vector<std::string>(vocab.begin(), vocab.end()), std::move(m),
                        {EmbeddingSource::Kind::random, scheme, seed});
}

}  // namespace randenc

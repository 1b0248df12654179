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

// Frozen random sentence encoders: bag of embeddings, bag of random
// embedding projections, random bidirectional LSTM and bidirectional echo
// state network. None of these parameters is ever trained.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "randenc/embed_store.hpp"
#include "randenc/numerics.hpp"
#include "randenc/types.hpp"

namespace randenc {

enum class Family { boe, borep, randlstm, esn };
enum class PoolKind { max, mean, sum };
enum class PadMode { length, padded };
enum class SortMode { sorted_by_length, as_given };
enum class Activation { none, relu, tanh };
enum class Direction { forward, backward };

std::string_view to_string(Family f);
std::string_view to_string(PoolKind k);
std::string_view to_string(PadMode m);
std::string_view to_string(SortMode m);
std::string_view to_string(Activation a);
Family parse_family(std::string_view s);
PoolKind parse_pool_kind(std::string_view s);
PadMode parse_pad_mode(std::string_view s);
SortMode parse_sort_mode(std::string_view s);
Activation parse_activation(std::string_view s);

struct PoolingSpec {
  PoolKind kind = PoolKind::max;
  PadMode pad_mode = PadMode::length;
  bool operator==(const PoolingSpec&) const = default;
};

// Column sums accumulated in ascending value order, so the result does not
// depend on the order of the rows.
template <typename Derived>
VectorX<typename Derived::Scalar> sorted_column_sums(const Eigen::MatrixBase<Derived>& states) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> out(states.cols());
  std::vector<Scalar> column(static_cast<std::size_t>(states.rows()));
  for (Index j = 0; j < states.cols(); ++j) {
    for (Index i = 0; i < states.rows(); ++i) column[static_cast<std::size_t>(i)] = states(i, j);
    std::sort(column.begin(), column.end());
    Scalar total(0);
    for (Scalar v : column) total += v;
    out(j) = total;
  }
  return out;
}

// Reduces per-position states (one row per position) to one vector.
// Length mode pools over the given rows. Padded mode pools as if
// n_max - n zero rows had been appended. An empty input pools to zero.
// Every kind is invariant to the order of the rows.
template <typename Derived>
VectorX<typename Derived::Scalar> pool(const Eigen::MatrixBase<Derived>& states, PoolingSpec spec,
                                       Index n_max) {
  using Scalar = typename Derived::Scalar;
  const Index n = states.rows();
  if (n > n_max) throw DimensionError("pool: sentence longer than n_max");
  if (n == 0) return VectorX<Scalar>::Zero(states.cols());
  const bool padded = spec.pad_mode == PadMode::padded && n_max > n;
  switch (spec.kind) {
    case PoolKind::max: {
      VectorX<Scalar> v = states.colwise().maxCoeff().transpose();
      if (padded) v = v.cwiseMax(Scalar(0));
      return v;
    }
    case PoolKind::mean: {
      const Index divisor = spec.pad_mode == PadMode::padded ? n_max : n;
      return sorted_column_sums(states) / static_cast<Scalar>(divisor);
    }
    case PoolKind::sum:
      return sorted_column_sums(states);
  }
  return VectorX<Scalar>::Zero(states.cols());
}

struct EncoderConfig {
  Family family = Family::borep;
  Index dim = 4096;        // output dimension D
  Index input_dim = 300;   // word embedding dimension d
  InitScheme init = InitScheme::heuristic;
  PoolingSpec pooling{};
  Activation activation = Activation::none;  // borep and esn
  double spectral_radius = 0.8;              // esn
  double input_scale = 0.1;                  // esn: W_in uniform on [-a, a]
  double sparsity = 0.0;                     // esn
  double leak = 1.0;                         // esn
  std::uint64_t seed = 0;

  bool operator==(const EncoderConfig&) const = default;
};

struct BoeParams {
  Index dim = 0;
  PoolingSpec pooling{};
};

struct BorepParams {
  Matrix projection;  // D x d
  Activation activation = Activation::none;
  PoolingSpec pooling{};
};

struct LstmDirection {
  Matrix w_ih;  // 4h x d, gate blocks (i, f, g, o)
  Matrix w_hh;  // 4h x h
  Vector b_ih;  // 4h
  Vector b_hh;  // 4h
};

struct LstmParams {
  LstmDirection forward;
  LstmDirection backward;
  Index hidden = 0;
  PoolingSpec pooling{};
};

struct EsnDirection {
  Matrix w_in;   // R x d
  Matrix w_res;  // R x R, sparsified then radius-scaled
};

struct EsnParams {
  EsnDirection forward;
  EsnDirection backward;
  double leak = 1.0;
  Activation activation = Activation::none;
  double spectral_radius = 0.8;
  double input_scale = 0.1;
  double sparsity = 0.0;
  PoolingSpec pooling{};
};

// One step of a standard forget-gate LSTM cell. Returns (h', c').
std::pair<Vector, Vector> lstm_step(const LstmDirection& params, const Vector& x, const Vector& h,
                                    const Vector& c);

// h = (1 - leak) h_prev + leak * act(W_in x + W_res h_prev). No input bias.
Vector esn_step(const EsnParams& params, Direction direction, const Vector& x,
                const Vector& h_prev);

// Reservoir trajectory of one direction from the initial state h0. Row t is
// the state after consuming position t in that direction's reading order.
Matrix esn_trajectory(const EsnParams& params, Direction direction, const TokenMatrix& tokens,
                      const Vector& h0);

// Per-position states before pooling (n x D). Recurrent families place the
// forward half first and the backward half second in each row.
Matrix borep_states(const BorepParams& params, const TokenMatrix& tokens);
Matrix lstm_states(const LstmParams& params, const TokenMatrix& tokens);
Matrix esn_states(const EsnParams& params, const TokenMatrix& tokens);

Vector encode_borep(const BorepParams& params, const TokenMatrix& tokens);
Vector encode_randlstm(const LstmParams& params, const TokenMatrix& tokens);
Vector encode_esn(const EsnParams& params, const TokenMatrix& tokens);

class Encoder {
 public:
  using Params = std::variant<BoeParams, BorepParams, LstmParams, EsnParams>;

  explicit Encoder(Params params);

  Family family() const;
  Index input_dim() const;
  Index output_dim() const;
  const PoolingSpec& pooling() const;
  const Params& params() const { return params_; }

  // Copy sharing all random parameters, with a different pooling spec.
  Encoder with_pooling(PoolingSpec spec) const;

  Matrix states(const TokenMatrix& tokens) const;

  // Pools states produced by states() and applies any post-pooling map.
  Vector finish(const Matrix& states, PoolingSpec spec, Index n_max) const;

  Vector encode(const TokenMatrix& tokens) const;
  Vector encode(const TokenMatrix& tokens, PadMode pad_mode, Index n_max) const;

 private:
  Params params_;
};

Encoder build_encoder(const EncoderConfig& config);

// Encodes many sentences; rows of the result follow the input order.
// Sentences are grouped into batches of `batch_size` after optional
// length sorting. In padded mode a batch's n_max is its longest member.
Matrix encode_batch(const Encoder& encoder, std::span<const TokenMatrix> sentences,
                    Index batch_size, SortMode sort_mode, PadMode pad_mode, int workers = 1);

}  // namespace randenc

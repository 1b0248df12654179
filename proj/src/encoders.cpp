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

#include "randenc/encoders.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "randenc/parallel.hpp"

namespace randenc {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<E, std::string_view> (&table)[N],
             const char* what) {
  for (const auto& [value, name] : table)
    if (name == s) return value;
  throw Error(std::string("unknown ") + what + ": " + std::string(s));
}

constexpr std::pair<Family, std::string_view> kFamilies[] = {
    {Family::boe, "boe"}, {Family::borep, "borep"}, {Family::randlstm, "randlstm"},
    {Family::esn, "esn"}};
constexpr std::pair<PoolKind, std::string_view> kPools[] = {
    {PoolKind::max, "max"}, {PoolKind::mean, "mean"}, {PoolKind::sum, "sum"}};
constexpr std::pair<PadMode, std::string_view> kPads[] = {{PadMode::length, "length"},
                                                          {PadMode::padded, "padded"}};
constexpr std::pair<SortMode, std::string_view> kSorts[] = {
    {SortMode::sorted_by_length, "sorted_by_length"}, {SortMode::as_given, "as_given"}};
constexpr std::pair<Activation, std::string_view> kActivations[] = {
    {Activation::none, "none"}, {Activation::relu, "relu"}, {Activation::tanh, "tanh"}};

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table)
    if (value == v) return name;
  return "?";
}

Vector sigmoid(const Vector& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

void apply_activation(Activation a, Eigen::Ref<Vector> v) {
  switch (a) {
    case Activation::none: break;
    case Activation::relu: v = v.cwiseMax(0.0); break;
    case Activation::tanh: v = v.array().tanh().matrix(); break;
  }
}

void check_input_dim(Index expected, const TokenMatrix& tokens) {
  if (tokens.rows() > 0 && tokens.cols() != expected)
    throw DimensionError("encoder expects " + std::to_string(expected) +
                         "-dimensional token rows, got " + std::to_string(tokens.cols()));
}

// Runs one LSTM direction; returns n x h states indexed by sentence position.
Matrix run_lstm(const LstmDirection& p, const TokenMatrix& tokens, bool reverse) {
  const Index n = tokens.rows();
  const Index h = p.w_hh.cols();
  // Input contributions for every position in one product.
  const Matrix input = (tokens * p.w_ih.transpose()).rowwise() + (p.b_ih + p.b_hh).transpose();
  Matrix out(n, h);
  Vector state = Vector::Zero(h);
  Vector cell = Vector::Zero(h);
  for (Index step = 0; step < n; ++step) {
    const Index t = reverse ? n - 1 - step : step;
    const Vector z = input.row(t).transpose() + p.w_hh * state;
    const Vector i = sigmoid(z.segment(0, h));
    const Vector f = sigmoid(z.segment(h, h));
    const Vector g = z.segment(2 * h, h).array().tanh().matrix();
    const Vector o = sigmoid(z.segment(3 * h, h));
    cell = f.cwiseProduct(cell) + i.cwiseProduct(g);
    state = o.cwiseProduct(cell.array().tanh().matrix());
    out.row(t) = state.transpose();
  }
  return out;
}

const EsnDirection& esn_direction(const EsnParams& p, Direction d) {
  return d == Direction::forward ? p.forward : p.backward;
}

// Runs one ESN direction from h0; rows indexed by sentence position.
Matrix run_esn(const EsnParams& p, Direction d, const TokenMatrix& tokens, const Vector& h0) {
  const EsnDirection& dir = esn_direction(p, d);
  const Index n = tokens.rows();
  const Matrix input = tokens * dir.w_in.transpose();
  Matrix out(n, dir.w_res.rows());
  Vector state = h0;
  Vector candidate(state.size());
  for (Index step = 0; step < n; ++step) {
    const Index t = d == Direction::backward ? n - 1 - step : step;
    candidate.noalias() = dir.w_res * state;
    candidate += input.row(t).transpose();
    apply_activation(p.activation, candidate);
    if (p.leak == 1.0)
      state = candidate;
    else
      state = (1.0 - p.leak) * state + p.leak * candidate;
    out.row(t) = state.transpose();
  }
  return out;
}

}  // namespace

std::string_view to_string(Family f) { return name_of(f, kFamilies); }
std::string_view to_string(PoolKind k) { return name_of(k, kPools); }
std::string_view to_string(PadMode m) { return name_of(m, kPads); }
std::string_view to_string(SortMode m) { return name_of(m, kSorts); }
std::string_view to_string(Activation a) { return name_of(a, kActivations); }
Family parse_family(std::string_view s) { return parse_enum(s, kFamilies, "encoder family"); }
PoolKind parse_pool_kind(std::string_view s) { return parse_enum(s, kPools, "pooling"); }
PadMode parse_pad_mode(std::string_view s) { return parse_enum(s, kPads, "pad mode"); }
SortMode parse_sort_mode(std::string_view s) { return parse_enum(s, kSorts, "sort mode"); }
Activation parse_activation(std::string_view s) {
  return parse_enum(s, kActivations, "activation");
}

std::pair<Vector, Vector> lstm_step(const LstmDirection& p, const Vector& x, const Vector& h,
                                    const Vector& c) {
  const Index hs = p.w_hh.cols();
  const Vector z = p.w_ih * x + p.w_hh * h + p.b_ih + p.b_hh;
  const Vector i = sigmoid(z.segment(0, hs));
  const Vector f = sigmoid(z.segment(hs, hs));
  const Vector g = z.segment(2 * hs, hs).array().tanh().matrix();
  const Vector o = sigmoid(z.segment(3 * hs, hs));
  Vector c_next = f.cwiseProduct(c) + i.cwiseProduct(g);
  Vector h_next = o.cwiseProduct(c_next.array().tanh().matrix());
  return {std::move(h_next), std::move(c_next)};
}

Vector esn_step(const EsnParams& p, Direction d, const Vector& x, const Vector& h_prev) {
  const EsnDirection& dir = esn_direction(p, d);
  Vector candidate = dir.w_in * x + dir.w_res * h_prev;
  apply_activation(p.activation, candidate);
  return (1.0 - p.leak) * h_prev + p.leak * candidate;
}

Matrix esn_trajectory(const EsnParams& p, Direction d, const TokenMatrix& tokens,
                      const Vector& h0) {
  check_input_dim(p.forward.w_in.cols(), tokens);
  if (h0.size() != p.forward.w_res.rows())
    throw DimensionError("esn_trajectory: initial state has the wrong size");
  Matrix by_position = run_esn(p, d, tokens, h0);
  if (d == Direction::forward) return by_position;
  return by_position.colwise().reverse();
}

Matrix borep_states(const BorepParams& p, const TokenMatrix& tokens) {
  check_input_dim(p.projection.cols(), tokens);
  // Row by row, so a token's state does not depend on its position.
  Matrix out(tokens.rows(), p.projection.rows());
  for (Index t = 0; t < tokens.rows(); ++t) {
    const Vector x = tokens.row(t).transpose();
    const Vector y = p.projection * x;
    out.row(t) = y.transpose();
  }
  return out;
}

Matrix lstm_states(const LstmParams& p, const TokenMatrix& tokens) {
  check_input_dim(p.forward.w_ih.cols(), tokens);
  Matrix out(tokens.rows(), 2 * p.hidden);
  if (tokens.rows() == 0) return out;
  out.leftCols(p.hidden) = run_lstm(p.forward, tokens, false);
  out.rightCols(p.hidden) = run_lstm(p.backward, tokens, true);
  return out;
}

Matrix esn_states(const EsnParams& p, const TokenMatrix& tokens) {
  check_input_dim(p.forward.w_in.cols(), tokens);
  const Index r = p.forward.w_res.rows();
  Matrix out(tokens.rows(), 2 * r);
  if (tokens.rows() == 0) return out;
  out.leftCols(r) = run_esn(p, Direction::forward, tokens, Vector::Zero(r));
  out.rightCols(r) = run_esn(p, Direction::backward, tokens, Vector::Zero(r));
  return out;
}

Vector encode_borep(const BorepParams& p, const TokenMatrix& tokens) {
  return Encoder(p).encode(tokens);
}

Vector encode_randlstm(const LstmParams& p, const TokenMatrix& tokens) {
  return Encoder(p).encode(tokens);
}

Vector encode_esn(const EsnParams& p, const TokenMatrix& tokens) {
  return Encoder(p).encode(tokens);
}

Encoder::Encoder(Params params) : params_(std::move(params)) {}

Family Encoder::family() const {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BoeParams>) return Family::boe;
        if constexpr (std::is_same_v<T, BorepParams>) return Family::borep;
        if constexpr (std::is_same_v<T, LstmParams>) return Family::randlstm;
        if constexpr (std::is_same_v<T, EsnParams>) return Family::esn;
      },
      params_);
}

Index Encoder::input_dim() const {
  return std::visit(
      [](const auto& p) -> Index {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BoeParams>) return p.dim;
        if constexpr (std::is_same_v<T, BorepParams>) return p.projection.cols();
        if constexpr (std::is_same_v<T, LstmParams>) return p.forward.w_ih.cols();
        if constexpr (std::is_same_v<T, EsnParams>) return p.forward.w_in.cols();
      },
      params_);
}

Index Encoder::output_dim() const {
  return std::visit(
      [](const auto& p) -> Index {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BoeParams>) return p.dim;
        if constexpr (std::is_same_v<T, BorepParams>) return p.projection.rows();
        if constexpr (std::is_same_v<T, LstmParams>) return 2 * p.hidden;
        if constexpr (std::is_same_v<T, EsnParams>) return 2 * p.forward.w_res.rows();
      },
      params_);
}

const PoolingSpec& Encoder::pooling() const {
  return std::visit([](const auto& p) -> const PoolingSpec& { return p.pooling; }, params_);
}

Encoder Encoder::with_pooling(PoolingSpec spec) const {
  Encoder copy = *this;
  std::visit([&](auto& p) { p.pooling = spec; }, copy.params_);
  return copy;
}

Matrix Encoder::states(const TokenMatrix& tokens) const {
  return std::visit(
      [&](const auto& p) -> Matrix {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BoeParams>) {
          check_input_dim(p.dim, tokens);
          return tokens;
        }
        if constexpr (std::is_same_v<T, BorepParams>) return borep_states(p, tokens);
        if constexpr (std::is_same_v<T, LstmParams>) return lstm_states(p, tokens);
        if constexpr (std::is_same_v<T, EsnParams>) return esn_states(p, tokens);
      },
      params_);
}

Vector Encoder::finish(const Matrix& states, PoolingSpec spec, Index n_max) const {
  if (states.rows() == 0) return Vector::Zero(output_dim());
  Vector v = pool(states, spec, n_max);
  // BOREP's optional nonlinearity acts on the pooled representation.
  if (const auto* p = std::get_if<BorepParams>(&params_)) {
    if (p->activation == Activation::relu) v = v.cwiseMax(0.0);
    if (p->activation == Activation::tanh) v = v.array().tanh().matrix();
  }
  return v;
}

Vector Encoder::encode(const TokenMatrix& tokens) const {
  return encode(tokens, PadMode::length, tokens.rows());
}

Vector Encoder::encode(const TokenMatrix& tokens, PadMode pad_mode, Index n_max) const {
  if (tokens.rows() == 0) {
    check_input_dim(input_dim(), tokens);
    return Vector::Zero(output_dim());
  }
  return finish(states(tokens), {pooling().kind, pad_mode}, n_max);
}

Encoder build_encoder(const EncoderConfig& cfg) {
  if (cfg.input_dim < 1) throw DimensionError("encoder input_dim must be positive");
  const SeededRng root(cfg.seed);
  switch (cfg.family) {
    case Family::boe:
      return Encoder(BoeParams{cfg.input_dim, cfg.pooling});

    case Family::borep: {
      if (cfg.dim < 1) throw DimensionError("encoder dim must be positive");
      if (cfg.activation == Activation::tanh)
        throw Error("borep activation must be none or relu");
      BorepParams p;
      p.projection = init_matrix(cfg.dim, cfg.input_dim, cfg.init, root.child("borep/W"));
      p.activation = cfg.activation;
      p.pooling = cfg.pooling;
      return Encoder(std::move(p));
    }

    case Family::randlstm: {
      if (cfg.dim < 2 || cfg.dim % 2 != 0)
        throw DimensionError("randlstm requires an even output dim");
      const Index h = cfg.dim / 2;
      // The fan term for every LSTM tensor is the hidden size.
      const Fan fan{h, 0};
      auto draw = [&](std::string_view dir) {
        const SeededRng base = root.child("lstm").child(dir);
        LstmDirection d;
        d.w_ih = init_matrix(4 * h, cfg.input_dim, cfg.init, base.child("W_ih"), fan);
        d.w_hh = init_matrix(4 * h, h, cfg.init, base.child("W_hh"), fan);
        d.b_ih = init_matrix(4 * h, 1, cfg.init, base.child("b_ih"), fan);
        d.b_hh = init_matrix(4 * h, 1, cfg.init, base.child("b_hh"), fan);
        return d;
      };
      LstmParams p;
      p.forward = draw("fwd");
      p.backward = draw("bwd");
      p.hidden = h;
      p.pooling = cfg.pooling;
      return Encoder(std::move(p));
    }

    case Family::esn: {
      if (cfg.dim < 2 || cfg.dim % 2 != 0)
        throw DimensionError("esn requires an even output dim");
      if (!(cfg.leak > 0.0 && cfg.leak <= 1.0)) throw Error("esn leak must lie in (0, 1]");
      if (!(cfg.spectral_radius > 0.0)) throw Error("esn spectral radius must be positive");
      if (!(cfg.input_scale > 0.0)) throw Error("esn input scale must be positive");
      if (!(cfg.sparsity >= 0.0 && cfg.sparsity < 1.0))
        throw Error("esn sparsity must lie in [0, 1)");
      const Index r = cfg.dim / 2;
      auto draw = [&](std::string_view dir) {
        const SeededRng base = root.child("esn").child(dir);
        EsnDirection d;
        d.w_in = uniform_matrix(r, cfg.input_dim, cfg.input_scale, base.child("Wi"));
        // initialize -> sparsify -> estimate radius -> scale
        for (int attempt = 0; attempt < 2; ++attempt) {
          const SeededRng wh = attempt == 0 ? base.child("Wh") : base.child("Wh/redraw");
          Matrix w = init_matrix(r, r, cfg.init, wh);
          w = sparsify(w, cfg.sparsity, wh.child("mask"));
          try {
            d.w_res = scale_spectral_radius(w, cfg.spectral_radius);
            return d;
          } catch (const NumericalError&) {
          }
        }
        throw NumericalError("esn reservoir has zero spectral radius after re-draw");
      };
      EsnParams p;
      p.forward = draw("fwd");
      p.backward = draw("bwd");
      p.leak = cfg.leak;
      p.activation = cfg.activation;
      p.spectral_radius = cfg.spectral_radius;
      p.input_scale = cfg.input_scale;
      p.sparsity = cfg.sparsity;
      p.pooling = cfg.pooling;
      return Encoder(std::move(p));
    }
  }
  throw Error("unknown encoder family");
}

Matrix encode_batch(const Encoder& encoder, std::span<const TokenMatrix> sentences,
                    Index batch_size, SortMode sort_mode, PadMode pad_mode, int workers) {
  if (batch_size < 1) throw Error("encode_batch: batch_size must be >= 1");
  const std::size_t m = sentences.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (sort_mode == SortMode::sorted_by_length) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sentences[a].rows() < sentences[b].rows();
    });
  }
  // n_max of the batch each sentence lands in.
  std::vector<Index> n_max(m, 0);
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < m; start += bs) {
    const std::size_t stop = std::min(m, start + bs);
    Index longest = 0;
    for (std::size_t k = start; k < stop; ++k) longest = std::max(longest, sentences[order[k]].rows());
    for (std::size_t k = start; k < stop; ++k) n_max[order[k]] = longest;
  }
  Matrix out(static_cast<Index>(m), encoder.output_dim());
  parallel_for(m, workers, [&](std::size_t i) {
    const Index cap = pad_mode == PadMode::padded ? n_max[i] : sentences[i].rows();
    out.row(static_cast<Index>(i)) = encoder.encode(sentences[i], pad_mode, cap).transpose();
  });
  return out;
}

}  // namespace randenc

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
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "randenc/encoders.hpp"

using namespace randenc;

namespace {

TokenMatrix tokens_of(std::initializer_list<std::initializer_list<double>> rows) {
  TokenMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

EncoderConfig config(Family f, Index dim, Index input_dim, std::uint64_t seed = 0) {
  EncoderConfig c;
  c.family = f;
  c.dim = dim;
  c.input_dim = input_dim;
  c.seed = seed;
  return c;
}

EsnParams identity_esn(Index d, double leak) {
  EsnParams p;
  p.forward = {Matrix::Identity(d, d), Matrix::Zero(d, d)};
  p.backward = p.forward;
  p.leak = leak;
  return p;
}

TokenMatrix random_tokens(Index n, Index d, unsigned seed) { return oracle::gaussian(n, d, seed); }

}  // namespace

TEST_CASE("enum names round-trip") {
  for (auto f : {Family::boe, Family::borep, Family::randlstm, Family::esn})
    CHECK(parse_family(to_string(f)) == f);
  for (auto k : {PoolKind::max, PoolKind::mean, PoolKind::sum})
    CHECK(parse_pool_kind(to_string(k)) == k);
  CHECK(parse_pad_mode("padded") == PadMode::padded);
  CHECK(parse_sort_mode("as_given") == SortMode::as_given);
  CHECK(parse_activation("relu") == Activation::relu);
  CHECK_THROWS_AS(parse_family("gru"), Error);
}

TEST_CASE("pool: max and mean in both pad modes") {
  const Matrix s = tokens_of({{1, -2}, {3, -1}});
  CHECK(pool(s, {PoolKind::max, PadMode::length}, 2) == Vector{{3, -1}});
  CHECK(pool(s, {PoolKind::max, PadMode::padded}, 3) == Vector{{3, 0}});
  CHECK(pool(s, {PoolKind::mean, PadMode::length}, 2) == Vector{{2, -1.5}});
  CHECK(pool(s, {PoolKind::mean, PadMode::padded}, 4) == Vector{{1, -0.75}});
  CHECK(pool(s, {PoolKind::sum, PadMode::length}, 2) == Vector{{4, -3}});
  CHECK(pool(s, {PoolKind::max, PadMode::padded}, 2) == Vector{{3, -1}});
  CHECK_THROWS_AS(pool(s, {PoolKind::max, PadMode::length}, 1), DimensionError);
  CHECK(pool(Matrix(0, 3), {PoolKind::mean, PadMode::length}, 0) == Vector::Zero(3));
}

TEST_CASE("BOREP with identity projection") {
  BorepParams p{Matrix::Identity(2, 2), Activation::none, {PoolKind::mean, PadMode::length}};
  CHECK(encode_borep(p, tokens_of({{1, 0}, {0, 1}})) == Vector{{0.5, 0.5}});
  p.activation = Activation::relu;
  p.pooling.kind = PoolKind::max;
  CHECK(encode_borep(p, tokens_of({{-1, 2}})) == Vector{{0, 2}});
}

TEST_CASE("BOREP without activation commutes with linear pooling") {
  for (PoolKind k : {PoolKind::sum, PoolKind::mean}) {
    EncoderConfig c = config(Family::borep, 64, 10, 5);
    c.pooling.kind = k;
    const Encoder enc = build_encoder(c);
    const Matrix& w = std::get<BorepParams>(enc.params()).projection;
    const TokenMatrix t = random_tokens(5, 10, 1);
    Vector pooled = t.colwise().sum().transpose();
    if (k == PoolKind::mean) pooled /= 5.0;
    CHECK((enc.encode(t) - w * pooled).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("BOREP projection bound and determinism") {
  const Encoder a = build_encoder(config(Family::borep, 4096, 300, 1));
  const Matrix& w = std::get<BorepParams>(a.params()).projection;
  CHECK(w.rows() == 4096);
  CHECK(w.cols() == 300);
  CHECK(w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(300.0));
  const Encoder b = build_encoder(config(Family::borep, 4096, 300, 1));
  CHECK(std::get<BorepParams>(b.params()).projection == w);
}

TEST_CASE("BOE and BOREP are bit-identical under token permutations") {
  std::mt19937 gen(7);
  for (Family f : {Family::boe, Family::borep})
    for (PoolKind k : {PoolKind::max, PoolKind::mean, PoolKind::sum})
      for (Activation a : {Activation::none, Activation::relu}) {
        if (f == Family::boe && a == Activation::relu) continue;
        EncoderConfig c = config(f, 96, 12, 3);
        c.pooling.kind = k;
        c.activation = a;
        const Encoder enc = build_encoder(c);
        for (int trial = 0; trial < 20; ++trial) {
          const TokenMatrix t = random_tokens(2 + trial % 9, 12, 100 + trial);
          std::vector<Index> perm(static_cast<std::size_t>(t.rows()));
          std::iota(perm.begin(), perm.end(), Index{0});
          std::shuffle(perm.begin(), perm.end(), gen);
          TokenMatrix shuffled(t.rows(), t.cols());
          for (Index i = 0; i < t.rows(); ++i) shuffled.row(i) = t.row(perm[static_cast<std::size_t>(i)]);
          CHECK((enc.encode(t).array() == enc.encode(shuffled).array()).all());
        }
      }
}

TEST_CASE("BOE is pooling over raw embeddings") {
  EncoderConfig c = config(Family::boe, 999, 3);
  c.pooling.kind = PoolKind::mean;
  const Encoder enc = build_encoder(c);
  CHECK(enc.output_dim() == 3);
  CHECK(enc.encode(tokens_of({{1, 2, 3}, {3, 2, 1}})) == Vector{{2, 2, 2}});
}

TEST_CASE("lstm_step: zero parameters and saturated gates") {
  LstmDirection z{Matrix::Zero(4, 2), Matrix::Zero(4, 1), Vector::Zero(4), Vector::Zero(4)};
  auto [h, c] = lstm_step(z, Vector::Ones(2), Vector::Zero(1), Vector::Zero(1));
  CHECK(h(0) == 0.0);
  CHECK(c(0) == 0.0);
  LstmDirection s = z;
  s.b_ih << 50, 50, 0, 50;  // i, f, g, o
  auto [h2, c2] = lstm_step(s, Vector::Ones(2), Vector::Zero(1), Vector::Ones(1));
  CHECK(c2(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(h2(0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-9));
}

TEST_CASE("lstm_step matches the scalar oracle") {
  const Encoder enc = build_encoder(config(Family::randlstm, 12, 5, 9));
  const LstmDirection& p = std::get<LstmParams>(enc.params()).forward;
  for (unsigned k = 0; k < 10; ++k) {
    const Vector x = oracle::gaussian(5, 1, k);
    Vector h = oracle::gaussian(6, 1, 100 + k).array().tanh();
    Vector c = oracle::gaussian(6, 1, 200 + k);
    const auto [h1, c1] = lstm_step(p, x, h, c);
    oracle::lstm_step(p.w_ih, p.w_hh, p.b_ih, p.b_hh, x, h, c);
    CHECK((h1 - h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((c1 - c).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("RandLSTM states match a step-by-step bidirectional oracle") {
  const Encoder enc = build_encoder(config(Family::randlstm, 8, 3, 2));
  const auto& p = std::get<LstmParams>(enc.params());
  const TokenMatrix t = random_tokens(6, 3, 4);
  const Matrix s = enc.states(t);
  Vector h = Vector::Zero(4), c = Vector::Zero(4);
  for (Index i = 0; i < 6; ++i) {
    oracle::lstm_step(p.forward.w_ih, p.forward.w_hh, p.forward.b_ih, p.forward.b_hh,
                      t.row(i).transpose(), h, c);
    CHECK((s.row(i).head(4).transpose() - h).cwiseAbs().maxCoeff() < 1e-12);
  }
  h.setZero();
  c.setZero();
  for (Index i = 5; i >= 0; --i) {
    oracle::lstm_step(p.backward.w_ih, p.backward.w_hh, p.backward.b_ih, p.backward.b_hh,
                      t.row(i).transpose(), h, c);
    CHECK((s.row(i).tail(4).transpose() - h).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(s.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("RandLSTM: reversal swaps the direction halves") {
  const Encoder enc = build_encoder(config(Family::randlstm, 16, 4, 1));
  auto p = std::get<LstmParams>(enc.params());
  std::swap(p.forward, p.backward);
  const Encoder swapped{p};
  const TokenMatrix t = random_tokens(7, 4, 2);
  const TokenMatrix r = t.colwise().reverse();
  const Vector a = enc.encode(r);
  const Vector b = swapped.encode(t);
  CHECK((a.head(8) - b.tail(8)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.tail(8) - b.head(8)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("RandLSTM single token and zero parameters") {
  const Encoder enc = build_encoder(config(Family::randlstm, 10, 3, 1));
  const TokenMatrix one = random_tokens(1, 3, 3);
  const Vector state = enc.states(one).row(0).transpose();
  for (PoolKind k : {PoolKind::max, PoolKind::mean, PoolKind::sum})
    CHECK((enc.with_pooling({k, PadMode::length}).encode(one) - state).cwiseAbs().maxCoeff() == 0.0);
  LstmParams z;
  z.hidden = 2;
  z.forward = {Matrix::Zero(8, 3), Matrix::Zero(8, 2), Vector::Zero(8), Vector::Zero(8)};
  z.backward = z.forward;
  CHECK(encode_randlstm(z, random_tokens(4, 3, 5)) == Vector::Zero(4));
}

TEST_CASE("LSTM parameters use the hidden-size bound and independent directions") {
  const Encoder enc = build_encoder(config(Family::randlstm, 32, 50, 4));
  const auto& p = std::get<LstmParams>(enc.params());
  const double bound = 1.0 / std::sqrt(16.0);
  for (const LstmDirection* d : {&p.forward, &p.backward}) {
    CHECK(d->w_ih.cwiseAbs().maxCoeff() <= bound);
    CHECK(d->w_hh.cwiseAbs().maxCoeff() <= bound);
    CHECK(d->b_ih.cwiseAbs().maxCoeff() <= bound);
    CHECK(d->b_hh.cwiseAbs().maxCoeff() <= bound);
  }
  CHECK(p.forward.w_ih != p.backward.w_ih);
}

TEST_CASE("esn_step identity configuration and leak arithmetic") {
  const Vector x{{0.3, -0.7}};
  CHECK(esn_step(identity_esn(2, 1.0), Direction::forward, x, Vector::Zero(2)) == x);
  CHECK(esn_step(identity_esn(2, 0.5), Direction::forward, x, Vector::Zero(2)) == 0.5 * x);
}

TEST_CASE("esn_step matches the update equations") {
  for (Activation a : {Activation::none, Activation::relu, Activation::tanh}) {
    EncoderConfig c = config(Family::esn, 20, 4, 2);
    c.activation = a;
    c.leak = 0.7;
    const Encoder enc = build_encoder(c);
    const auto& p = std::get<EsnParams>(enc.params());
    const Vector x = oracle::gaussian(4, 1, 1);
    const Vector h = oracle::gaussian(10, 1, 2);
    const Vector want = oracle::esn_step(p.backward.w_in, p.backward.w_res, x, h, 0.7,
                                         std::string(to_string(a)));
    CHECK((esn_step(p, Direction::backward, x, h) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identity ESN over two tokens with max pooling") {
  EsnParams p = identity_esn(2, 1.0);
  p.pooling.kind = PoolKind::max;
  CHECK(encode_esn(p, tokens_of({{1, 0}, {0, 1}})) == Vector{{1, 1, 1, 1}});
}

TEST_CASE("ESN states follow the recurrence in both directions") {
  EncoderConfig c = config(Family::esn, 12, 3, 8);
  c.activation = Activation::relu;
  const Encoder enc = build_encoder(c);
  const auto& p = std::get<EsnParams>(enc.params());
  const TokenMatrix t = random_tokens(5, 3, 9);
  const Matrix s = enc.states(t);
  Vector h = Vector::Zero(6);
  for (Index i = 0; i < 5; ++i) {
    h = oracle::esn_step(p.forward.w_in, p.forward.w_res, t.row(i).transpose(), h, 1.0, "relu");
    CHECK((s.row(i).head(6).transpose() - h).cwiseAbs().maxCoeff() < 1e-12);
  }
  h.setZero();
  for (Index i = 4; i >= 0; --i) {
    h = oracle::esn_step(p.backward.w_in, p.backward.w_res, t.row(i).transpose(), h, 1.0, "relu");
    CHECK((s.row(i).tail(6).transpose() - h).cwiseAbs().maxCoeff() < 1e-12);
  }
  const TokenMatrix one = random_tokens(1, 3, 1);
  CHECK(enc.encode(one) == enc.states(one).row(0).transpose());
}

TEST_CASE("ESN build: determinism, input scale, radius and independence") {
  EncoderConfig c = config(Family::esn, 8, 5, 3);
  c.spectral_radius = 0.8;
  c.sparsity = 0.5;
  c.input_scale = 0.1;
  const auto a = std::get<EsnParams>(build_encoder(c).params());
  const auto b = std::get<EsnParams>(build_encoder(c).params());
  CHECK(a.forward.w_in == b.forward.w_in);
  CHECK(a.forward.w_res == b.forward.w_res);
  CHECK(a.backward.w_res == b.backward.w_res);
  CHECK(a.forward.w_in.cwiseAbs().maxCoeff() <= 0.1);
  CHECK(a.forward.w_res != a.backward.w_res);
  for (double rho : {0.4, 0.6, 0.8, 1.0}) {
    c.dim = 64;
    c.spectral_radius = rho;
    const auto p = std::get<EsnParams>(build_encoder(c).params());
    for (const Matrix* w : {&p.forward.w_res, &p.backward.w_res})
      CHECK(std::abs(oracle::dense_spectral_radius(*w) - rho) <= 1e-3 * rho);
    CHECK((p.forward.w_res.array() == 0.0).count() >= 16 * 32);
  }
}

TEST_CASE("recurrent families need an even dimension") {
  CHECK_THROWS_AS(build_encoder(config(Family::esn, 7, 3)), DimensionError);
  CHECK_THROWS_AS(build_encoder(config(Family::randlstm, 9, 3)), DimensionError);
}

TEST_CASE("dimension mismatch is rejected") {
  for (Family f : {Family::boe, Family::borep, Family::randlstm, Family::esn}) {
    const Encoder enc = build_encoder(config(f, 8, 3));
    CHECK_THROWS_AS(enc.encode(random_tokens(2, 4, 1)), DimensionError);
  }
}

TEST_CASE("empty sentences encode to zero for every family") {
  for (Family f : {Family::boe, Family::borep, Family::randlstm, Family::esn}) {
    const Encoder enc = build_encoder(config(f, 8, 3));
    CHECK(enc.encode(TokenMatrix(0, 3)) == Vector::Zero(enc.output_dim()));
  }
}

TEST_CASE("echo-state contraction from different initial states") {
  for (double rho : {0.4, 0.6, 0.8})
    for (Activation a : {Activation::none, Activation::relu}) {
      double ratio_sum = 0.0;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        EncoderConfig c = config(Family::esn, 100, 10, seed);
        c.spectral_radius = rho;
        c.activation = a;
        const Encoder enc = build_encoder(c);
        const auto& p = std::get<EsnParams>(enc.params());
        const Vector x = oracle::gaussian(10, 1, static_cast<unsigned>(seed));
        TokenMatrix t(100, 10);
        for (Index i = 0; i < 100; ++i) t.row(i) = x.transpose();
        const Vector h0 = oracle::gaussian(50, 1, 10 + static_cast<unsigned>(seed));
        const Vector h1 = oracle::gaussian(50, 1, 20 + static_cast<unsigned>(seed));
        const Matrix ta = esn_trajectory(p, Direction::forward, t, h0);
        const Matrix tb = esn_trajectory(p, Direction::forward, t, h1);
        ratio_sum += (ta.row(99) - tb.row(99)).norm() / (h0 - h1).norm();
      }
      CHECK(ratio_sum / 5 <= 1e-3);
    }
}

TEST_CASE("encode_batch: length mode ignores batching, ordering and threads") {
  const Encoder enc = build_encoder(config(Family::esn, 16, 4, 1));
  std::vector<TokenMatrix> sentences;
  for (unsigned k = 0; k < 30; ++k) sentences.push_back(random_tokens(1 + k % 7, 4, k));
  const Matrix ref = encode_batch(enc, sentences, 1, SortMode::as_given, PadMode::length);
  CHECK(encode_batch(enc, sentences, 64, SortMode::sorted_by_length, PadMode::length) == ref);
  CHECK(encode_batch(enc, sentences, 4, SortMode::as_given, PadMode::length, 3) == ref);
  for (std::size_t i = 0; i < sentences.size(); ++i)
    CHECK(ref.row(static_cast<Index>(i)).transpose() == enc.encode(sentences[i]));
}

TEST_CASE("padded mode: a short sentence sharing a batch with a long one") {
  EncoderConfig c = config(Family::borep, 32, 4, 2);
  const Encoder enc = build_encoder(c);
  const TokenMatrix shorter = random_tokens(2, 4, 1);
  const TokenMatrix longer = random_tokens(5, 4, 2);
  const std::vector<TokenMatrix> both{shorter, longer};
  const Matrix together = encode_batch(enc, both, 2, SortMode::as_given, PadMode::padded);
  const Matrix apart = encode_batch(enc, both, 1, SortMode::as_given, PadMode::padded);
  const Matrix states = enc.states(shorter);
  const bool some_negative = (states.colwise().maxCoeff().array() < 0.0).any();
  REQUIRE(some_negative);
  CHECK(together.row(0) != apart.row(0));
  CHECK(together.row(1) == apart.row(1));
  // Sparsing rule: zero where every true position is negative, unchanged elsewhere.
  for (Index j = 0; j < 32; ++j) {
    const double m = states.col(j).maxCoeff();
    CHECK(together(0, j) == (m < 0.0 ? 0.0 : m));
  }
}

TEST_CASE("padded mode: sorting changes the grouping") {
  EncoderConfig c = config(Family::boe, 2, 2);
  const Encoder enc = build_encoder(c);
  const TokenMatrix neg = tokens_of({{-1, -1}}), pos = tokens_of({{1, 1}}), mix = tokens_of({{1, -1}});
  auto cat = [](std::initializer_list<TokenMatrix> parts) {
    Index n = 0;
    for (const auto& p : parts) n += p.rows();
    TokenMatrix out(n, 2);
    Index r = 0;
    for (const auto& p : parts) out.middleRows(r, p.rows()) = p, r += p.rows();
    return out;
  };
  const std::vector<TokenMatrix> corpus{cat({neg, neg}), cat({pos, mix, pos, mix, pos}), neg,
                                        cat({mix, neg, mix})};
  const Matrix given = encode_batch(enc, corpus, 2, SortMode::as_given, PadMode::padded);
  const Matrix sorted = encode_batch(enc, corpus, 2, SortMode::sorted_by_length, PadMode::padded);
  CHECK(given != sorted);
  CHECK(given.row(0) == Vector::Zero(2).transpose());
  CHECK(sorted.row(0) == Vector{{-1, -1}}.transpose());
  CHECK_THROWS_AS(encode_batch(enc, corpus, 0, SortMode::as_given, PadMode::padded), Error);
}

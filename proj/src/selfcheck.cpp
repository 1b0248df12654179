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

#include "randenc/selfcheck.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "randenc/classifier.hpp"
#include "randenc/diagnostics.hpp"
#include "randenc/encoders.hpp"
#include "randenc/numerics.hpp"
#include "randenc/rng.hpp"

namespace randenc {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

CheckLine orthogonality() {
  double worst = 0.0;
  const Index shapes[][2] = {{8, 8}, {16, 4}, {4, 16}, {64, 32}, {100, 300}};
  int k = 0;
  for (const auto& s : shapes) {
    const Matrix q =
        init_matrix(s[0], s[1], InitScheme::orthogonal, SeededRng(k++, "selfcheck/orth"));
    const Matrix g = s[0] >= s[1] ? Matrix(q.transpose() * q) : Matrix(q * q.transpose());
    worst = std::max(worst, (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  return {"orthogonal init", worst < 1e-6, "max |Q'Q - I| = " + num(worst)};
}

CheckLine spectral_radius() {
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Matrix m = init_matrix(32, 32, InitScheme::normal, SeededRng(k, "selfcheck/rho"));
    const double dense = Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
    const double est = estimate_spectral_radius(m).radius;
    worst = std::max(worst, std::abs(est - dense) / dense);
  }
  return {"spectral radius", worst < 1e-3, "max relative error = " + num(worst)};
}

CheckLine echo_state() {
  EncoderConfig cfg;
  cfg.family = Family::esn;
  cfg.dim = 64;
  cfg.input_dim = 8;
  cfg.spectral_radius = 0.6;
  const Encoder enc = build_encoder(cfg);
  const auto& p = std::get<EsnParams>(enc.params());
  RandomStream rng = SeededRng(1, "selfcheck/esp").stream();
  TokenMatrix tokens(100, 8);
  Vector x(8);
  for (Index j = 0; j < 8; ++j) x(j) = rng.normal();
  for (Index t = 0; t < 100; ++t) tokens.row(t) = x.transpose();
  Vector a(32), b(32);
  for (Index j = 0; j < 32; ++j) {
    a(j) = rng.uniform(-1, 1);
    b(j) = rng.uniform(-1, 1);
  }
  const Matrix ta = esn_trajectory(p, Direction::forward, tokens, a);
  const Matrix tb = esn_trajectory(p, Direction::forward, tokens, b);
  const double ratio = (ta.row(99) - tb.row(99)).norm() / (a - b).norm();
  return {"echo state property", ratio <= 1e-3, "final/initial discrepancy = " + num(ratio)};
}

CheckLine permutation_invariance() {
  EncoderConfig cfg;
  cfg.family = Family::borep;
  cfg.dim = 128;
  cfg.input_dim = 16;
  const Encoder enc = build_encoder(cfg);
  RandomStream rng = SeededRng(2, "selfcheck/perm").stream();
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(12));
    TokenMatrix s(n, 16);
    for (Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
    TokenMatrix shuffled = s;
    for (Index i = n; i > 1; --i) shuffled.row(i - 1).swap(shuffled.row(static_cast<Index>(rng.below(i))));
    failures += (enc.encode(s).array() != enc.encode(shuffled).array()).any();
  }
  return {"permutation invariance", failures == 0,
          std::to_string(failures) + " of 50 permutations changed the vector"};
}

CheckLine gradient() {
  RandomStream rng = SeededRng(3, "selfcheck/grad").stream();
  LinearHead head = LinearHead::zeros(HeadKind::classification, 3, 5);
  for (Index i = 0; i < head.weights.size(); ++i) head.weights.data()[i] = rng.normal();
  for (Index i = 0; i < head.bias.size(); ++i) head.bias(i) = rng.normal();
  Examples ex;
  ex.features = Matrix(7, 5);
  for (Index i = 0; i < ex.features.size(); ++i) ex.features.data()[i] = rng.normal();
  for (int i = 0; i < 7; ++i) ex.labels.push_back(static_cast<int>(rng.below(3)));
  const double l2 = 0.01, h = 1e-5;
  const LossGradient g = loss_and_gradient(head, ex, l2);
  double worst = 0.0;
  for (Index i = 0; i < head.weights.size(); ++i) {
    LinearHead up = head, down = head;
    up.weights.data()[i] += h;
    down.weights.data()[i] -= h;
    const double fd =
        (loss_and_gradient(up, ex, l2).loss - loss_and_gradient(down, ex, l2).loss) / (2 * h);
    const double an = g.grad_weights.data()[i];
    worst = std::max(worst, std::abs(fd - an) / std::max(1e-8, std::abs(fd) + std::abs(an)));
  }
  return {"cross-entropy gradient", worst < 1e-4, "max relative error = " + num(worst)};
}

CheckLine padding_mechanism() {
  const SyntheticTask t = padding_corpus();
  EncoderConfig cfg;
  cfg.family = Family::boe;
  cfg.dim = 2;
  cfg.input_dim = 2;
  const Encoder enc = build_encoder(cfg);
  const auto one = sparsed_stats(enc, t.table, t.dataset, 1, SortMode::as_given);
  const auto given = sparsed_stats(enc, t.table, t.dataset, 2, SortMode::as_given);
  const bool ok = one.sparsed == 0 && given.sparsed > 0;
  return {"padded max pooling", ok,
          "batch 1: " + std::to_string(one.sparsed) + " sparsed, batch 2: " +
              std::to_string(given.sparsed) + " sparsed"};
}

}  // namespace

std::vector<CheckLine> run_selfcheck() {
  return {orthogonality(), spectral_radius(), echo_state(), permutation_invariance(), gradient(),
          padding_mechanism()};
}

}  // namespace randenc

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

// Seeded random matrices, orthogonalization, spectral-radius control and
// sparsification. Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "randenc/rng.hpp"
#include "randenc/types.hpp"

namespace randenc {

enum class InitScheme { heuristic, uniform01, normal, orthogonal, he, xavier };

std::string_view to_string(InitScheme scheme);
InitScheme parse_init_scheme(std::string_view name);

// Fan terms used by the bounded schemes. Zero means "take it from the
// shape": fan_in = cols, fan_out = rows.
struct Fan {
  Index in = 0;
  Index out = 0;
};

// Orthonormalizes the short side of `m`: rows when rows <= cols, columns
// otherwise. Signs are fixed so that the triangular factor has a positive
// diagonal, which makes the result a deterministic function of `m`.
// Throws NumericalError when the short side is numerically rank deficient.
template <typename Derived>
MatrixX<typename Derived::Scalar> orthogonalize(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = MatrixX<Scalar>;
  const bool wide = m.rows() <= m.cols();
  // Tall view: the columns of `tall` are the vectors to orthonormalize.
  Mat tall = wide ? Mat(m.transpose()) : Mat(m);
  if (!tall.allFinite()) throw NumericalError("orthogonalize: non-finite input");
  const Index k = tall.cols();
  Eigen::HouseholderQR<Mat> qr(tall);
  const Mat r = qr.matrixQR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Scalar scale = r.cwiseAbs().maxCoeff();
  const Scalar floor = scale * std::numeric_limits<Scalar>::epsilon() *
                       static_cast<Scalar>(std::max(tall.rows(), k)) * Scalar(16);
  Mat q = qr.householderQ() * Mat::Identity(tall.rows(), k);
  for (Index j = 0; j < k; ++j) {
    const Scalar d = r(j, j);
    if (!(std::abs(d) > floor)) {
      throw NumericalError("orthogonalize: rank deficient input");
    }
    if (d < Scalar(0)) q.col(j) = -q.col(j);
  }
  if (wide) return q.transpose();
  return q;
}

// rows x cols matrix, entries i.i.d. uniform on [-bound, bound], drawn in
// column-major order.
template <typename Scalar = double>
MatrixX<Scalar> uniform_matrix(Index rows, Index cols, double bound, const SeededRng& rng) {
  if (rows < 1 || cols < 1) throw DimensionError("uniform_matrix: rows and cols must be >= 1");
  RandomStream stream = rng.stream();
  MatrixX<Scalar> out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(stream.uniform(-bound, bound));
  return out;
}

// rows x cols matrix with i.i.d. entries drawn per `scheme` from `rng`.
template <typename Scalar = double>
MatrixX<Scalar> init_matrix(Index rows, Index cols, InitScheme scheme, const SeededRng& rng,
                            Fan fan = {}) {
  if (rows < 1 || cols < 1) throw DimensionError("init_matrix: rows and cols must be >= 1");
  const double fan_in = static_cast<double>(fan.in > 0 ? fan.in : cols);
  const double fan_out = static_cast<double>(fan.out > 0 ? fan.out : rows);
  RandomStream stream = rng.stream();
  MatrixX<Scalar> out(rows, cols);

  auto fill_uniform = [&](double bound) {
    // Column-major fill; the draw order is part of the reproducibility contract.
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i)
        out(i, j) = static_cast<Scalar>(stream.uniform(-bound, bound));
  };
  auto fill_normal = [&](double stddev) {
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(stddev * stream.normal());
  };

  switch (scheme) {
    case InitScheme::heuristic:
      fill_uniform(1.0 / std::sqrt(fan_in));
      break;
    case InitScheme::uniform01:
      fill_uniform(0.1);
      break;
    case InitScheme::normal:
      fill_normal(1.0);
      break;
    case InitScheme::he:
      fill_normal(std::sqrt(2.0 / fan_in));
      break;
    case InitScheme::xavier:
      fill_uniform(std::sqrt(6.0 / (fan_in + fan_out)));
      break;
    case InitScheme::orthogonal: {
      // A failed attempt draws a fresh heuristic sample from the same stream.
      constexpr int kAttempts = 8;
      for (int attempt = 0; attempt < kAttempts; ++attempt) {
        fill_uniform(1.0 / std::sqrt(fan_in));
        try {
          return orthogonalize(out);
        } catch (const NumericalError&) {
        }
      }
      throw NumericalError("init_matrix: orthogonal sample stayed rank deficient");
    }
  }
  return out;
}

struct SpectralEstimate {
  double radius = 0.0;
  bool converged = false;
  int iterations = 0;
};

namespace detail {

// Gelfand formula through repeated squaring with k = 2^j. The estimate is
// (log ||M^2k|| - log ||M^k||) / k, which cancels the constant factor of the
// norm. The power is renormalized after each squaring and only its log norm
// is tracked, so nothing overflows.
inline SpectralEstimate radius_by_squaring(const Matrix& m, double tol, int max_iters) {
  SpectralEstimate est;
  double s = m.norm();
  if (s == 0.0 || !std::isfinite(s)) {
    est.radius = std::isfinite(s) ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    est.converged = std::isfinite(s);
    return est;
  }
  Matrix a = m / s;
  double log_norm = std::log(s);  // log ||M^k||
  double power = 1.0;             // k
  double log_rho = log_norm;
  for (int it = 1; it <= max_iters; ++it) {
    Matrix b = a * a;
    s = b.norm();
    est.iterations = it;
    if (s == 0.0) {  // nilpotent to working precision
      est.radius = 0.0;
      est.converged = true;
      return est;
    }
    const double next = (log_norm + std::log(s)) / power;
    const double delta = std::abs(next - log_rho);
    log_rho = next;
    log_norm = 2.0 * log_norm + std::log(s);
    power *= 2.0;
    a = b / s;
    const double rho = std::exp(log_rho);
    if (it >= 4 && rho * delta <= 0.5 * tol * std::max(rho, 1.0)) {
      est.radius = rho;
      est.converged = true;
      return est;
    }
  }
  est.radius = std::exp(log_rho);
  return est;
}

// Norm growth of M^k v averaged over the second half of the run, for
// matrices too large to square repeatedly.
inline SpectralEstimate radius_by_vector_growth(const Matrix& m, double tol, int max_iters) {
  SpectralEstimate est;
  const Index n = m.rows();
  RandomStream stream = SeededRng(0x5eed5eedULL, "spectral/start").stream();
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = stream.normal();
  x.normalize();
  std::vector<double> growth;
  growth.reserve(static_cast<std::size_t>(max_iters));
  constexpr int kBlock = 64;
  double previous = -1.0;
  for (int it = 1; it <= max_iters; ++it) {
    Vector y = m * x;
    const double g = y.norm();
    est.iterations = it;
    if (g == 0.0) {
      est.radius = 0.0;
      est.converged = true;
      return est;
    }
    growth.push_back(std::log(g));
    x = y / g;
    if (it % kBlock == 0 && it >= 4 * kBlock) {
      const std::size_t half = growth.size() / 2;
      const double mean_log =
          std::accumulate(growth.begin() + static_cast<std::ptrdiff_t>(half), growth.end(), 0.0) /
          static_cast<double>(growth.size() - half);
      const double rho = std::exp(mean_log);
      est.radius = rho;
      if (previous >= 0.0 && std::abs(rho - previous) <= 0.25 * tol * std::max(rho, 1.0)) {
        est.converged = true;
        return est;
      }
      previous = rho;
    }
  }
  if (growth.empty()) return est;
  const std::size_t half = growth.size() / 2;
  est.radius = std::exp(
      std::accumulate(growth.begin() + static_cast<std::ptrdiff_t>(half), growth.end(), 0.0) /
      static_cast<double>(growth.size() - half));
  return est;
}

}  // namespace detail

// Matrices up to this order use repeated squaring; larger ones use vector
// norm growth.
inline constexpr Index kSquaringMaxOrder = 512;

// Spectral radius by norm-growth iteration. `max_iters` counts squarings in
// the dense route and matrix-vector products in the vector route; zero picks
// a default for the route. Returns the best estimate with converged=false
// when the iteration budget runs out.
template <typename Derived>
SpectralEstimate estimate_spectral_radius(const Eigen::MatrixBase<Derived>& m, double tol = 1e-7,
                                          int max_iters = 0) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionError("estimate_spectral_radius: matrix must be square and non-empty");
  if (!(tol > 0.0)) throw Error("estimate_spectral_radius: tol must be positive");
  const Matrix md = m.template cast<double>();
  if (md.rows() <= kSquaringMaxOrder)
    return detail::radius_by_squaring(md, tol, max_iters > 0 ? max_iters : 64);
  return detail::radius_by_vector_growth(md, tol, max_iters > 0 ? max_iters : 20000);
}

// (target / rho_hat(m)) * m. Throws NumericalError when rho_hat is zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> scale_spectral_radius(const Eigen::MatrixBase<Derived>& m,
                                                        double target, double tol = 1e-7) {
  using Scalar = typename Derived::Scalar;
  if (!(target > 0.0)) throw Error("scale_spectral_radius: target must be positive");
  const SpectralEstimate est = estimate_spectral_radius(m, tol);
  if (!(est.radius > 0.0) || !std::isfinite(est.radius))
    throw NumericalError("scale_spectral_radius: spectral radius is zero, cannot scale");
  return m * static_cast<Scalar>(target / est.radius);
}

// Zeroes exactly round(fraction * size) entries chosen uniformly without
// replacement. Entries are addressed in column-major order.
template <typename Derived>
MatrixX<typename Derived::Scalar> sparsify(const Eigen::MatrixBase<Derived>& m, double fraction,
                                           const SeededRng& rng) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw Error("sparsify: fraction must lie in [0, 1)");
  MatrixX<typename Derived::Scalar> out = m;
  const auto total = static_cast<std::uint64_t>(out.size());
  const auto count = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(total)));
  if (count == 0) return out;
  std::vector<std::uint64_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::uint64_t{0});
  RandomStream stream = rng.stream();
  // Partial Fisher-Yates: the first `count` slots are the sample.
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t j = i + stream.below(total - i);
    std::swap(idx[i], idx[j]);
    out.data()[idx[i]] = 0;
  }
  return out;
}

}  // namespace randenc

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

#include "randenc/metrics.hpp"

#include <cmath>

#include "randenc/types.hpp"

namespace randenc {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw DimensionError("accuracy: length mismatch");
  if (labels.empty()) throw Error("accuracy: no examples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
  if (x.size() < 2) throw Error("pearson: needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("pearson: constant input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace randenc

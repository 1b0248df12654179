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

#include <span>

namespace randenc {

// Fraction of positions where predictions equal labels.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Sample Pearson correlation. Throws on length mismatch, fewer than two
// points, or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace randenc

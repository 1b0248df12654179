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
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace randenc {

// Stateful stream of random draws. Built only from SeededRng::stream().
//
// Every distribution is implemented on top of the raw 64-bit output of
// std::mt19937_64, whose sequence is fixed by the standard; the library
// distributions in <random> are implementation-defined and are not used.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

  // Unbiased integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Immutable (seed, stream label) descriptor. Distinct labels give
// independent streams, so adding a parameter draw elsewhere never shifts
// the values of an existing one.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::string label = {})
      : seed_(seed), label_(std::move(label)) {}

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

  // Descriptor for the sub-stream "<label>/<name>".
  SeededRng child(std::string_view name) const;

  // Fresh engine positioned at the start of this stream.
  RandomStream stream() const;

  bool operator==(const SeededRng&) const = default;

 private:
  std::uint64_t seed_;
  std::string label_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace randenc

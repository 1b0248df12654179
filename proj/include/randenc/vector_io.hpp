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
#include <string>

#include "randenc/types.hpp"

namespace randenc {

// Binary vector format: a JSON manifest
//   {"count": N, "dim": D, "dtype": "f32", "byte_order": "little", "data": "<file>"}
// next to a raw file of N*D little-endian floats, row-major.
enum class Dtype { f32, f64 };

struct VectorManifest {
  std::uint64_t count = 0;
  std::uint64_t dim = 0;
  Dtype dtype = Dtype::f32;
  std::string data_file;
};

// Writes `<base>.json` and `<base>.bin`. Rows of `rows` are the vectors.
void write_vectors(const std::filesystem::path& base, const Matrix& rows,
                   Dtype dtype = Dtype::f32);

// Accepts either the base path or the manifest path.
Matrix read_vectors(const std::filesystem::path& base_or_manifest);

VectorManifest read_manifest(const std::filesystem::path& manifest);

std::filesystem::path manifest_path(const std::filesystem::path& base_or_manifest);

}  // namespace randenc

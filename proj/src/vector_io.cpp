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

#include "randenc/vector_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace randenc {
namespace fs = std::filesystem;

namespace {

template <typename UInt>
void put_le(std::vector<char>& buf, UInt bits) {
  for (std::size_t b = 0; b < sizeof(UInt); ++b)
    buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

template <typename UInt>
UInt get_le(const char* p) {
  UInt v = 0;
  for (std::size_t b = 0; b < sizeof(UInt); ++b)
    v |= static_cast<UInt>(static_cast<unsigned char>(p[b])) << (8 * b);
  return v;
}

fs::path with_suffix(const fs::path& base, const char* suffix) {
  return fs::path(base.string() + suffix);
}

}  // namespace

fs::path manifest_path(const fs::path& base_or_manifest) {
  if (base_or_manifest.extension() == ".json") return base_or_manifest;
  return with_suffix(base_or_manifest, ".json");
}

void write_vectors(const fs::path& base, const Matrix& rows, Dtype dtype) {
  const fs::path data = with_suffix(base, ".bin");
  std::vector<char> buf;
  const std::size_t width = dtype == Dtype::f32 ? 4 : 8;
  buf.reserve(static_cast<std::size_t>(rows.size()) * width);
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) {
      if (dtype == Dtype::f32)
        put_le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(rows(i, j))));
      else
        put_le(buf, std::bit_cast<std::uint64_t>(rows(i, j)));
    }
  }
  {
    std::ofstream out(data, std::ios::binary);
    if (!out) throw Error("cannot write " + data.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  nlohmann::ordered_json manifest = {
      {"count", rows.rows()},
      {"dim", rows.cols()},
      {"dtype", dtype == Dtype::f32 ? "f32" : "f64"},
      {"byte_order", "little"},
      {"data", data.filename().string()},
  };
  std::ofstream out(manifest_path(base));
  if (!out) throw Error("cannot write " + manifest_path(base).string());
  out << manifest.dump(2) << '\n';
}

VectorManifest read_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot open vector manifest " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  VectorManifest m;
  try {
    m.count = j.at("count").get<std::uint64_t>();
    m.dim = j.at("dim").get<std::uint64_t>();
    const auto dtype = j.at("dtype").get<std::string>();
    if (dtype == "f32")
      m.dtype = Dtype::f32;
    else if (dtype == "f64")
      m.dtype = Dtype::f64;
    else
      throw ParseError(manifest.string() + ": unsupported dtype " + dtype);
    if (j.at("byte_order").get<std::string>() != "little")
      throw ParseError(manifest.string() + ": byte_order must be little");
    m.data_file = j.contains("data") ? j["data"].get<std::string>()
                                     : manifest.stem().string() + ".bin";
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  return m;
}

Matrix read_vectors(const fs::path& base_or_manifest) {
  const fs::path mpath = manifest_path(base_or_manifest);
  const VectorManifest m = read_manifest(mpath);
  const fs::path data = mpath.parent_path() / m.data_file;
  std::ifstream in(data, std::ios::binary);
  if (!in) throw Error("cannot open vector data " + data.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t width = m.dtype == Dtype::f32 ? 4 : 8;
  if (buf.size() != m.count * m.dim * width)
    throw ParseError(data.string() + ": size does not match manifest");
  Matrix out(static_cast<Index>(m.count), static_cast<Index>(m.dim));
  const char* p = buf.data();
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j, p += width) {
      out(i, j) = m.dtype == Dtype::f32
                      ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)))
                      : std::bit_cast<double>(get_le<std::uint64_t>(p));
    }
  }
  return out;
}

}  // namespace randenc

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

// Run configuration shared by all subcommands. Stored as INI with
// [encoder], [protocol], [data] and [output] sections; command-line flags
// override file values.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "randenc/encoders.hpp"
#include "randenc/evalharness.hpp"
#include "randenc/numerics.hpp"

namespace randenc {

struct RunConfig {
  // [encoder]
  EncoderConfig encoder{};
  SortMode sort = SortMode::sorted_by_length;
  Index batch_size = 64;  // encoding batch size

  // [protocol]
  SplitMode split = SplitMode::provided_splits;
  int folds = 10;
  int seeds = 5;
  TuningMode tuning = TuningMode::per_task;
  std::string grid = "default";  // default | none
  bool l2_sweep = false;
  double l2 = 0.0;
  int max_epochs = 200;
  int patience = 5;
  int workers = 1;

  // [data]
  std::string embeddings;      // word vector file (text, or binary base)
  bool random_table = false;   // generate a random table over the data vocabulary
  Index random_dim = 300;
  InitScheme random_scheme = InitScheme::normal;
  std::vector<std::string> tasks;  // dataset .jsonl paths
  std::string input;               // encode: sentences (.txt lines or .jsonl)
  std::string vectors;             // project: binary vector base or manifest
  Index target_dim = 4096;         // project
  std::vector<Index> dims = {512, 1024, 2048, 4096, 8192, 12288, 24576};  // sweep-dim
  std::string synthetic = "word_content";                                 // gen-synthetic
  std::size_t examples = 0;  // gen-synthetic; 0 keeps the kind's default

  // [output]
  std::string out = "out";

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config_string(const std::string& ini);
RunConfig load_config(const std::filesystem::path& path);
std::string print_config(const RunConfig& config);

// Exactly one embedding source; referenced input files exist.
void validate_config(const RunConfig& config, bool need_embeddings, bool need_tasks);

Protocol make_protocol(const RunConfig& config);

}  // namespace randenc

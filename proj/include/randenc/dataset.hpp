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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace randenc {

enum class TaskKind { classification_single, classification_pair, relatedness_pair, probing };
enum class Split { train, dev, test };

std::string_view to_string(TaskKind k);
std::string_view to_string(Split s);
TaskKind parse_task_kind(std::string_view s);

struct Example {
  std::vector<std::string> text;
  std::optional<std::vector<std::string>> text2;
  std::string label;   // classification kinds
  double score = 0.0;  // relatedness
  std::optional<Split> split;
};

struct TaskDataset {
  std::string name;
  TaskKind kind = TaskKind::classification_single;
  std::vector<Example> examples;
  std::vector<std::string> labels;  // label vocabulary, first-appearance order
  std::vector<double> support;      // relatedness score support, ascending

  bool is_pair() const {
    return kind == TaskKind::classification_pair || kind == TaskKind::relatedness_pair;
  }
  bool is_relatedness() const { return kind == TaskKind::relatedness_pair; }
  bool has_splits() const { return !examples.empty() && examples.front().split.has_value(); }
  int label_index(std::string_view label) const;

  // Checks the per-kind field contract, split-tag consistency and score
  // range, then freezes the label vocabulary. Throws ParseError.
  void validate();
};

// `<stem>.meta.json` next to a `<stem>.jsonl` dataset file.
std::filesystem::path metadata_path(const std::filesystem::path& jsonl);

// JSON Lines with fields text, text2?, label | score, split?; the metadata
// sidecar {name, kind, score_support?} is read when present.
TaskDataset load_dataset(const std::filesystem::path& jsonl);

// Writes the JSON Lines file and its metadata sidecar.
void save_dataset(const TaskDataset& dataset, const std::filesystem::path& jsonl);

}  // namespace randenc

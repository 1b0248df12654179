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

#include "randenc/dataset.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "randenc/embed_store.hpp"
#include "randenc/types.hpp"

namespace randenc {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::classification_single: return "classification_single";
    case TaskKind::classification_pair: return "classification_pair";
    case TaskKind::relatedness_pair: return "relatedness_pair";
    case TaskKind::probing: return "probing";
  }
  return "classification_single";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

TaskKind parse_task_kind(std::string_view s) {
  for (TaskKind k : {TaskKind::classification_single, TaskKind::classification_pair,
                     TaskKind::relatedness_pair, TaskKind::probing})
    if (to_string(k) == s) return k;
  throw ParseError("unknown task kind: " + std::string(s));
}

int TaskDataset::label_index(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

void TaskDataset::validate() {
  if (examples.empty()) throw ParseError(name + ": dataset has no examples");
  if (is_relatedness()) {
    if (support.size() < 2) throw ParseError(name + ": relatedness needs a score support");
    const double step = support[1] - support[0];
    for (std::size_t i = 1; i < support.size(); ++i) {
      const double d = support[i] - support[i - 1];
      if (!(d > 0.0) || std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step)))
        throw ParseError(name + ": score support must be ascending and uniformly spaced");
    }
  }
  const bool tagged = examples.front().split.has_value();
  labels.clear();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    const std::string where = name + ": example " + std::to_string(i + 1) + ": ";
    if (ex.split.has_value() != tagged)
      throw ParseError(where + "split tags must be present on all examples or none");
    if (is_pair() && !ex.text2) throw ParseError(where + "missing text2");
    if (!is_pair() && ex.text2) throw ParseError(where + "unexpected text2 for a single-sentence task");
    if (is_relatedness()) {
      if (!(ex.score >= support.front() && ex.score <= support.back()))
        throw ParseError(where + "score " + std::to_string(ex.score) + " outside support");
    } else if (label_index(ex.label) < 0) {
      labels.push_back(ex.label);
    }
  }
  if (!is_relatedness() && labels.size() < 2)
    throw ParseError(name + ": classification needs at least two labels");
}

fs::path metadata_path(const fs::path& jsonl) {
  fs::path p = jsonl;
  p.replace_extension(".meta.json");
  return p;
}

TaskDataset load_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  TaskDataset ds;
  ds.name = path.stem().string();
  std::optional<TaskKind> declared;
  const fs::path meta = metadata_path(path);
  if (fs::exists(meta)) {
    std::ifstream min(meta);
    try {
      json j = json::parse(min);
      if (j.contains("name")) ds.name = j["name"].get<std::string>();
      if (j.contains("kind")) declared = parse_task_kind(j["kind"].get<std::string>());
      if (j.contains("score_support")) ds.support = j["score_support"].get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError(meta.string() + ": " + e.what());
    }
  }

  std::string line;
  std::size_t lineno = 0;
  bool any_score = false, any_label = false, any_text2 = false;
  std::vector<std::size_t> linenos;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where + "invalid JSON: " + e.what());
    }
    Example ex;
    try {
      if (!j.contains("text")) throw ParseError(where + "missing required field 'text'");
      ex.text = split_tokens(j["text"].get<std::string>());
      if (j.contains("text2")) {
        ex.text2 = split_tokens(j["text2"].get<std::string>());
        any_text2 = true;
      }
      const bool has_label = j.contains("label"), has_score = j.contains("score");
      if (has_label == has_score)
        throw ParseError(where + "exactly one of 'label' or 'score' is required");
      if (has_label) {
        ex.label = j["label"].is_string() ? j["label"].get<std::string>() : j["label"].dump();
        any_label = true;
      } else {
        ex.score = j["score"].get<double>();
        any_score = true;
      }
      if (j.contains("split")) {
        const auto s = j["split"].get<std::string>();
        if (s == "train") ex.split = Split::train;
        else if (s == "dev") ex.split = Split::dev;
        else if (s == "test") ex.split = Split::test;
        else throw ParseError(where + "split must be train, dev or test");
      }
    } catch (const json::exception& e) {
      throw ParseError(where + e.what());
    }
    ds.examples.push_back(std::move(ex));
    linenos.push_back(lineno);
  }
  if (ds.examples.empty()) throw ParseError(path.string() + ": dataset has no examples");
  if (any_score && any_label) throw ParseError(path.string() + ": mixes labels and scores");

  if (declared) {
    ds.kind = *declared;
  } else if (any_score) {
    ds.kind = TaskKind::relatedness_pair;
  } else {
    ds.kind = any_text2 ? TaskKind::classification_pair : TaskKind::classification_single;
  }
  if (ds.is_relatedness() && any_label)
    throw ParseError(path.string() + ": relatedness task with label fields");
  if (!ds.is_relatedness() && any_score)
    throw ParseError(path.string() + ": classification task with score fields");

  // Re-raise per-example problems with the file line number.
  try {
    ds.validate();
  } catch (const ParseError& e) {
    std::string msg = e.what();
    const std::string marker = ": example ";
    const auto pos = msg.find(marker);
    if (pos != std::string::npos) {
      const std::size_t idx = std::stoul(msg.substr(pos + marker.size())) - 1;
      const auto rest = msg.find(": ", pos + marker.size());
      throw ParseError(path.string() + ":" + std::to_string(linenos[idx]) + ": " +
                       msg.substr(rest + 2));
    }
    throw;
  }
  return ds;
}

namespace {
std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}
}  // namespace

void save_dataset(const TaskDataset& ds, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const Example& ex : ds.examples) {
    nlohmann::ordered_json j;
    j["text"] = join(ex.text);
    if (ex.text2) j["text2"] = join(*ex.text2);
    if (ds.is_relatedness())
      j["score"] = ex.score;
    else
      j["label"] = ex.label;
    if (ex.split) j["split"] = std::string(to_string(*ex.split));
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json meta;
  meta["name"] = ds.name;
  meta["kind"] = std::string(to_string(ds.kind));
  if (ds.is_relatedness()) meta["score_support"] = ds.support;
  std::ofstream mout(metadata_path(path));
  if (!mout) throw Error("cannot write " + metadata_path(path).string());
  mout << meta.dump(2) << '\n';
}

}  // namespace randenc

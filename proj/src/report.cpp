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

#include "randenc/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace randenc {
namespace fs = std::filesystem;

std::string format_cell(double mean, double std) {
  char m[64], s[64];
  std::snprintf(m, sizeof(m), "%.1f", mean * 100.0);
  std::snprintf(s, sizeof(s), "%.1f", std * 100.0);
  std::string sd = s;
  if (sd.rfind("0.", 0) == 0) sd.erase(0, 1);
  return std::string(m) + "(" + sd + ")";
}

nlohmann::ordered_json config_to_json(const EncoderConfig& c) {
  nlohmann::ordered_json j;
  j["family"] = std::string(to_string(c.family));
  j["dim"] = c.family == Family::boe ? c.input_dim : c.dim;
  j["input_dim"] = c.input_dim;
  j["init"] = std::string(to_string(c.init));
  j["pooling"] = std::string(to_string(c.pooling.kind));
  j["pad_mode"] = std::string(to_string(c.pooling.pad_mode));
  if (c.family == Family::borep || c.family == Family::esn)
    j["activation"] = std::string(to_string(c.activation));
  if (c.family == Family::esn) {
    j["spectral_radius"] = c.spectral_radius;
    j["input_scale"] = c.input_scale;
    j["sparsity"] = c.sparsity;
    j["leak"] = c.leak;
  }
  j["seed"] = c.seed;
  return j;
}

nlohmann::ordered_json result_to_json(const EvalResult& r, const Protocol& protocol) {
  nlohmann::ordered_json j;
  j["task"] = r.task;
  j["config"] = config_to_json(r.config);
  j["metric"] = std::string(to_string(r.metric));
  j["seeds"] = r.seeds;
  j["per_seed"] = r.per_seed;
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["cell"] = format_cell(r.mean, r.std);
  j["chosen_hparams"] = r.chosen;
  j["split_mode"] = std::string(to_string(protocol.split_mode));
  j["tuning"] = std::string(to_string(protocol.tuning));
  j["tuned_per_seed"] = protocol.tuning == TuningMode::per_task;
  j["l2_sweep"] = protocol.l2_sweep;
  j["encode_passes"] = r.encode_passes;
  return j;
}

std::string render_table(std::span<const EvalResult> results) {
  std::size_t task_w = 4, model_w = 5;
  std::vector<std::string> models;
  for (const auto& r : results) {
    std::ostringstream m;
    m << to_string(r.config.family) << "-"
      << (r.config.family == Family::boe ? r.config.input_dim : r.config.dim);
    models.push_back(m.str());
    task_w = std::max(task_w, r.task.size());
    model_w = std::max(model_w, models.back().size());
  }
  std::ostringstream os;
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  os << pad("task", task_w) << "  " << pad("model", model_w) << "  " << pad("metric", 8) << "  "
     << "score\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    os << pad(r.task, task_w) << "  " << pad(models[i], model_w) << "  "
       << pad(std::string(to_string(r.metric)), 8) << "  " << format_cell(r.mean, r.std) << "\n";
  }
  return os.str();
}

void write_reports(const fs::path& dir, std::span<const EvalResult> results,
                   const Protocol& protocol) {
  fs::create_directories(dir);
  for (const auto& r : results) {
    std::ofstream out(dir / (r.task + ".json"));
    if (!out) throw Error("cannot write report in " + dir.string());
    out << result_to_json(r, protocol).dump(2) << '\n';
  }
  std::ofstream table(dir / "results.txt");
  if (!table) throw Error("cannot write " + (dir / "results.txt").string());
  table << render_table(results);
}

}  // namespace randenc

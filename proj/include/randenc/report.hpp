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
#include <span>
#include <string>

#include "json.hpp"
#include "randenc/evalharness.hpp"

namespace randenc {

// Table cell in the "77.3(.2)" style: mean and std, both scaled by 100
// and printed to one decimal; a leading zero of the std is dropped.
std::string format_cell(double mean, double std);

nlohmann::ordered_json config_to_json(const EncoderConfig& config);
nlohmann::ordered_json result_to_json(const EvalResult& result, const Protocol& protocol);

// Aligned plain-text table: one row per result, columns task/metric/score.
std::string render_table(std::span<const EvalResult> results);

// Writes `<dir>/<task>.json` per result plus `<dir>/results.txt`.
void write_reports(const std::filesystem::path& dir, std::span<const EvalResult> results,
                   const Protocol& protocol);

}  // namespace randenc

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

#include "randenc/numerics.hpp"

namespace randenc {

std::string_view to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::heuristic: return "heuristic";
    case InitScheme::uniform01: return "uniform01";
    case InitScheme::normal: return "normal";
    case InitScheme::orthogonal: return "orthogonal";
    case InitScheme::he: return "he";
    case InitScheme::xavier: return "xavier";
  }
  return "heuristic";
}

InitScheme parse_init_scheme(std::string_view name) {
  for (InitScheme s : {InitScheme::heuristic, InitScheme::uniform01, InitScheme::normal,
                       InitScheme::orthogonal, InitScheme::he, InitScheme::xavier}) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown init scheme: " + std::string(name));
}

}  // namespace randenc

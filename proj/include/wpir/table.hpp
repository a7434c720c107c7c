// Copyright 2026 The wpirsharp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "wpir/scheme.hpp"

namespace wpir {

// Human-readable query/answer table of the code, one sub-table per requested
// message, with symbolic probability labels. Messages are lettered a, b, c...
// and answers are rendered like "a_2", "a_1⊕b_1", or "∅".
std::string render_code_table(const SystemParams& params);

// One table row: probability label, interference indices, permutation or
// server, then query and answer per server, fields joined by " | ".
std::string render_table_row(int message, const RandomKey& key, const SystemParams& params);

}  // namespace wpir

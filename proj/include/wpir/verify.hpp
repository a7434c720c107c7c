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

#include "wpir/optimizer.hpp"

// Certificate batteries behind `wpir verify`: numerical witnesses that the
// closed forms, the reduced problems, and the full problems agree.

namespace wpir {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// KKT certificates over N, K in [2:5] with 11 download values each.
// `perturb_escape` shifts the primal escape mass to exercise the failure
// path (a negative control).
SuiteResult verify_maxl_kkt(double perturb_escape = 0.0);

// Closed form vs reduced and full max-leakage oracles, homogeneous and
// heterogeneous trust, 21-point grids.
SuiteResult verify_prop2();

// Full MI oracle vs reduced MI oracle (homogeneous) plus dominance of the
// full oracle over the symmetric allocation under heterogeneous trust.
SuiteResult verify_prop4();

// Time-sharing structure: the optimal homogeneous MI curve equals the lower
// hull of the escape-free curve plus the single-server extreme point.
SuiteResult verify_hull();

std::vector<SuiteResult> verify_suites(const std::string& suite,
                                       double perturb_escape = 0.0);

// Shared allocation presets: "uniform-tsc", "direct", "maxl-opt(D)",
// "mi-opt(D)", or a JSON file path.
Allocation preset_allocation(const std::string& name, const SystemParams& params);

}  // namespace wpir

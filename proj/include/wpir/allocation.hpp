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

#include <map>
#include <vector>

#include "json.hpp"
#include "wpir/scheme.hpp"

namespace wpir {

// Probability distribution over the key space, one distribution per requested
// message. Only keys with nonzero mass are stored.
class Allocation {
 public:
  explicit Allocation(SystemParams params);

  const SystemParams& params() const { return params_; }
  double prob(int message, const RandomKey& key) const;
  void set_prob(int message, const RandomKey& key, double p);
  const std::map<RandomKey, double>& distribution(int message) const;

 private:
  SystemParams params_;
  std::vector<std::map<RandomKey, double>> per_message_;
};

// Message-symmetric form: one escape probability shared by all N direct keys
// and one probability per interference weight shared by every (indices, pi)
// with pi cyclic. Everything else carries zero mass.
struct ReducedAllocation {
  double escape_prob = 0.0;         // "p_sharp"
  std::vector<double> coded_probs;  // "p", indexed by interference weight
};

// Where the direct-download mass goes when a reduced form is expanded.
enum class DirectPlacement {
  kSymmetric,    // escape_prob on each of the N direct keys
  kMostTrusted,  // N * escape_prob on server 1 (trust is sorted ascending)
};

constexpr double kProbabilityTolerance = 1e-9;
constexpr double kNegativeClamp = -1e-12;

// Throws NotNormalized or NegativeProbability.
void validate(const Allocation& allocation);
void validate(const ReducedAllocation& reduced, const SystemParams& params);

Allocation expand_reduced(const ReducedAllocation& reduced, const SystemParams& params,
                          DirectPlacement placement = DirectPlacement::kSymmetric);

// Mass on retrieval patterns that cost exactly L symbols: direct keys plus
// coded keys with an all-zero index vector.
double direct_prob(const Allocation& allocation, int message);

// Worst case over messages of expected downloaded symbols per message length.
double download_cost(const Allocation& allocation);
double reduced_download_cost(const ReducedAllocation& reduced, const SystemParams& params);

// Cost of the completely private point, (1 - N^-K) / (1 - N^-1).
double capacity_download_cost(const SystemParams& params);

// Uniform mass over every coded key of the cyclic family; zero escape mass.
ReducedAllocation uniform_tsc(const SystemParams& params);

// Rescales a feasible reduced point so the download constraint for
// `download_cost` holds with equality; never increases the mutual-information
// objective. Throws Infeasible when the point cannot meet the cost.
ReducedAllocation tighten_mi(const ReducedAllocation& reduced, double download_cost,
                             const SystemParams& params);

nlohmann::json to_json(const ReducedAllocation& reduced);
ReducedAllocation reduced_from_json(const nlohmann::json& json);
nlohmann::json to_json(const Allocation& allocation);
Allocation allocation_from_json(const nlohmann::json& json, const SystemParams& params);

}  // namespace wpir

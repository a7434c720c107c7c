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

#include "wpir/allocation.hpp"

#include <cmath>

namespace wpir {

Allocation::Allocation(SystemParams params)
    : params_(std::move(params)),
      per_message_(static_cast<std::size_t>(params_.message_count)) {}

double Allocation::prob(int message, const RandomKey& key) const {
  const auto& dist = distribution(message);
  const auto it = dist.find(key);
  return it == dist.end() ? 0.0 : it->second;
}

void Allocation::set_prob(int message, const RandomKey& key, double p) {
  if (message < 1 || message > params_.message_count) {
    throw IndexOutOfRange("message index out of range");
  }
  auto& dist = per_message_[static_cast<std::size_t>(message - 1)];
  if (p == 0.0) {
    dist.erase(key);
  } else {
    dist[key] = p;
  }
}

const std::map<RandomKey, double>& Allocation::distribution(int message) const {
  if (message < 1 || message > params_.message_count) {
    throw IndexOutOfRange("message index out of range");
  }
  return per_message_[static_cast<std::size_t>(message - 1)];
}

void validate(const Allocation& allocation) {
  for (int k = 1; k <= allocation.params().message_count; ++k) {
    double total = 0.0;
    for (const auto& [key, p] : allocation.distribution(k)) {
      if (p < kNegativeClamp) throw NegativeProbability(k, key.label(), p);
      total += std::max(p, 0.0);
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw NotNormalized(k, total - 1.0);
    }
  }
}

void validate(const ReducedAllocation& reduced, const SystemParams& params) {
  if (static_cast<int>(reduced.coded_probs.size()) != params.message_count) {
    throw OutOfRange("reduced allocation needs one probability per weight 0..K-1");
  }
  if (reduced.escape_prob < kNegativeClamp) {
    throw NegativeProbability(0, "p_sharp", reduced.escape_prob);
  }
  if (reduced.escape_prob > 1.0 / params.server_count + kProbabilityTolerance) {
    throw OutOfRange("escape probability exceeds 1/N");
  }
  for (double p : reduced.coded_probs) {
    if (p < kNegativeClamp) throw NegativeProbability(0, "p_j", p);
  }
  const auto profile = weight_profile(params.server_count, params.message_count);
  double total = params.server_count * std::max(reduced.escape_prob, 0.0);
  for (std::size_t j = 0; j < reduced.coded_probs.size(); ++j) {
    total += params.server_count * static_cast<double>(profile.key_counts[j]) *
             std::max(reduced.coded_probs[j], 0.0);
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw NotNormalized(0, total - 1.0);
  }
}

Allocation expand_reduced(const ReducedAllocation& reduced, const SystemParams& params,
                          DirectPlacement placement) {
  validate(reduced, params);
  Allocation allocation(params);
  const auto cyclic = cyclic_permutations(params.server_count);
  std::vector<int> indices(static_cast<std::size_t>(params.message_count - 1), 0);
  for (int k = 1; k <= params.message_count; ++k) {
    if (reduced.escape_prob > 0.0) {
      if (placement == DirectPlacement::kSymmetric) {
        for (int server = 1; server <= params.server_count; ++server) {
          allocation.set_prob(k, RandomKey::direct(server), reduced.escape_prob);
        }
      } else {
        allocation.set_prob(k, RandomKey::direct(1),
                            params.server_count * reduced.escape_prob);
      }
    }
    std::fill(indices.begin(), indices.end(), 0);
    while (true) {
      const int weight = hamming_weight(indices);
      const double p = reduced.coded_probs[static_cast<std::size_t>(weight)];
      if (p > 0.0) {
        for (const auto& permutation : cyclic) {
          allocation.set_prob(k, RandomKey::coded(indices, permutation), p);
        }
      }
      int at = static_cast<int>(indices.size()) - 1;
      while (at >= 0 && indices[static_cast<std::size_t>(at)] == params.server_count - 1) {
        indices[static_cast<std::size_t>(at)] = 0;
        --at;
      }
      if (at < 0) break;
      ++indices[static_cast<std::size_t>(at)];
    }
  }
  return allocation;
}

double direct_prob(const Allocation& allocation, int message) {
  double total = 0.0;
  for (const auto& [key, p] : allocation.distribution(message)) {
    if (key.is_direct()) {
      total += p;
    } else if (hamming_weight(key.coded_key().interference_indices) == 0) {
      total += p;
    }
  }
  return total;
}

double download_cost(const Allocation& allocation) {
  const int n = allocation.params().server_count;
  double worst = 0.0;
  for (int k = 1; k <= allocation.params().message_count; ++k) {
    const double direct = direct_prob(allocation, k);
    worst = std::max(worst, direct + (1.0 - direct) * n / (n - 1));
  }
  return worst;
}

double reduced_download_cost(const ReducedAllocation& reduced, const SystemParams& params) {
  const int n = params.server_count;
  const double direct = n * (reduced.escape_prob + reduced.coded_probs.at(0));
  return (n - direct) / (n - 1);
}

double capacity_download_cost(const SystemParams& params) {
  const double n = params.server_count;
  return (1.0 - std::pow(n, -params.message_count)) / (1.0 - 1.0 / n);
}

ReducedAllocation uniform_tsc(const SystemParams& params) {
  ReducedAllocation reduced;
  reduced.escape_prob = 0.0;
  reduced.coded_probs.assign(static_cast<std::size_t>(params.message_count),
                             std::pow(params.server_count, -params.message_count));
  return reduced;
}

ReducedAllocation tighten_mi(const ReducedAllocation& reduced, double download_cost,
                             const SystemParams& params) {
  const int n = params.server_count;
  const double target = 1.0 - download_cost + download_cost / n;
  const double current = reduced.escape_prob + reduced.coded_probs.at(0);
  if (current < target - kProbabilityTolerance) {
    throw Infeasible("point does not meet the download constraint");
  }
  const double denom = 1.0 - n * current;
  const double numer = 1.0 - n * target;
  ReducedAllocation tight = reduced;
  if (std::abs(denom) < 1e-15) {
    if (std::abs(numer) < 1e-15) return tight;  // already all mass on weight 0
    throw Degenerate("cannot rescale: no mass outside the direct-cost patterns");
  }
  const double scale = numer / denom;
  for (double& p : tight.coded_probs) p *= scale;
  tight.escape_prob = target - tight.coded_probs[0];
  if (tight.escape_prob < 0.0 && tight.escape_prob > kNegativeClamp) {
    tight.escape_prob = 0.0;
  }
  return tight;
}

nlohmann::json to_json(const ReducedAllocation& reduced) {
  return nlohmann::json{{"p_sharp", reduced.escape_prob}, {"p", reduced.coded_probs}};
}

ReducedAllocation reduced_from_json(const nlohmann::json& json) {
  ReducedAllocation reduced;
  reduced.escape_prob = json.at("p_sharp").get<double>();
  reduced.coded_probs = json.at("p").get<std::vector<double>>();
  return reduced;
}

namespace {

nlohmann::json key_to_json(const RandomKey& key) {
  if (key.is_direct()) {
    return nlohmann::json{{"direct", key.direct_key().server}};
  }
  return nlohmann::json{{"f", key.coded_key().interference_indices},
                        {"pi", key.coded_key().assignment.image()}};
}

RandomKey key_from_json(const nlohmann::json& json) {
  if (json.contains("direct")) {
    return RandomKey::direct(json.at("direct").get<int>());
  }
  return RandomKey::coded(json.at("f").get<std::vector<int>>(),
                          Permutation(json.at("pi").get<std::vector<int>>()));
}

}  // namespace

nlohmann::json to_json(const Allocation& allocation) {
  nlohmann::json per_message = nlohmann::json::array();
  for (int k = 1; k <= allocation.params().message_count; ++k) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, p] : allocation.distribution(k)) {
      entries.push_back(nlohmann::json{{"key", key_to_json(key)}, {"prob", p}});
    }
    per_message.push_back(std::move(entries));
  }
  return nlohmann::json{{"N", allocation.params().server_count},
                        {"k", std::move(per_message)}};
}

Allocation allocation_from_json(const nlohmann::json& json, const SystemParams& params) {
  if (json.contains("N") && json.at("N").get<int>() != params.server_count) {
    throw FormatError("allocation file is for a different server count");
  }
  const auto& per_message = json.at("k");
  if (static_cast<int>(per_message.size()) != params.message_count) {
    throw FormatError("allocation file is for a different message count");
  }
  Allocation allocation(params);
  for (int k = 1; k <= params.message_count; ++k) {
    for (const auto& entry : per_message[static_cast<std::size_t>(k - 1)]) {
      allocation.set_prob(k, key_from_json(entry.at("key")),
                          entry.at("prob").get<double>());
    }
  }
  return allocation;
}

}  // namespace wpir

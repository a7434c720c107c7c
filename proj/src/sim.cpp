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

#include "wpir/sim.hpp"

#include <algorithm>
#include <cmath>

namespace wpir {

KeySampler::KeySampler(const Allocation& allocation, int message) {
  double total = 0.0;
  for (const auto& [key, p] : allocation.distribution(message)) {
    if (p <= 0.0) continue;
    keys_.push_back(key);
    total += p;
    cumulative_.push_back(total);
  }
  if (keys_.empty()) throw NotNormalized(message, -1.0);
  cumulative_.back() = std::max(cumulative_.back(), 1.0);
}

const RandomKey& KeySampler::sample(double unit) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), unit);
  const std::size_t index = it == cumulative_.end()
                                ? cumulative_.size() - 1
                                : static_cast<std::size_t>(it - cumulative_.begin());
  return keys_[index];
}

RandomKey sample_key(const Allocation& allocation, int message, std::uint64_t seed,
                     std::uint64_t trial) {
  const KeySampler sampler(allocation, message);
  auto rng = trial_rng(seed, trial);
  return sampler.sample(rng.next_unit());
}

double SimReport::mean_download_cost(int message) const {
  const auto& bucket = per_message[static_cast<std::size_t>(message - 1)];
  return bucket.trials ? bucket.cost_sum / static_cast<double>(bucket.trials) : 0.0;
}

double SimReport::empirical_download_cost() const {
  double worst = 0.0;
  for (int k = 1; k <= message_count; ++k) {
    if (per_message[static_cast<std::size_t>(k - 1)].trials) {
      worst = std::max(worst, mean_download_cost(k));
    }
  }
  return worst;
}

double SimReport::standard_error(int message) const {
  const auto& bucket = per_message[static_cast<std::size_t>(message - 1)];
  if (bucket.trials < 2) return 0.0;
  const double n = static_cast<double>(bucket.trials);
  const double mean = bucket.cost_sum / n;
  const double variance = std::max(bucket.cost_sq_sum / n - mean * mean, 0.0);
  return std::sqrt(variance / n);
}

void SimReport::merge(const SimReport& other) {
  if (server_count == 0) {
    *this = other;
    return;
  }
  if (other.server_count != server_count || other.message_count != message_count) {
    throw OutOfRange("cannot merge reports for different systems");
  }
  for (int k = 0; k < message_count; ++k) {
    per_message[static_cast<std::size_t>(k)].trials +=
        other.per_message[static_cast<std::size_t>(k)].trials;
    per_message[static_cast<std::size_t>(k)].cost_sum +=
        other.per_message[static_cast<std::size_t>(k)].cost_sum;
    per_message[static_cast<std::size_t>(k)].cost_sq_sum +=
        other.per_message[static_cast<std::size_t>(k)].cost_sq_sum;
  }
  for (const auto& [key, count] : other.query_counts) query_counts[key] += count;
  decode_failures += other.decode_failures;
}

SimReport run_trials(const Allocation& allocation, const MessageStore& store, int message,
                     std::uint64_t trials, std::uint64_t seed) {
  const auto& params = allocation.params();
  if (store.params.server_count != params.server_count ||
      store.params.message_count != params.message_count) {
    throw OutOfRange("store does not match the allocation parameters");
  }
  SimReport report;
  report.server_count = params.server_count;
  report.message_count = params.message_count;
  report.per_message.resize(static_cast<std::size_t>(params.message_count));

  const KeySampler sampler(allocation, message);
  const auto expected = store.row(message);
  auto& bucket = report.per_message[static_cast<std::size_t>(message - 1)];
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    auto rng = trial_rng(seed, trial);
    const RandomKey& key = sampler.sample(rng.next_unit());
    const auto queries = encode_queries(message, key, params);
    std::vector<Answer> answers;
    answers.reserve(queries.size());
    std::size_t symbols = 0;
    for (int server = 1; server <= params.server_count; ++server) {
      answers.push_back(answer(queries[static_cast<std::size_t>(server - 1)], store));
      symbols += answers.back().size();
      ++report.query_counts[{server, message, queries[static_cast<std::size_t>(server - 1)]}];
    }
    const auto decoded = decode(answers, message, key, params);
    if (!std::equal(decoded.begin(), decoded.end(), expected.begin(), expected.end())) {
      ++report.decode_failures;
      throw DecodeMismatch("decoded message differs at trial " + std::to_string(trial));
    }
    const double cost = static_cast<double>(symbols) / params.message_length;
    bucket.trials += 1;
    bucket.cost_sum += cost;
    bucket.cost_sq_sum += cost * cost;
  }
  return report;
}

double empirical_leakage(const SimReport& report, Metric metric,
                         std::span<const double> gamma) {
  // Per-message observation totals per server.
  std::vector<std::vector<double>> totals(
      static_cast<std::size_t>(report.server_count),
      std::vector<double>(static_cast<std::size_t>(report.message_count), 0.0));
  for (const auto& [key, count] : report.query_counts) {
    const auto& [server, message, query] = key;
    totals[static_cast<std::size_t>(server - 1)][static_cast<std::size_t>(message - 1)] +=
        static_cast<double>(count);
  }
  for (const auto& per_server : totals) {
    for (double total : per_server) {
      if (total <= 0.0) throw OutOfRange("empirical leakage needs counts for every message");
    }
  }
  double value = 0.0;
  for (int server = 1; server <= report.server_count; ++server) {
    QueryDistribution dist;
    dist.server = server;
    dist.per_message.resize(static_cast<std::size_t>(report.message_count));
    for (const auto& [key, count] : report.query_counts) {
      const auto& [observed_server, message, query] = key;
      if (observed_server != server) continue;
      dist.per_message[static_cast<std::size_t>(message - 1)][query] =
          static_cast<double>(count) /
          totals[static_cast<std::size_t>(server - 1)][static_cast<std::size_t>(message - 1)];
    }
    const double g = gamma[static_cast<std::size_t>(server - 1)];
    if (metric == Metric::kMaxLeakage) {
      value += g * std::exp2(max_leakage(dist));
    } else {
      value += g * mi_leakage(dist);
    }
  }
  return value;
}

nlohmann::json to_json(const SimReport& report) {
  nlohmann::json per_message = nlohmann::json::array();
  for (int k = 1; k <= report.message_count; ++k) {
    const auto& bucket = report.per_message[static_cast<std::size_t>(k - 1)];
    per_message.push_back(nlohmann::json{{"message", k},
                                         {"trials", bucket.trials},
                                         {"empirical_D", report.mean_download_cost(k)},
                                         {"standard_error", report.standard_error(k)}});
  }
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [key, count] : report.query_counts) {
    const auto& [server, message, query] = key;
    counts.push_back(nlohmann::json{{"server", server},
                                    {"message", message},
                                    {"query", query.label()},
                                    {"count", count}});
  }
  return nlohmann::json{{"servers", report.server_count},
                        {"messages", report.message_count},
                        {"per_message", per_message},
                        {"empirical_D", report.empirical_download_cost()},
                        {"decode_failures", report.decode_failures},
                        {"query_counts", counts}};
}

}  // namespace wpir

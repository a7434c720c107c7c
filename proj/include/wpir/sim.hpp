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

#include <cstdint>
#include <tuple>

#include "wpir/leakage.hpp"
#include "wpir/rng.hpp"

// Monte Carlo execution of the protocol against in-process servers.

namespace wpir {

// Inverse-CDF sampler over one message's key distribution, in the fixed
// enumeration order.
class KeySampler {
 public:
  KeySampler(const Allocation& allocation, int message);
  const RandomKey& sample(double unit) const;

 private:
  std::vector<RandomKey> keys_;
  std::vector<double> cumulative_;
};

RandomKey sample_key(const Allocation& allocation, int message, std::uint64_t seed,
                     std::uint64_t trial);

struct SimReport {
  struct PerMessage {
    std::uint64_t trials = 0;
    double cost_sum = 0.0;     // downloaded symbols / message length
    double cost_sq_sum = 0.0;
  };

  int server_count = 0;
  int message_count = 0;
  std::vector<PerMessage> per_message;
  // (server, message, query) -> observations
  std::map<std::tuple<int, int, Query>, std::uint64_t> query_counts;
  std::uint64_t decode_failures = 0;

  // Worst case over messages of the mean normalized download.
  double empirical_download_cost() const;
  double mean_download_cost(int message) const;
  double standard_error(int message) const;
  void merge(const SimReport& other);
};

// Runs `trials` retrievals of one message: sample a key, encode, answer,
// decode, compare against the store. A decode mismatch throws DecodeMismatch
// since it indicates a bug rather than statistics.
SimReport run_trials(const Allocation& allocation, const MessageStore& store, int message,
                     std::uint64_t trials, std::uint64_t seed);

// Plug-in estimate: empirical query frequencies fed into the analytic metric.
// Needs observations for every message.
double empirical_leakage(const SimReport& report, Metric metric,
                         std::span<const double> gamma);

nlohmann::json to_json(const SimReport& report);

}  // namespace wpir

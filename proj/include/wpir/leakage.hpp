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

#include <span>
#include <string>

#include "wpir/allocation.hpp"

// Privacy-leakage evaluation. All leakage values are in bits (base-2 logs);
// probabilities below 1e-15 are treated as exact zeros inside entropy terms.

namespace wpir {

// Per-message query distribution seen by one server.
struct QueryDistribution {
  int server = 0;
  std::vector<std::map<Query, double>> per_message;
};

QueryDistribution query_distribution(const Allocation& allocation, int server);

// Maximal leakage, log2 sum_q max_k P(q | k). Independent of the prior on the
// requested message.
double max_leakage(const QueryDistribution& dist);
double max_leakage(const Allocation& allocation, int server);

// Trust-weighted sum of the exponentials 2^leakage across servers.
double rho_maxl(const Allocation& allocation, std::span<const double> gamma);

// Same value straight from the reduced form, without expanding.
double reduced_rho_maxl(const ReducedAllocation& reduced, std::span<const double> gamma,
                        const SystemParams& params);

// I(M; Q_n) with the requested message uniform.
double mi_leakage(const QueryDistribution& dist);
double mi_leakage(const Allocation& allocation, int server);

double rho_mi(const Allocation& allocation, std::span<const double> gamma);

// Per-server mutual information of the reduced form; equals rho_mi of the
// expansion under homogeneous weights summing to one.
double reduced_mi_objective(const ReducedAllocation& reduced, const SystemParams& params);

enum class Metric { kMaxLeakage, kMutualInformation };
enum class Method { kClosedForm, kOracle, kMonteCarlo };

std::string metric_name(Metric metric);
std::string method_name(Method method);
Metric metric_from_name(const std::string& name);

struct TradeoffPoint {
  Metric metric = Metric::kMaxLeakage;
  Method method = Method::kClosedForm;
  std::string solver;  // "", "reduced", "full", "tsc"
  int server_count = 0;
  int message_count = 0;
  std::vector<double> trust;
  double download_cost = 0.0;
  double rho = 0.0;
};

// CSV schema: metric,N,K,gamma,D,rho,method with gamma semicolon-joined and
// the solver variant appended to the method as "method:variant".
std::string tradeoff_csv_header();
std::string csv_row(const TradeoffPoint& point);
nlohmann::json to_json(const TradeoffPoint& point);

}  // namespace wpir

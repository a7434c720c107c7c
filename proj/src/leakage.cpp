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

#include "wpir/leakage.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace wpir {

namespace {

constexpr double kEntropyZero = 1e-15;

double xlog2x(double p) { return p > kEntropyZero ? p * std::log2(p) : 0.0; }

double plog2(double p, double q) {
  if (p <= kEntropyZero) return 0.0;
  return p * std::log2(p / q);
}

}  // namespace

QueryDistribution query_distribution(const Allocation& allocation, int server) {
  const auto& params = allocation.params();
  if (server < 1 || server > params.server_count) {
    throw IndexOutOfRange("server index out of range");
  }
  QueryDistribution dist;
  dist.server = server;
  dist.per_message.resize(static_cast<std::size_t>(params.message_count));
  for (int k = 1; k <= params.message_count; ++k) {
    auto& queries = dist.per_message[static_cast<std::size_t>(k - 1)];
    for (const auto& [key, p] : allocation.distribution(k)) {
      if (p <= 0.0) continue;
      auto sent = encode_queries(k, key, params);
      queries[std::move(sent[static_cast<std::size_t>(server - 1)])] += p;
    }
  }
  return dist;
}

double max_leakage(const QueryDistribution& dist) {
  std::set<Query> support;
  for (const auto& queries : dist.per_message) {
    for (const auto& [query, p] : queries) {
      if (p > 0.0) support.insert(query);
    }
  }
  double sum_of_max = 0.0;
  for (const auto& query : support) {
    double best = 0.0;
    for (const auto& queries : dist.per_message) {
      const auto it = queries.find(query);
      if (it != queries.end()) best = std::max(best, it->second);
    }
    sum_of_max += best;
  }
  return std::log2(sum_of_max);
}

double max_leakage(const Allocation& allocation, int server) {
  return max_leakage(query_distribution(allocation, server));
}

double rho_maxl(const Allocation& allocation, std::span<const double> gamma) {
  double total = 0.0;
  for (int server = 1; server <= allocation.params().server_count; ++server) {
    total += gamma[static_cast<std::size_t>(server - 1)] *
             std::exp2(max_leakage(allocation, server));
  }
  return total;
}

double reduced_rho_maxl(const ReducedAllocation& reduced, std::span<const double> gamma,
                        const SystemParams& params) {
  const auto profile = weight_profile(params.server_count, params.message_count);
  const int k = params.message_count;
  // Every server sees the same distribution, so the per-server exponential is
  // shared: sum_j t_j max(p_{j-1}, p_j) + p_0 + (N+K-1) p_sharp.
  double per_server = reduced.coded_probs.at(0) +
                      (params.server_count + k - 1) * reduced.escape_prob;
  for (int j = 1; j <= k; ++j) {
    const double lower = reduced.coded_probs[static_cast<std::size_t>(j - 1)];
    const double upper = j < k ? reduced.coded_probs[static_cast<std::size_t>(j)] : 0.0;
    per_server += static_cast<double>(profile.query_counts[static_cast<std::size_t>(j)]) *
                  std::max(lower, upper);
  }
  double trust_total = 0.0;
  for (double g : gamma) trust_total += g;
  return trust_total * per_server;
}

double mi_leakage(const QueryDistribution& dist) {
  const auto k_count = static_cast<double>(dist.per_message.size());
  std::set<Query> support;
  for (const auto& queries : dist.per_message) {
    for (const auto& [query, p] : queries) {
      if (p > 0.0) support.insert(query);
    }
  }
  double mi = 0.0;
  for (const auto& query : support) {
    double mean = 0.0;
    for (const auto& queries : dist.per_message) {
      const auto it = queries.find(query);
      if (it != queries.end()) mean += it->second;
    }
    mean /= k_count;
    if (mean <= kEntropyZero) continue;
    for (const auto& queries : dist.per_message) {
      const auto it = queries.find(query);
      if (it != queries.end()) mi += plog2(it->second, mean) / k_count;
    }
  }
  return std::max(mi, 0.0);
}

double mi_leakage(const Allocation& allocation, int server) {
  return mi_leakage(query_distribution(allocation, server));
}

double rho_mi(const Allocation& allocation, std::span<const double> gamma) {
  double total = 0.0;
  for (int server = 1; server <= allocation.params().server_count; ++server) {
    total += gamma[static_cast<std::size_t>(server - 1)] * mi_leakage(allocation, server);
  }
  return total;
}

double reduced_mi_objective(const ReducedAllocation& reduced, const SystemParams& params) {
  const auto profile = weight_profile(params.server_count, params.message_count);
  const int k = params.message_count;
  double value = reduced.escape_prob > kEntropyZero
                     ? reduced.escape_prob * std::log2(static_cast<double>(k))
                     : 0.0;
  for (int j = 1; j <= k; ++j) {
    const double lower = reduced.coded_probs[static_cast<std::size_t>(j - 1)];
    const double upper = j < k ? reduced.coded_probs[static_cast<std::size_t>(j)] : 0.0;
    const double mix = j * lower + (k - j) * upper;
    double brace = j * xlog2x(lower) + (k - j) * xlog2x(upper);
    if (mix > kEntropyZero) brace -= mix * std::log2(mix / k);
    value += static_cast<double>(profile.query_counts[static_cast<std::size_t>(j)]) / k * brace;
  }
  return value;
}

std::string metric_name(Metric metric) {
  return metric == Metric::kMaxLeakage ? "maxl" : "mi";
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kClosedForm: return "closed_form";
    case Method::kOracle: return "oracle";
    case Method::kMonteCarlo: return "monte_carlo";
  }
  return "";
}

Metric metric_from_name(const std::string& name) {
  if (name == "maxl") return Metric::kMaxLeakage;
  if (name == "mi") return Metric::kMutualInformation;
  throw OutOfRange("unknown metric '" + name + "'");
}

namespace {

std::string joined_trust(const TradeoffPoint& point) {
  std::ostringstream os;
  os.precision(12);
  for (std::size_t i = 0; i < point.trust.size(); ++i) {
    if (i) os << ";";
    os << point.trust[i];
  }
  return os.str();
}

std::string full_method(const TradeoffPoint& point) {
  std::string name = method_name(point.method);
  if (!point.solver.empty()) name += ":" + point.solver;
  return name;
}

}  // namespace

std::string tradeoff_csv_header() { return "metric,N,K,gamma,D,rho,method"; }

std::string csv_row(const TradeoffPoint& point) {
  std::ostringstream os;
  os.precision(15);
  os << metric_name(point.metric) << "," << point.server_count << ","
     << point.message_count << "," << joined_trust(point) << "," << point.download_cost
     << "," << point.rho << "," << full_method(point);
  return os.str();
}

nlohmann::json to_json(const TradeoffPoint& point) {
  return nlohmann::json{{"metric", metric_name(point.metric)},
                        {"N", point.server_count},
                        {"K", point.message_count},
                        {"gamma", point.trust},
                        {"D", point.download_cost},
                        {"rho", point.rho},
                        {"method", full_method(point)}};
}

}  // namespace wpir

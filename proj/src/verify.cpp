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

#include "wpir/verify.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wpir {

SuiteResult verify_maxl_kkt(double perturb_escape) {
  SuiteResult suite{"maxl-kkt", true, ""};
  double worst_residual = 0.0;
  double worst_dual = 0.0;
  for (int n = 2; n <= 5; ++n) {
    for (int k = 2; k <= 5; ++k) {
      const SystemParams params(n, k);
      const auto grid = default_download_grid(params, 11);
      for (double d : grid) {
        const auto cert = kkt_verify_maxl(params, d, perturb_escape);
        worst_residual = std::max({worst_residual, cert.max_stationarity_residual,
                                   cert.max_primal_residual, cert.max_slackness_residual});
        worst_dual = std::min(worst_dual, cert.min_dual_value);
        if (!cert.ok()) suite.passed = false;
      }
    }
  }
  std::ostringstream os;
  os << "max residual " << worst_residual << ", min dual " << worst_dual;
  suite.detail = os.str();
  return suite;
}

SuiteResult verify_prop2() {
  SuiteResult suite{"prop2", true, ""};
  double worst_reduced = 0.0;
  double worst_full = 0.0;
  const std::vector<std::vector<double>> trusts = {
      {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.1, 0.3, 0.6}};
  for (const auto& trust : trusts) {
    const SystemParams params(3, 2, trust);
    for (double d : default_download_grid(params)) {
      const double closed = maxl_rho_closed_form(params, d);
      // Under heterogeneous trust the symmetric code cannot reach the closed
      // form; compare it against the best symmetric value instead.
      const double reduced = maxl_reduced_oracle(params, d).rho;
      const double full = maxl_full_oracle(params, d).rho;
      if (params.homogeneous_trust()) {
        worst_reduced = std::max(worst_reduced, std::abs(closed - reduced));
      } else if (closed > reduced + 1e-9) {
        suite.passed = false;
      }
      worst_full = std::max(worst_full, std::abs(closed - full));
    }
  }
  {
    const SystemParams params(2, 2);
    for (double d : default_download_grid(params)) {
      const double closed = maxl_rho_closed_form(params, d);
      worst_reduced = std::max(worst_reduced,
                               std::abs(closed - maxl_reduced_oracle(params, d).rho));
      worst_full = std::max(worst_full,
                            std::abs(closed - maxl_full_oracle(params, d).rho));
    }
  }
  if (worst_reduced > 1e-6 || worst_full > 1e-5) suite.passed = false;
  std::ostringstream os;
  os << "max |closed-reduced| " << worst_reduced << ", max |closed-full| " << worst_full;
  suite.detail = os.str();
  return suite;
}

SuiteResult verify_prop4() {
  SuiteResult suite{"prop4", true, ""};
  const SystemParams homogeneous(3, 2);
  double worst_gap = 0.0;
  for (double d : default_download_grid(homogeneous)) {
    const double full = mi_full_oracle(homogeneous, d).rho;
    const double reduced = mi_reduced_oracle(homogeneous, d).rho;
    worst_gap = std::max(worst_gap, std::abs(full - reduced));
  }
  if (worst_gap > 1e-4) suite.passed = false;

  const SystemParams heterogeneous(3, 2, {0.1, 0.3, 0.6});
  double best_improvement = 0.0;
  const auto grid = default_download_grid(heterogeneous);
  for (double d : grid) {
    const auto symmetric = mi_optimal_homogeneous(SystemParams(3, 2), d);
    const auto expanded = expand_reduced(symmetric.allocation, heterogeneous,
                                         DirectPlacement::kMostTrusted);
    const double symmetric_rho = rho_mi(expanded, heterogeneous.trust);
    const double full = mi_full_oracle(heterogeneous, d).rho;
    if (full > symmetric_rho + 1e-6) suite.passed = false;
    if (d > grid.front() + 1e-9 && d < grid.back() - 1e-9) {
      best_improvement = std::max(best_improvement, symmetric_rho - full);
    }
  }
  if (best_improvement < 1e-5) suite.passed = false;
  std::ostringstream os;
  os << "homogeneous gap " << worst_gap << ", best heterogeneous improvement "
     << best_improvement;
  suite.detail = os.str();
  return suite;
}

SuiteResult verify_hull() {
  SuiteResult suite{"hull", true, ""};
  const SystemParams params(3, 2);
  const auto grid = default_download_grid(params, 201);
  std::vector<TradeoffPoint> tsc_points;
  std::vector<TradeoffPoint> optimal_points;
  for (double d : grid) {
    TradeoffPoint tsc;
    tsc.metric = Metric::kMutualInformation;
    tsc.method = Method::kOracle;
    tsc.solver = "tsc";
    tsc.server_count = params.server_count;
    tsc.message_count = params.message_count;
    tsc.trust = params.trust;
    tsc.download_cost = d;
    tsc.rho = mi_tsc_oracle(params, d).rho;
    tsc_points.push_back(tsc);

    TradeoffPoint optimal = tsc;
    optimal.solver = "reduced";
    optimal.rho = mi_reduced_oracle(params, d).rho;
    optimal_points.push_back(optimal);
  }
  TradeoffPoint extreme = tsc_points.front();
  extreme.solver = "";
  extreme.method = Method::kClosedForm;
  extreme.download_cost = 1.0;
  extreme.rho = params.trust.front() * std::log2(params.message_count);
  const double deviation = hull_check(tsc_points, extreme, optimal_points);
  if (deviation > 1e-4) suite.passed = false;
  std::ostringstream os;
  os << "max |hull - optimal| " << deviation;
  suite.detail = os.str();
  return suite;
}

std::vector<SuiteResult> verify_suites(const std::string& suite, double perturb_escape) {
  std::vector<SuiteResult> results;
  if (suite == "maxl-kkt" || suite == "all") results.push_back(verify_maxl_kkt(perturb_escape));
  if (suite == "prop2" || suite == "all") results.push_back(verify_prop2());
  if (suite == "prop4" || suite == "all") results.push_back(verify_prop4());
  if (suite == "hull" || suite == "all") results.push_back(verify_hull());
  if (results.empty()) throw OutOfRange("unknown verify suite '" + suite + "'");
  return results;
}

Allocation preset_allocation(const std::string& name, const SystemParams& params) {
  if (name == "uniform-tsc") {
    return expand_reduced(uniform_tsc(params), params);
  }
  if (name == "direct") {
    Allocation allocation(params);
    for (int k = 1; k <= params.message_count; ++k) {
      allocation.set_prob(k, RandomKey::direct(1), 1.0);
    }
    return allocation;
  }
  auto parse_cost = [&](const std::string& prefix) -> double {
    const auto open = name.find('(');
    const auto close = name.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw OutOfRange("preset '" + name + "' needs the form " + prefix + "(D)");
    }
    return std::stod(name.substr(open + 1, close - open - 1));
  };
  if (name.rfind("maxl-opt", 0) == 0) {
    return maxl_optimal(params, parse_cost("maxl-opt")).allocation;
  }
  if (name.rfind("mi-opt", 0) == 0) {
    const auto solution = mi_optimal_homogeneous(
        SystemParams(params.server_count, params.message_count), parse_cost("mi-opt"));
    return expand_reduced(solution.allocation, params, DirectPlacement::kMostTrusted);
  }
  if (std::filesystem::exists(name)) {
    std::ifstream in(name);
    nlohmann::json json;
    in >> json;
    return allocation_from_json(json, params);
  }
  throw OutOfRange("unknown allocation preset or missing file '" + name + "'");
}

}  // namespace wpir

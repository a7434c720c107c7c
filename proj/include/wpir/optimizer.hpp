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

#include "wpir/leakage.hpp"

// Optimal probability allocations for both leakage metrics: closed forms
// where they exist, independent numerical solvers as certificates, a KKT
// verifier for the linear-programming route, and tradeoff-curve generation.

namespace wpir {

struct ReducedSolution {
  ReducedAllocation allocation;
  double rho = 0.0;
  Method method = Method::kOracle;
};

struct FullSolution {
  Allocation allocation;
  double rho = 0.0;
};

// Closed-form optimal surrogate max-leakage at download cost `download_cost`,
// using the trust weights in `params`. Escape mass goes to the most trusted
// server; coded mass rides a single shift permutation.
double maxl_rho_closed_form(const SystemParams& params, double download_cost);
FullSolution maxl_optimal(const SystemParams& params, double download_cost);

// The homogeneous-trust value of the same optimum; requires equal weights.
double homogeneous_maxl_value(const SystemParams& params, double download_cost);

// Numerical minimization of the symmetric reduced objective (projected
// subgradient). This is also the best message-symmetric code, which under
// heterogeneous trust is strictly worse than the closed form.
ReducedSolution maxl_reduced_oracle(const SystemParams& params, double download_cost);

// Same metric over the full per-message key-space distributions.
FullSolution maxl_full_oracle(const SystemParams& params, double download_cost);

// Primal/dual certificate for the linear program behind the max-leakage
// optimum. All residual thresholds are 1e-9.
struct MaxLKktCertificate {
  // primal: escape mass, per-weight probabilities, epigraph variables
  double p_escape = 0.0;
  std::vector<double> p;
  std::vector<double> m;
  // duals: eta_* for nonnegativity, lambda for the download constraint, mu
  // for normalization, lambda_j/mu_j for the epigraph pairs
  double eta_escape = 0.0;
  std::vector<double> eta;
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<double> lambda_j;
  std::vector<double> mu_j;

  double max_stationarity_residual = 0.0;
  double max_primal_residual = 0.0;
  double max_slackness_residual = 0.0;
  double min_dual_value = 0.0;
  bool sandwich_bounds_hold = false;  // the monotone bounds behind dual feasibility

  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// `perturb_escape` is added to the constructed escape mass before checking,
// which breaks the certificate; nonzero values exercise the failure path.
MaxLKktCertificate kkt_verify_maxl(const SystemParams& params, double download_cost,
                                   double perturb_escape = 0.0);

// Auxiliary ratio sequence for the mutual-information optimum. ratio[j-1]
// holds p_{j-1}/p_j at the optimum in the mixing regime.
struct XSequence {
  std::vector<double> ratio;
  std::vector<double> log_mix;  // log((j x_j + K - j) / K), natural log
};

// Closed form for the first ratio plus a one-dimensional shooting solve for
// the rest. Throws Degenerate for N = 2 (the closed form divides by zero).
XSequence solve_x_sequence(const SystemParams& params);

// Optimal homogeneous allocation under the MI metric. Uses the ratio
// sequence while the escape mass stays nonnegative and the escape-free
// branch beyond that point. Falls back to the numerical oracle for N = 2
// (method is kOracle in that case).
ReducedSolution mi_optimal_homogeneous(const SystemParams& params, double download_cost);

// Projected-gradient minimization of the reduced MI objective.
ReducedSolution mi_reduced_oracle(const SystemParams& params, double download_cost);

// Reduced MI oracle with the escape mass pinned to zero (the clean code).
ReducedSolution mi_tsc_oracle(const SystemParams& params, double download_cost);

// Frank-Wolfe over the full per-message polytopes under the trust weights in
// `params`; handles the heterogeneous case that has no closed form.
FullSolution mi_full_oracle(const SystemParams& params, double download_cost);

std::vector<double> default_download_grid(const SystemParams& params, int points = 21);

// One point per applicable method per grid value: closed form, reduced
// oracle, full oracle (small key spaces), and the escape-free baseline.
std::vector<TradeoffPoint> tradeoff_curve(Metric metric, const SystemParams& params,
                                          std::span<const double> download_grid);

// Max deviation between `optimal_curve` and the lower convex hull of the
// escape-free curve plus the single extreme point.
double hull_check(std::span<const TradeoffPoint> tsc_curve, const TradeoffPoint& extreme,
                  std::span<const TradeoffPoint> optimal_curve);

nlohmann::json to_json(const MaxLKktCertificate& certificate);

}  // namespace wpir

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

#include "wpir/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "solvers.hpp"

namespace wpir {

namespace {

using detail::Vector;

constexpr double kDownloadSlack = 1e-12;
constexpr double kKktTolerance = 1e-9;

double pow_int(double base, int exponent) {
  double value = 1.0;
  for (int i = 0; i < exponent; ++i) value *= base;
  return value;
}

// Mass that must sit on the cheap patterns: 1 - D + D/N.
double direct_floor(const SystemParams& params, double download_cost) {
  const double dstar = capacity_download_cost(params);
  if (download_cost < 1.0 - kDownloadSlack || download_cost > dstar + kDownloadSlack) {
    std::ostringstream os;
    os << "download cost " << download_cost << " outside [1, " << dstar << "]";
    throw OutOfRange(os.str());
  }
  const double clamped = std::clamp(download_cost, 1.0, dstar);
  return 1.0 - clamped + clamped / params.server_count;
}

double theorem_escape_mass(const SystemParams& params, double download_cost) {
  const double floor = direct_floor(params, download_cost);
  const double nk = pow_int(params.server_count, params.message_count);
  const double nk1 = pow_int(params.server_count, params.message_count - 1);
  return std::clamp((nk * floor - 1.0) / (nk1 - 1.0), 0.0, 1.0);
}

Permutation shift_by_one(int server_count) {
  std::vector<int> image(static_cast<std::size_t>(server_count));
  for (int server = 1; server <= server_count; ++server) {
    image[server - 1] = (server + 1) % server_count;
  }
  return Permutation(image);
}

}  // namespace

double maxl_rho_closed_form(const SystemParams& params, double download_cost) {
  const double escape = theorem_escape_mass(params, download_cost);
  return params.trust.front() * (params.message_count - 1) * escape + params.trust_total();
}

FullSolution maxl_optimal(const SystemParams& params, double download_cost) {
  const double escape = theorem_escape_mass(params, download_cost);
  const double coded = (1.0 - escape) / pow_int(params.server_count, params.message_count - 1);
  const Permutation shift = shift_by_one(params.server_count);

  Allocation allocation(params);
  std::vector<int> indices(static_cast<std::size_t>(params.message_count - 1), 0);
  for (int k = 1; k <= params.message_count; ++k) {
    if (escape > 0.0) allocation.set_prob(k, RandomKey::direct(1), escape);
    std::fill(indices.begin(), indices.end(), 0);
    while (true) {
      allocation.set_prob(k, RandomKey::coded(indices, shift), coded);
      int at = static_cast<int>(indices.size()) - 1;
      while (at >= 0 && indices[static_cast<std::size_t>(at)] == params.server_count - 1) {
        indices[static_cast<std::size_t>(at)] = 0;
        --at;
      }
      if (at < 0) break;
      ++indices[static_cast<std::size_t>(at)];
    }
  }
  return {std::move(allocation), maxl_rho_closed_form(params, download_cost)};
}

double homogeneous_maxl_value(const SystemParams& params, double download_cost) {
  if (!params.homogeneous_trust()) {
    throw OutOfRange("homogeneous value requires equal trust weights");
  }
  const double n = params.server_count;
  const int k = params.message_count;
  const double g = params.trust.front();
  direct_floor(params, download_cost);  // range check
  const double numerator =
      pow_int(n, k - 1) * (n - (n - 1) * download_cost) - 1.0;
  return n * g * (1.0 + (k - 1) * numerator / (pow_int(n, k) - n));
}

// ---------------------------------------------------------------------------
// Max-leakage oracles
// ---------------------------------------------------------------------------

namespace {

// Symmetric objective core: sum_j t_j max(p_{j-1}, p_j) + p_0 + (N+K-1) p_#.
// Variable layout: v[0] = p_#, v[1..K] = p_0..p_{K-1}.
struct ReducedMaxlProblem {
  explicit ReducedMaxlProblem(const SystemParams& params)
      : profile(weight_profile(params.server_count, params.message_count)),
        k(params.message_count),
        n(params.server_count) {
    weights.assign(static_cast<std::size_t>(k) + 1, 0.0);
    weights[0] = n;
    for (int j = 0; j < k; ++j) {
      weights[static_cast<std::size_t>(j) + 1] =
          n * static_cast<double>(profile.key_counts[static_cast<std::size_t>(j)]);
    }
    mask.assign(static_cast<std::size_t>(k) + 1, 0);
    mask[0] = 1;
    mask[1] = 1;
  }

  double objective(const Vector& v) const {
    double value = v[1] + (n + k - 1) * v[0];
    for (int j = 1; j <= k; ++j) {
      const double lower = v[static_cast<std::size_t>(j)];
      const double upper = j < k ? v[static_cast<std::size_t>(j) + 1] : 0.0;
      value += static_cast<double>(profile.query_counts[static_cast<std::size_t>(j)]) *
               std::max(lower, upper);
    }
    return value;
  }

  Vector subgradient(const Vector& v) const {
    Vector g(v.size(), 0.0);
    g[0] = n + k - 1;
    g[1] += 1.0;
    for (int j = 1; j <= k; ++j) {
      const double lower = v[static_cast<std::size_t>(j)];
      const double upper = j < k ? v[static_cast<std::size_t>(j) + 1] : 0.0;
      const double t = static_cast<double>(profile.query_counts[static_cast<std::size_t>(j)]);
      if (lower >= upper) {
        g[static_cast<std::size_t>(j)] += t;
      } else {
        g[static_cast<std::size_t>(j) + 1] += t;
      }
    }
    return g;
  }

  WeightProfile profile;
  int k;
  int n;
  Vector weights;
  std::vector<char> mask;
};

}  // namespace

ReducedSolution maxl_reduced_oracle(const SystemParams& params, double download_cost) {
  const double floor = direct_floor(params, download_cost);
  const ReducedMaxlProblem problem(params);
  auto project = [&](Vector v) {
    return detail::project_weighted_simplex_halfspace(v, problem.weights, 1.0,
                                                      problem.mask, floor);
  };
  Vector start(static_cast<std::size_t>(params.message_count) + 1,
               1.0 / pow_int(params.server_count, params.message_count));
  start[0] = 0.0;
  const auto result = detail::polyak_subgradient(
      std::move(start), [&](const Vector& v) { return problem.objective(v); },
      [&](const Vector& v) { return problem.subgradient(v); }, project);
  if (!result.converged) {
    throw NotConverged("reduced max-leakage oracle hit the iteration cap");
  }
  ReducedSolution solution;
  solution.method = Method::kOracle;
  solution.allocation.escape_prob = result.point[0];
  solution.allocation.coded_probs.assign(result.point.begin() + 1, result.point.end());
  solution.rho = params.trust_total() * result.value;
  return solution;
}

namespace {

// Precomputed query structure of the full problem: which keys land on which
// query at each server, per requested message.
struct FullProblem {
  explicit FullProblem(const SystemParams& params_in)
      : params(params_in), keys(enumerate_key_space(params_in)) {
    const int n = params.server_count;
    const int k = params.message_count;
    buckets.resize(static_cast<std::size_t>(n));
    direct_mask.assign(keys.size(), 0);
    for (std::size_t key_index = 0; key_index < keys.size(); ++key_index) {
      const auto& key = keys[key_index];
      if (key.is_direct() || hamming_weight(key.coded_key().interference_indices) == 0) {
        direct_mask[key_index] = 1;
      }
    }
    for (int server = 1; server <= n; ++server) {
      auto& per_server = buckets[static_cast<std::size_t>(server - 1)];
      per_server.resize(static_cast<std::size_t>(k));
      for (int message = 1; message <= k; ++message) {
        auto& per_message = per_server[static_cast<std::size_t>(message - 1)];
        for (std::size_t key_index = 0; key_index < keys.size(); ++key_index) {
          auto queries = encode_queries(message, keys[key_index], params);
          per_message[queries[static_cast<std::size_t>(server - 1)]].push_back(key_index);
        }
      }
    }
    // Flatten to ids for fast marginalization.
    for (int server = 1; server <= n; ++server) {
      std::map<Query, int> ids;
      for (int message = 1; message <= k; ++message) {
        for (const auto& [query, members] :
             buckets[static_cast<std::size_t>(server - 1)][static_cast<std::size_t>(message - 1)]) {
          ids.emplace(query, 0);
        }
      }
      int next = 0;
      for (auto& [query, id] : ids) id = next++;
      query_ids.push_back(ids);
      query_count.push_back(next);
    }
    member_lists.resize(static_cast<std::size_t>(n));
    for (int server = 1; server <= n; ++server) {
      auto& flat = member_lists[static_cast<std::size_t>(server - 1)];
      flat.resize(static_cast<std::size_t>(query_count[static_cast<std::size_t>(server - 1)] * k));
      for (int message = 1; message <= k; ++message) {
        for (const auto& [query, members] :
             buckets[static_cast<std::size_t>(server - 1)][static_cast<std::size_t>(message - 1)]) {
          const int qid = query_ids[static_cast<std::size_t>(server - 1)].at(query);
          flat[static_cast<std::size_t>(qid * k + message - 1)] = members;
        }
      }
    }
  }

  // P(query | message) at one server for the stacked variable block.
  double mass(const Vector& v, int server, int qid, int message) const {
    const auto& members =
        member_lists[static_cast<std::size_t>(server - 1)]
                    [static_cast<std::size_t>(qid * params.message_count + message - 1)];
    double total = 0.0;
    const std::size_t offset = static_cast<std::size_t>(message - 1) * keys.size();
    for (std::size_t key_index : members) total += v[offset + key_index];
    return total;
  }

  SystemParams params;
  std::vector<RandomKey> keys;
  std::vector<std::vector<std::map<Query, std::vector<std::size_t>>>> buckets;
  std::vector<std::map<Query, int>> query_ids;
  std::vector<int> query_count;
  std::vector<std::vector<std::vector<std::size_t>>> member_lists;
  std::vector<char> direct_mask;
};

Allocation allocation_from_vector(const FullProblem& problem, const Vector& v) {
  Allocation allocation(problem.params);
  for (int message = 1; message <= problem.params.message_count; ++message) {
    const std::size_t offset = static_cast<std::size_t>(message - 1) * problem.keys.size();
    for (std::size_t key_index = 0; key_index < problem.keys.size(); ++key_index) {
      const double p = v[offset + key_index];
      if (p > 1e-15) allocation.set_prob(message, problem.keys[key_index], p);
    }
  }
  return allocation;
}

void check_key_space(const SystemParams& params) {
  if (key_space_size(params) > 1000) {
    throw TooLarge("full oracle needs at most 1000 keys per message");
  }
}

}  // namespace

FullSolution maxl_full_oracle(const SystemParams& params, double download_cost) {
  check_key_space(params);
  const double floor = direct_floor(params, download_cost);
  const FullProblem problem(params);
  const int k = params.message_count;
  const std::size_t block = problem.keys.size();
  const Vector ones(block, 1.0);

  auto objective = [&](const Vector& v) {
    double value = 0.0;
    for (int server = 1; server <= params.server_count; ++server) {
      double sum_max = 0.0;
      for (int qid = 0; qid < problem.query_count[static_cast<std::size_t>(server - 1)]; ++qid) {
        double best = 0.0;
        for (int message = 1; message <= k; ++message) {
          best = std::max(best, problem.mass(v, server, qid, message));
        }
        sum_max += best;
      }
      value += params.trust[static_cast<std::size_t>(server - 1)] * sum_max;
    }
    return value;
  };
  auto subgradient = [&](const Vector& v) {
    Vector g(v.size(), 0.0);
    for (int server = 1; server <= params.server_count; ++server) {
      const double w = params.trust[static_cast<std::size_t>(server - 1)];
      for (int qid = 0; qid < problem.query_count[static_cast<std::size_t>(server - 1)]; ++qid) {
        double best = -1.0;
        int best_message = 1;
        for (int message = 1; message <= k; ++message) {
          const double p = problem.mass(v, server, qid, message);
          if (p > best) {
            best = p;
            best_message = message;
          }
        }
        const auto& members =
            problem.member_lists[static_cast<std::size_t>(server - 1)]
                                [static_cast<std::size_t>(qid * k + best_message - 1)];
        const std::size_t offset = static_cast<std::size_t>(best_message - 1) * block;
        for (std::size_t key_index : members) g[offset + key_index] += w;
      }
    }
    return g;
  };
  auto project = [&](Vector v) {
    for (int message = 0; message < k; ++message) {
      Vector part(v.begin() + message * static_cast<std::ptrdiff_t>(block),
                  v.begin() + (message + 1) * static_cast<std::ptrdiff_t>(block));
      part = detail::project_weighted_simplex_halfspace(
          part, ones, 1.0, problem.direct_mask, params.server_count * floor);
      std::copy(part.begin(), part.end(),
                v.begin() + message * static_cast<std::ptrdiff_t>(block));
    }
    return v;
  };

  Vector start(block * static_cast<std::size_t>(k), 1.0 / static_cast<double>(block));
  const auto result = detail::polyak_subgradient(std::move(start), objective, subgradient,
                                                 project);
  if (!result.converged) {
    throw NotConverged("full max-leakage oracle hit the iteration cap");
  }
  return {allocation_from_vector(problem, result.point), result.value};
}

// ---------------------------------------------------------------------------
// KKT certificate
// ---------------------------------------------------------------------------

MaxLKktCertificate kkt_verify_maxl(const SystemParams& params, double download_cost,
                                   double perturb_escape) {
  const int k = params.message_count;
  const double n = params.server_count;
  const double floor = direct_floor(params, download_cost);
  const auto profile = weight_profile(params.server_count, k);
  const double nk = pow_int(n, k);
  const double nk1 = pow_int(n, k - 1);

  MaxLKktCertificate cert;
  cert.p_escape = (nk * floor - 1.0) / (nk - n) + perturb_escape;
  cert.p.assign(static_cast<std::size_t>(k), (1.0 - n * cert.p_escape) / nk);
  cert.m = cert.p;  // m_j = p_{j-1}, and all p_j coincide
  cert.eta_escape = 0.0;
  cert.eta.assign(static_cast<std::size_t>(k), 0.0);
  cert.lambda = nk1 * (k - 1) / (nk1 - 1.0);
  cert.mu = pow_int(n, k - 2) * (k - 1) / (nk1 - 1.0) - (n + k - 1) / n;

  const auto& t = profile.query_counts;
  const auto& s = profile.key_counts;
  auto prefix_t = [&](int j) {  // sum_{i=0}^{j} t_i
    double total = 0.0;
    for (int i = 0; i <= j; ++i) total += static_cast<double>(t[static_cast<std::size_t>(i)]);
    return total;
  };
  auto prefix_s0 = [&](int j) {  // sum_{i=0}^{j-1} s_i
    double total = 0.0;
    for (int i = 0; i < j; ++i) total += static_cast<double>(s[static_cast<std::size_t>(i)]);
    return total;
  };
  auto prefix_s1 = [&](int j) {  // sum_{i=1}^{j-1} s_i
    double total = 0.0;
    for (int i = 1; i < j; ++i) total += static_cast<double>(s[static_cast<std::size_t>(i)]);
    return total;
  };
  cert.lambda_j.resize(static_cast<std::size_t>(k));
  cert.mu_j.resize(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) {
    const double covered = (n + k - 1) * prefix_s0(j) - cert.lambda * prefix_s1(j);
    cert.lambda_j[static_cast<std::size_t>(j - 1)] = prefix_t(j) - covered;
    cert.mu_j[static_cast<std::size_t>(j - 1)] = covered - prefix_t(j - 1);
  }

  auto note = [&](const std::string& what, double residual, double limit) {
    if (std::abs(residual) > limit) {
      std::ostringstream os;
      os << what << " residual " << residual;
      cert.violations.push_back(os.str());
    }
  };

  // Stationarity.
  double worst = 0.0;
  {
    const double r0 = (n - 1 + k) - cert.eta_escape + n * cert.mu - cert.lambda;
    const double r1 = 1.0 - cert.eta[0] + n * cert.mu + cert.mu_j[0] - cert.lambda;
    worst = std::max(std::abs(r0), std::abs(r1));
    note("stationarity (escape)", r0, kKktTolerance);
    note("stationarity (weight 0)", r1, kKktTolerance);
    for (int j = 1; j <= k - 1; ++j) {
      const double r = -cert.eta[static_cast<std::size_t>(j)] +
                       n * cert.mu * static_cast<double>(s[static_cast<std::size_t>(j)]) +
                       cert.lambda_j[static_cast<std::size_t>(j - 1)] +
                       cert.mu_j[static_cast<std::size_t>(j)];
      worst = std::max(worst, std::abs(r));
      note("stationarity (weight " + std::to_string(j) + ")", r, kKktTolerance);
    }
    for (int j = 1; j <= k; ++j) {
      const double r = static_cast<double>(t[static_cast<std::size_t>(j)]) -
                       cert.lambda_j[static_cast<std::size_t>(j - 1)] -
                       cert.mu_j[static_cast<std::size_t>(j - 1)];
      worst = std::max(worst, std::abs(r));
      note("stationarity (epigraph " + std::to_string(j) + ")", r, kKktTolerance);
    }
  }
  cert.max_stationarity_residual = worst;

  // Primal feasibility.
  worst = 0.0;
  {
    double total = n * cert.p_escape;
    for (int j = 0; j < k; ++j) {
      total += n * static_cast<double>(s[static_cast<std::size_t>(j)]) *
               cert.p[static_cast<std::size_t>(j)];
    }
    note("normalization", total - 1.0, kKktTolerance);
    worst = std::abs(total - 1.0);
    if (cert.p_escape < -kKktTolerance) cert.violations.push_back("p_escape negative");
    for (double v : cert.p) {
      if (v < -kKktTolerance) cert.violations.push_back("weight probability negative");
    }
    const double slack = cert.p[0] + cert.p_escape - floor;
    if (slack < -kKktTolerance) cert.violations.push_back("download constraint violated");
    worst = std::max(worst, std::max(0.0, -slack));
  }
  cert.max_primal_residual = worst;

  // Complementary slackness.
  worst = std::abs(cert.eta_escape * cert.p_escape);
  for (int j = 0; j < k; ++j) {
    worst = std::max(worst, std::abs(cert.eta[static_cast<std::size_t>(j)] *
                                     cert.p[static_cast<std::size_t>(j)]));
  }
  for (int j = 1; j <= k; ++j) {
    const double pj = j < k ? cert.p[static_cast<std::size_t>(j)] : 0.0;
    worst = std::max(worst, std::abs(cert.lambda_j[static_cast<std::size_t>(j - 1)] *
                                     (pj - cert.m[static_cast<std::size_t>(j - 1)])));
    worst = std::max(worst, std::abs(cert.mu_j[static_cast<std::size_t>(j - 1)] *
                                     (cert.p[static_cast<std::size_t>(j - 1)] -
                                      cert.m[static_cast<std::size_t>(j - 1)])));
  }
  worst = std::max(worst,
                   std::abs(cert.lambda * (floor - cert.p[0] - cert.p_escape)));
  note("complementary slackness", worst, kKktTolerance);
  cert.max_slackness_residual = worst;

  // Dual feasibility, including lambda_K = 0.
  cert.min_dual_value = std::min({cert.lambda, cert.eta_escape});
  for (double v : cert.eta) cert.min_dual_value = std::min(cert.min_dual_value, v);
  for (double v : cert.lambda_j) cert.min_dual_value = std::min(cert.min_dual_value, v);
  for (double v : cert.mu_j) cert.min_dual_value = std::min(cert.min_dual_value, v);
  if (cert.min_dual_value < -kKktTolerance) {
    cert.violations.push_back("dual variable negative");
  }
  note("lambda_K", cert.lambda_j[static_cast<std::size_t>(k - 1)], kKktTolerance);

  // Sandwich bounds equivalent to lambda_j >= 0 and mu_j >= 0.
  cert.sandwich_bounds_hold = true;
  for (int j = 1; j <= k; ++j) {
    const double covered = (n + k - 1) * prefix_s0(j) - cert.lambda * prefix_s1(j);
    if (!(covered / prefix_t(j - 1) >= 1.0 - kKktTolerance &&
          covered / prefix_t(j) <= 1.0 + kKktTolerance)) {
      cert.sandwich_bounds_hold = false;
      cert.violations.push_back("sandwich bound failed at weight " + std::to_string(j));
    }
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Mutual information
// ---------------------------------------------------------------------------

namespace {

constexpr double kLogFloor = 1e-18;

double safe_log(double v) { return std::log(std::max(v, kLogFloor)); }

// ln(numerator/denominator) with the structural limit used when both sides
// vanish (the ratio a boundary corner approaches along feasible directions).
double log_ratio(double numerator, double denominator, double corner_ratio) {
  if (numerator <= kLogFloor && denominator <= kLogFloor) {
    return std::log(corner_ratio);
  }
  return safe_log(numerator) - safe_log(denominator);
}

// I(p) in natural-log units scaled later; gradients use base-2 consistently
// with reduced_mi_objective by dividing by ln 2.
struct ReducedMiProblem {
  ReducedMiProblem(const SystemParams& params_in, double floor_in)
      : params(params_in),
        profile(weight_profile(params_in.server_count, params_in.message_count)),
        floor(floor_in) {
    k = params.message_count;
    remainder = 1.0 - params.server_count * floor;
    simplex_weights.assign(static_cast<std::size_t>(k - 1), 0.0);
    for (int j = 1; j < k; ++j) {
      simplex_weights[static_cast<std::size_t>(j - 1)] =
          params.server_count * static_cast<double>(profile.key_counts[static_cast<std::size_t>(j)]);
    }
  }

  // v = (p_0, p_1..p_{K-1}); escape mass is floor - p_0.
  ReducedAllocation reduced(const Vector& v) const {
    ReducedAllocation r;
    r.escape_prob = std::max(floor - v[0], 0.0);
    r.coded_probs.assign(v.begin(), v.end());
    return r;
  }

  double objective(const Vector& v) const {
    return reduced_mi_objective(reduced(v), params);
  }

  Vector gradient(const Vector& v) const {
    Vector g(v.size(), 0.0);
    const auto& t = profile.query_counts;
    auto mix = [&](int j) {
      const double lower = v[static_cast<std::size_t>(j - 1)];
      const double upper = j < k ? v[static_cast<std::size_t>(j)] : 0.0;
      return j * lower + (k - j) * upper;
    };
    // d/dp_0 includes the escape chain: p_escape = floor - p_0.
    g[0] = (params.server_count - 1) * log_ratio(k * v[0], mix(1), k) -
           std::log(static_cast<double>(k));
    for (int j = 1; j < k; ++j) {
      const double tj = static_cast<double>(t[static_cast<std::size_t>(j)]);
      const double tj1 = static_cast<double>(t[static_cast<std::size_t>(j) + 1]);
      const double vj = v[static_cast<std::size_t>(j)];
      double value = tj * (k - j) * log_ratio(k * vj, mix(j), k / double(k - j));
      value += tj1 * (j + 1) * log_ratio(k * vj, mix(j + 1), k / double(j + 1));
      g[static_cast<std::size_t>(j)] = value / k;
    }
    const double ln2 = std::log(2.0);
    for (double& value : g) value /= ln2;
    return g;
  }

  Vector project(Vector v) const {
    v[0] = std::clamp(v[0], 0.0, floor);
    if (k > 1) {
      Vector tail(v.begin() + 1, v.end());
      tail = detail::project_weighted_simplex(tail, simplex_weights, remainder);
      std::copy(tail.begin(), tail.end(), v.begin() + 1);
    }
    return v;
  }

  SystemParams params;
  WeightProfile profile;
  double floor;
  double remainder;
  int k;
  Vector simplex_weights;
};

}  // namespace

ReducedSolution mi_reduced_oracle(const SystemParams& params, double download_cost) {
  const double floor = direct_floor(params, download_cost);
  const ReducedMiProblem problem(params, floor);
  Vector start(static_cast<std::size_t>(params.message_count), 0.0);
  start[0] = 0.5 * floor;
  for (int j = 1; j < params.message_count; ++j) {
    start[static_cast<std::size_t>(j)] = 1.0;
  }
  const auto result = detail::projected_gradient(
      std::move(start), [&](const Vector& v) { return problem.objective(v); },
      [&](const Vector& v) { return problem.gradient(v); },
      [&](Vector v) { return problem.project(std::move(v)); });
  if (!result.converged) {
    throw NotConverged("reduced MI oracle hit the iteration cap");
  }
  ReducedSolution solution;
  solution.method = Method::kOracle;
  solution.allocation = problem.reduced(result.point);
  solution.rho = params.trust_total() * result.value;
  return solution;
}

ReducedSolution mi_tsc_oracle(const SystemParams& params, double download_cost) {
  const double floor = direct_floor(params, download_cost);
  const auto profile = weight_profile(params.server_count, params.message_count);
  const int k = params.message_count;
  Vector weights(static_cast<std::size_t>(k), 0.0);
  std::vector<char> mask(static_cast<std::size_t>(k), 0);
  mask[0] = 1;
  for (int j = 0; j < k; ++j) {
    weights[static_cast<std::size_t>(j)] =
        params.server_count * static_cast<double>(profile.key_counts[static_cast<std::size_t>(j)]);
  }
  auto as_reduced = [&](const Vector& v) {
    ReducedAllocation r;
    r.escape_prob = 0.0;
    r.coded_probs.assign(v.begin(), v.end());
    return r;
  };
  auto objective = [&](const Vector& v) {
    return reduced_mi_objective(as_reduced(v), params);
  };
  auto gradient = [&](const Vector& v) {
    // Same entropy gradient as the escape-aware problem minus the chain term.
    Vector g(v.size(), 0.0);
    auto mix = [&](int j) {
      const double lower = v[static_cast<std::size_t>(j - 1)];
      const double upper = j < k ? v[static_cast<std::size_t>(j)] : 0.0;
      return j * lower + (k - j) * upper;
    };
    const auto& t = profile.query_counts;
    g[0] = (params.server_count - 1) * log_ratio(k * v[0], mix(1), k);
    for (int j = 1; j < k; ++j) {
      const double tj = static_cast<double>(t[static_cast<std::size_t>(j)]);
      const double tj1 = static_cast<double>(t[static_cast<std::size_t>(j) + 1]);
      const double vj = v[static_cast<std::size_t>(j)];
      double value = tj * (k - j) * log_ratio(k * vj, mix(j), k / double(k - j));
      value += tj1 * (j + 1) * log_ratio(k * vj, mix(j + 1), k / double(j + 1));
      g[static_cast<std::size_t>(j)] = value / k;
    }
    for (double& value : g) value /= std::log(2.0);
    return g;
  };
  auto project = [&](Vector v) {
    return detail::project_weighted_simplex_halfspace(v, weights, 1.0, mask, floor);
  };
  Vector start(static_cast<std::size_t>(k), 1.0 / pow_int(params.server_count, k));
  const auto result = detail::projected_gradient(std::move(start), objective, gradient,
                                                 project);
  if (!result.converged) {
    throw NotConverged("escape-free MI oracle hit the iteration cap");
  }
  ReducedSolution solution;
  solution.method = Method::kOracle;
  solution.allocation = as_reduced(result.point);
  solution.rho = params.trust_total() * result.value;
  return solution;
}

// ---------------------------------------------------------------------------
// The ratio sequence and the homogeneous MI closed form
// ---------------------------------------------------------------------------

namespace {

// Downward chain: given x_{K-1}, produce x_{K-2}..x_1 from
// y_j = (N-1)(log x_{j+1} - y_{j+1}) + y_{K-1}. Returns empty on domain
// violations (non-positive ratios).
std::vector<double> ratio_chain(int n, int k, double last_ratio) {
  std::vector<double> x(static_cast<std::size_t>(k - 1), 0.0);
  x[static_cast<std::size_t>(k - 2)] = last_ratio;
  const double y_last = std::log(((k - 1) * last_ratio + 1.0) / k);
  double y_next = y_last;
  for (int j = k - 2; j >= 1; --j) {
    const double yj = (n - 1) * (std::log(x[static_cast<std::size_t>(j)]) - y_next) + y_last;
    const double xj = (k * std::exp(yj) - (k - j)) / j;
    if (!(xj > 0.0) || !std::isfinite(xj)) return {};
    x[static_cast<std::size_t>(j - 1)] = xj;
    y_next = yj;
  }
  return x;
}

double first_ratio_closed_form(int n, int k) {
  const double denom = std::pow(static_cast<double>(k),
                                static_cast<double>(n - 2) / (n - 1)) - 1.0;
  return (k - 1) / denom;
}

std::vector<double> log_mix_of(const std::vector<double>& ratios, int k) {
  std::vector<double> out(ratios.size());
  for (std::size_t j = 1; j <= ratios.size(); ++j) {
    out[j - 1] = std::log((j * ratios[j - 1] + (k - j)) / k);
  }
  return out;
}

}  // namespace

XSequence solve_x_sequence(const SystemParams& params) {
  const int n = params.server_count;
  const int k = params.message_count;
  if (n == 2) {
    throw Degenerate("first-ratio closed form divides by zero at N = 2");
  }
  XSequence sequence;
  if (k == 2) {
    sequence.ratio = {first_ratio_closed_form(n, k)};
    sequence.log_mix = log_mix_of(sequence.ratio, k);
    return sequence;
  }
  const double target = first_ratio_closed_form(n, k);
  auto residual = [&](double last) -> double {
    const auto x = ratio_chain(n, k, last);
    if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
    return x.front() - target;
  };
  const double solved =
      detail::bisect_log_bracket(residual, 1e-6, 1e6, 2000, "ratio shooting");
  sequence.ratio = ratio_chain(n, k, solved);
  if (sequence.ratio.empty()) throw NoBracket("ratio chain left its domain");
  sequence.log_mix = log_mix_of(sequence.ratio, k);
  return sequence;
}

namespace {

ReducedAllocation mi_allocation_from_ratios(const SystemParams& params,
                                            const std::vector<double>& ratios,
                                            double download_cost, double floor,
                                            bool* escape_feasible) {
  const int k = params.message_count;
  const auto profile = weight_profile(params.server_count, k);
  double denominator = 0.0;
  double product = 1.0;
  for (int j = 1; j < k; ++j) {
    product /= ratios[static_cast<std::size_t>(j - 1)];
    denominator += params.server_count *
                   static_cast<double>(profile.key_counts[static_cast<std::size_t>(j)]) * product;
  }
  const double p0 = denominator > 0.0
                        ? (params.server_count - 1) * (download_cost - 1.0) / denominator
                        : 0.0;
  ReducedAllocation reduced;
  reduced.coded_probs.assign(static_cast<std::size_t>(k), 0.0);
  reduced.coded_probs[0] = p0;
  product = 1.0;
  for (int j = 1; j < k; ++j) {
    product /= ratios[static_cast<std::size_t>(j - 1)];
    reduced.coded_probs[static_cast<std::size_t>(j)] = p0 * product;
  }
  const double escape = floor - p0;
  *escape_feasible = escape >= -1e-12;
  reduced.escape_prob = std::max(escape, 0.0);
  return reduced;
}

// Escape-free branch: p_0 pinned to the floor, remaining ratios shot so the
// distribution normalizes.
ReducedAllocation mi_escape_free_closed_form(const SystemParams& params, double floor) {
  const int n = params.server_count;
  const int k = params.message_count;
  const auto profile = weight_profile(n, k);
  ReducedAllocation reduced;
  reduced.escape_prob = 0.0;
  reduced.coded_probs.assign(static_cast<std::size_t>(k), 0.0);
  reduced.coded_probs[0] = floor;
  if (k == 2) {
    reduced.coded_probs[1] =
        (1.0 - n * floor) / (n * static_cast<double>(profile.key_counts[1]));
    return reduced;
  }
  const double target = (1.0 - n * floor) / (n * floor);
  auto residual = [&](double last) -> double {
    const auto x = ratio_chain(n, k, last);
    if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    double product = 1.0;
    for (int j = 1; j < k; ++j) {
      product /= x[static_cast<std::size_t>(j - 1)];
      total += static_cast<double>(profile.key_counts[static_cast<std::size_t>(j)]) * product;
    }
    return total - target;
  };
  const double solved =
      detail::bisect_log_bracket(residual, 1e-6, 1e6, 2000, "escape-free shooting");
  const auto ratios = ratio_chain(n, k, solved);
  double product = 1.0;
  for (int j = 1; j < k; ++j) {
    product /= ratios[static_cast<std::size_t>(j - 1)];
    reduced.coded_probs[static_cast<std::size_t>(j)] = floor * product;
  }
  return reduced;
}

}  // namespace

ReducedSolution mi_optimal_homogeneous(const SystemParams& params, double download_cost) {
  if (!params.homogeneous_trust()) {
    throw OutOfRange("MI closed form requires homogeneous trust");
  }
  const double floor = direct_floor(params, download_cost);
  if (params.server_count == 2) {
    return mi_reduced_oracle(params, download_cost);
  }
  const auto sequence = solve_x_sequence(params);
  bool escape_feasible = false;
  ReducedAllocation reduced = mi_allocation_from_ratios(params, sequence.ratio,
                                                        download_cost, floor,
                                                        &escape_feasible);
  if (!escape_feasible) {
    reduced = mi_escape_free_closed_form(params, floor);
  }
  ReducedSolution solution;
  solution.method = Method::kClosedForm;
  solution.allocation = std::move(reduced);
  solution.rho = params.trust_total() * reduced_mi_objective(solution.allocation, params);
  return solution;
}

FullSolution mi_full_oracle(const SystemParams& params, double download_cost) {
  check_key_space(params);
  const double floor = direct_floor(params, download_cost);
  const FullProblem problem(params);
  const int k = params.message_count;
  const std::size_t block = problem.keys.size();
  const double mass_floor = params.server_count * floor;
  const double ln2 = std::log(2.0);

  auto objective = [&](const Vector& v) {
    double total = 0.0;
    for (int server = 1; server <= params.server_count; ++server) {
      double mi = 0.0;
      for (int qid = 0; qid < problem.query_count[static_cast<std::size_t>(server - 1)]; ++qid) {
        double mean = 0.0;
        for (int message = 1; message <= k; ++message) {
          mean += problem.mass(v, server, qid, message);
        }
        mean /= k;
        if (mean <= 1e-15) continue;
        for (int message = 1; message <= k; ++message) {
          const double p = problem.mass(v, server, qid, message);
          if (p > 1e-15) mi += p / k * std::log2(p / mean);
        }
      }
      total += params.trust[static_cast<std::size_t>(server - 1)] * std::max(mi, 0.0);
    }
    return total;
  };
  auto gradient = [&](const Vector& v) {
    Vector g(v.size(), 0.0);
    for (int server = 1; server <= params.server_count; ++server) {
      const double w = params.trust[static_cast<std::size_t>(server - 1)];
      for (int qid = 0; qid < problem.query_count[static_cast<std::size_t>(server - 1)]; ++qid) {
        double mean = 0.0;
        for (int message = 1; message <= k; ++message) {
          mean += problem.mass(v, server, qid, message);
        }
        mean /= k;
        for (int message = 1; message <= k; ++message) {
          const double p = problem.mass(v, server, qid, message);
          const double partial =
              w / k * (safe_log(p) - safe_log(mean)) / ln2;
          const auto& members =
              problem.member_lists[static_cast<std::size_t>(server - 1)]
                                  [static_cast<std::size_t>(qid * k + message - 1)];
          const std::size_t offset = static_cast<std::size_t>(message - 1) * block;
          for (std::size_t key_index : members) g[offset + key_index] += partial;
        }
      }
    }
    return g;
  };
  // Vertices of one block: either all mass on a cheap key, or the floor on a
  // cheap key plus the rest on any other key. A product vertex is described
  // by (cheap index, other index or -1) per message block.
  using VertexId = std::vector<int>;
  auto add_vertex = [&](Vector& v, const VertexId& id, double weight) {
    for (int message = 0; message < k; ++message) {
      const std::size_t offset = static_cast<std::size_t>(message) * block;
      const int cheap = id[static_cast<std::size_t>(2 * message)];
      const int other = id[static_cast<std::size_t>(2 * message + 1)];
      if (other < 0) {
        v[offset + static_cast<std::size_t>(cheap)] += weight;
      } else {
        v[offset + static_cast<std::size_t>(cheap)] += weight * mass_floor;
        v[offset + static_cast<std::size_t>(other)] += weight * (1.0 - mass_floor);
      }
    }
  };
  auto vertex_score = [&](const Vector& g, const VertexId& id) {
    double score = 0.0;
    for (int message = 0; message < k; ++message) {
      const std::size_t offset = static_cast<std::size_t>(message) * block;
      const int cheap = id[static_cast<std::size_t>(2 * message)];
      const int other = id[static_cast<std::size_t>(2 * message + 1)];
      if (other < 0) {
        score += g[offset + static_cast<std::size_t>(cheap)];
      } else {
        score += mass_floor * g[offset + static_cast<std::size_t>(cheap)] +
                 (1.0 - mass_floor) * g[offset + static_cast<std::size_t>(other)];
      }
    }
    return score;
  };
  auto linear_oracle = [&](const Vector& g) {
    VertexId id(static_cast<std::size_t>(2 * k), -1);
    for (int message = 0; message < k; ++message) {
      const std::size_t offset = static_cast<std::size_t>(message) * block;
      double best_direct = std::numeric_limits<double>::infinity();
      double best_other = std::numeric_limits<double>::infinity();
      int direct_index = 0, other_index = 0;
      for (std::size_t i = 0; i < block; ++i) {
        const double value = g[offset + i];
        if (problem.direct_mask[i]) {
          if (value < best_direct) {
            best_direct = value;
            direct_index = static_cast<int>(i);
          }
        } else if (value < best_other) {
          best_other = value;
          other_index = static_cast<int>(i);
        }
      }
      id[static_cast<std::size_t>(2 * message)] = direct_index;
      if (best_other < best_direct && mass_floor < 1.0) {
        id[static_cast<std::size_t>(2 * message + 1)] = other_index;
      }
    }
    return id;
  };

  // Pairwise Frank-Wolfe: move weight from the worst active vertex to the
  // oracle vertex. Linearly convergent on polytopes and the duality gap
  // still certifies optimality.
  std::map<VertexId, double> active;
  Vector x(block * static_cast<std::size_t>(k), 0.0);
  {
    VertexId id(static_cast<std::size_t>(2 * k), -1);
    for (int message = 0; message < k; ++message) {
      int cheap = -1, other = -1;
      for (std::size_t i = 0; i < block; ++i) {
        if (problem.direct_mask[i] && cheap < 0) cheap = static_cast<int>(i);
        if (!problem.direct_mask[i] && other < 0) other = static_cast<int>(i);
      }
      id[static_cast<std::size_t>(2 * message)] = cheap;
      if (mass_floor < 1.0) id[static_cast<std::size_t>(2 * message + 1)] = other;
    }
    active[id] = 1.0;
    add_vertex(x, id, 1.0);
  }

  const detail::FrankWolfeOptions options;
  bool converged = false;
  for (std::int64_t t = 0; t < options.max_iterations; ++t) {
    const Vector g = gradient(x);
    const VertexId toward = linear_oracle(g);
    const double gap = detail::dot(g, x) - vertex_score(g, toward);
    if (gap <= options.gap_tolerance) {
      converged = true;
      break;
    }
    auto away = active.begin();
    double away_score = -std::numeric_limits<double>::infinity();
    for (auto it = active.begin(); it != active.end(); ++it) {
      const double score = vertex_score(g, it->first);
      if (score > away_score) {
        away_score = score;
        away = it;
      }
    }
    Vector direction(x.size(), 0.0);
    add_vertex(direction, toward, 1.0);
    add_vertex(direction, away->first, -1.0);
    const double max_step = away->second;
    auto slope = [&](double alpha) {
      Vector probe = x;
      for (std::size_t i = 0; i < probe.size(); ++i) {
        probe[i] = std::max(probe[i] + alpha * direction[i], 0.0);
      }
      return detail::dot(gradient(probe), direction);
    };
    double step = max_step;
    if (slope(max_step) > 0.0) {
      double lo = 0.0, hi = max_step;
      for (int round = 0; round < 60; ++round) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? hi : lo) = mid;
      }
      step = 0.5 * (lo + hi);
    }
    if (step <= 0.0) continue;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::max(x[i] + step * direction[i], 0.0);
    }
    active[toward] += step;
    if (step >= max_step - 1e-15) {
      active.erase(away);
    } else {
      away->second -= step;
    }
    if (t % 1024 == 1023) {
      // Rebuild from the weights to cancel floating-point drift.
      std::fill(x.begin(), x.end(), 0.0);
      double total = 0.0;
      for (const auto& [id, weight] : active) total += weight;
      for (auto& [id, weight] : active) {
        weight /= total;
        add_vertex(x, id, weight);
      }
    }
  }
  if (!converged) {
    throw NotConverged("full MI oracle did not close the duality gap");
  }
  return {allocation_from_vector(problem, x), objective(x)};
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

std::vector<double> default_download_grid(const SystemParams& params, int points) {
  const double dstar = capacity_download_cost(params);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = 1.0 + (dstar - 1.0) * i / (points - 1);
  }
  return grid;
}

std::vector<TradeoffPoint> tradeoff_curve(Metric metric, const SystemParams& params,
                                          std::span<const double> download_grid) {
  std::vector<TradeoffPoint> points;
  const bool small_key_space = key_space_size(params) <= 1000;
  auto base_point = [&](Method method, const std::string& solver, double d, double rho) {
    TradeoffPoint point;
    point.metric = metric;
    point.method = method;
    point.solver = solver;
    point.server_count = params.server_count;
    point.message_count = params.message_count;
    point.trust = params.trust;
    point.download_cost = d;
    point.rho = rho;
    return point;
  };
  for (double d : download_grid) {
    if (metric == Metric::kMaxLeakage) {
      points.push_back(base_point(Method::kClosedForm, "", d,
                                  maxl_rho_closed_form(params, d)));
      points.push_back(base_point(Method::kOracle, "reduced", d,
                                  maxl_reduced_oracle(params, d).rho));
      if (small_key_space) {
        points.push_back(base_point(Method::kOracle, "full", d,
                                    maxl_full_oracle(params, d).rho));
      }
    } else {
      if (params.homogeneous_trust() || params.server_count > 2) {
        // Heterogeneous evaluation of the homogeneous-optimal allocation:
        // escape mass sits on the most trusted server.
        const auto solution = mi_optimal_homogeneous(
            SystemParams(params.server_count, params.message_count), d);
        const auto expanded = expand_reduced(solution.allocation, params,
                                             DirectPlacement::kMostTrusted);
        points.push_back(base_point(solution.method,
                                    solution.method == Method::kClosedForm ? "" : "reduced",
                                    d, rho_mi(expanded, params.trust)));
      }
      const auto reduced = mi_reduced_oracle(params, d);
      points.push_back(base_point(Method::kOracle, "reduced", d, reduced.rho));
      points.push_back(base_point(Method::kOracle, "tsc", d, mi_tsc_oracle(params, d).rho));
      if (small_key_space) {
        points.push_back(base_point(Method::kOracle, "full", d,
                                    mi_full_oracle(params, d).rho));
      }
    }
  }
  return points;
}

double hull_check(std::span<const TradeoffPoint> tsc_curve, const TradeoffPoint& extreme,
                  std::span<const TradeoffPoint> optimal_curve) {
  std::vector<std::pair<double, double>> nodes;
  nodes.reserve(tsc_curve.size() + 1);
  nodes.emplace_back(extreme.download_cost, extreme.rho);
  for (const auto& point : tsc_curve) {
    nodes.emplace_back(point.download_cost, point.rho);
  }
  std::sort(nodes.begin(), nodes.end());
  // Lower convex hull by monotone chain.
  std::vector<std::pair<double, double>> hull;
  for (const auto& node : nodes) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      const double cross = (b.first - a.first) * (node.second - a.second) -
                           (b.second - a.second) * (node.first - a.first);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(node);
  }
  auto hull_value = [&](double d) {
    if (d <= hull.front().first) return hull.front().second;
    if (d >= hull.back().first) return hull.back().second;
    for (std::size_t i = 1; i < hull.size(); ++i) {
      if (d <= hull[i].first) {
        const auto& a = hull[i - 1];
        const auto& b = hull[i];
        const double w = (d - a.first) / (b.first - a.first);
        return a.second + w * (b.second - a.second);
      }
    }
    return hull.back().second;
  };
  double worst = 0.0;
  for (const auto& point : optimal_curve) {
    worst = std::max(worst, std::abs(hull_value(point.download_cost) - point.rho));
  }
  return worst;
}

nlohmann::json to_json(const MaxLKktCertificate& certificate) {
  return nlohmann::json{
      {"primal",
       {{"p_sharp", certificate.p_escape}, {"p", certificate.p}, {"m", certificate.m}}},
      {"dual",
       {{"eta_sharp", certificate.eta_escape},
        {"eta", certificate.eta},
        {"lambda", certificate.lambda},
        {"mu", certificate.mu},
        {"lambda_j", certificate.lambda_j},
        {"mu_j", certificate.mu_j}}},
      {"residuals",
       {{"stationarity", certificate.max_stationarity_residual},
        {"primal", certificate.max_primal_residual},
        {"slackness", certificate.max_slackness_residual},
        {"min_dual", certificate.min_dual_value}}},
      {"sandwich_bounds", certificate.sandwich_bounds_hold},
      {"violations", certificate.violations},
      {"ok", certificate.ok()}};
}

}  // namespace wpir

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

// Internal numerical machinery for the optimizer module. Not installed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "wpir/errors.hpp"

namespace wpir::detail {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

// Euclidean projection onto {p >= 0, sum_i a_i p_i = total} with a_i > 0.
// Exact breakpoint walk, O(n log n).
inline Vector project_weighted_simplex(const Vector& z, const Vector& a, double total) {
  const std::size_t n = z.size();
  Vector p(n, 0.0);
  if (total <= 0.0) return p;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return z[i] / a[i] > z[j] / a[j];
  });
  double weighted_sum = 0.0;
  double weight_sq = 0.0;
  double nu = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t i = order[m];
    weighted_sum += a[i] * z[i];
    weight_sq += a[i] * a[i];
    const double candidate = (weighted_sum - total) / weight_sq;
    const double lower = m + 1 < n ? z[order[m + 1]] / a[order[m + 1]]
                                   : -std::numeric_limits<double>::infinity();
    nu = candidate;
    if (candidate >= lower) break;
  }
  for (std::size_t i = 0; i < n; ++i) p[i] = std::max(0.0, z[i] - nu * a[i]);
  return p;
}

// Projection onto {p >= 0, a.p = total, sum_{i in mask} p_i >= floor}. The
// shift multiplier theta >= 0 is found by bisection; mask entries are 0/1.
inline Vector project_weighted_simplex_halfspace(const Vector& z, const Vector& a,
                                                 double total, const std::vector<char>& mask,
                                                 double floor_mass) {
  auto masked_mass = [&](const Vector& p) {
    double mass = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (mask[i]) mass += p[i];
    }
    return mass;
  };
  Vector p = project_weighted_simplex(z, a, total);
  if (masked_mass(p) >= floor_mass - 1e-14) return p;

  auto shifted = [&](double theta) {
    Vector w = z;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask[i]) w[i] += theta;
    }
    return project_weighted_simplex(w, a, total);
  };
  double lo = 0.0, hi = 1.0;
  for (int round = 0; round < 200; ++round) {
    p = shifted(hi);
    if (masked_mass(p) >= floor_mass) break;
    lo = hi;
    hi *= 2.0;
    if (round == 199) throw Infeasible("halfspace floor unreachable on the simplex");
  }
  for (int round = 0; round < 100; ++round) {
    const double mid = 0.5 * (lo + hi);
    p = shifted(mid);
    if (masked_mass(p) >= floor_mass) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  p = shifted(hi);
  return p;
}

struct SolverResult {
  Vector point;
  double value = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
};

struct PolyakOptions {
  std::int64_t max_iterations = 500000;
  double delta_tolerance = 1e-10;
  int window = 200;
};

// Subgradient method with Polyak-style steps against a running estimate of
// the optimum (best value minus delta, delta halved whenever progress
// stalls). Returns the best feasible iterate.
template <class Objective, class Subgradient, class Projector>
SolverResult polyak_subgradient(Vector start, Objective f, Subgradient subgrad,
                                Projector project, const PolyakOptions& opts = {}) {
  Vector x = project(std::move(start));
  double fx = f(x);
  SolverResult best{x, fx, 0, false};
  const double scale = std::max(1.0, std::abs(fx));
  double delta = 0.05 * scale;
  double checkpoint = fx;
  std::int64_t t = 0;
  for (; t < opts.max_iterations; ++t) {
    const Vector g = subgrad(x);
    const double norm_sq = dot(g, g);
    if (norm_sq < 1e-30) break;
    const double step = (fx - (best.value - delta)) / norm_sq;
    if (step > 0.0) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step * g[i];
      x = project(std::move(x));
    }
    fx = f(x);
    if (fx < best.value) {
      best.value = fx;
      best.point = x;
    }
    if (t % opts.window == opts.window - 1) {
      if (checkpoint - best.value < delta / 4.0) {
        delta *= 0.5;
        if (delta < opts.delta_tolerance * scale) {
          best.converged = true;
          break;
        }
        // Re-center on the incumbent so the smaller target is reachable.
        x = best.point;
        fx = best.value;
      }
      checkpoint = best.value;
    }
  }
  best.iterations = t;
  return best;
}

struct ProjectedGradientOptions {
  std::int64_t max_iterations = 500000;
  double gradient_tolerance = 1e-8;
  double initial_step = 1.0;
};

// Projected gradient with backtracking line search for smooth convex
// objectives. Convergence is declared on the projected-gradient norm.
template <class Objective, class Gradient, class Projector>
SolverResult projected_gradient(Vector start, Objective f, Gradient grad,
                                Projector project,
                                const ProjectedGradientOptions& opts = {}) {
  Vector x = project(std::move(start));
  double fx = f(x);
  double step = opts.initial_step;
  SolverResult result{x, fx, 0, false};
  std::int64_t t = 0;
  for (; t < opts.max_iterations; ++t) {
    const Vector g = grad(x);
    // Stationarity measured with the unit-step gradient map.
    Vector probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) probe[i] -= g[i];
    probe = project(std::move(probe));
    double move = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      move += (probe[i] - x[i]) * (probe[i] - x[i]);
    }
    if (std::sqrt(move) <= opts.gradient_tolerance) {
      result.converged = true;
      break;
    }
    bool first_try = true;
    while (true) {
      Vector candidate = x;
      for (std::size_t i = 0; i < x.size(); ++i) candidate[i] -= step * g[i];
      candidate = project(std::move(candidate));
      double inner = 0.0, dist_sq = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = candidate[i] - x[i];
        inner += g[i] * d;
        dist_sq += d * d;
      }
      const double fc = f(candidate);
      if (fc <= fx + inner + dist_sq / (2.0 * step) + 1e-15 || step < 1e-18) {
        // Grow the step only on measurable progress; once objective
        // differences sink below float resolution this freezes the step and
        // the update becomes a plain (contracting) gradient map.
        const bool improved = fc < fx - 1e-14 * std::max(1.0, std::abs(fx));
        x = std::move(candidate);
        fx = fc;
        if (first_try && improved) step = std::min(step * 2.0, 1e6);
        break;
      }
      first_try = false;
      step *= 0.5;
    }
  }
  result.iterations = t;
  result.point = x;
  result.value = fx;
  return result;
}

struct FrankWolfeOptions {
  std::int64_t max_iterations = 500000;
  double gap_tolerance = 1e-6;
};

// Scans [lo, hi] on a log grid for a sign change of `f` (NaN cells are
// skipped), then bisects. Used by the shooting solvers.
inline double bisect_log_bracket(const std::function<double(double)>& f, double lo,
                                 double hi, int grid_points, const char* what) {
  double prev_x = 0.0, prev_v = std::numeric_limits<double>::quiet_NaN();
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool found = false;
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int i = 0; i <= grid_points; ++i) {
    const double x = std::exp(log_lo + (log_hi - log_lo) * i / grid_points);
    const double v = f(x);
    if (!std::isnan(v) && !std::isnan(prev_v) && prev_v * v <= 0.0) {
      bracket_lo = prev_x;
      bracket_hi = x;
      found = true;
      break;
    }
    prev_x = x;
    prev_v = v;
  }
  if (!found) throw NoBracket(std::string("no sign change found for ") + what);
  double flo = f(bracket_lo);
  for (int round = 0; round < 200 && bracket_hi - bracket_lo > 1e-12; ++round) {
    const double mid = 0.5 * (bracket_lo + bracket_hi);
    const double fm = f(mid);
    if (std::isnan(fm)) break;
    if (flo * fm <= 0.0) {
      bracket_hi = mid;
    } else {
      bracket_lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (bracket_lo + bracket_hi);
}

}  // namespace wpir::detail

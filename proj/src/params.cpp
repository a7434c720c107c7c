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

#include "wpir/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wpir {

Permutation::Permutation(std::vector<int> image) : image_(std::move(image)) {
  const int n = static_cast<int>(image_.size());
  std::vector<char> seen(static_cast<std::size_t>(std::max(n, 1)), 0);
  for (int v : image_) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) {
      throw NotBijective("permutation image is not a bijection onto 0.." +
                         std::to_string(n - 1));
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

bool Permutation::is_cyclic() const {
  const int n = size();
  for (int server = 1; server <= n; ++server) {
    const int next = server == n ? 1 : server + 1;
    if (image_[next - 1] != (image_[server - 1] + 1) % n) return false;
  }
  return true;
}

std::vector<Permutation> cyclic_permutations(int server_count) {
  std::vector<Permutation> out;
  out.reserve(static_cast<std::size_t>(server_count));
  for (int shift = 0; shift < server_count; ++shift) {
    std::vector<int> image(static_cast<std::size_t>(server_count));
    for (int server = 1; server <= server_count; ++server) {
      image[server - 1] = (shift + server - 1) % server_count;
    }
    out.emplace_back(std::move(image));
  }
  return out;
}

std::vector<Permutation> all_permutations(int server_count) {
  std::vector<int> image(static_cast<std::size_t>(server_count));
  std::iota(image.begin(), image.end(), 0);
  std::vector<Permutation> out;
  do {
    out.emplace_back(image);
  } while (std::next_permutation(image.begin(), image.end()));
  return out;
}

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  if (a != 0 && b > std::numeric_limits<std::int64_t>::max() / a) {
    throw Overflow("integer overflow in weight profile");
  }
  return a * b;
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t value = 1;
  for (int i = 1; i <= k; ++i) {
    value = checked_mul(value, n - k + i) / i;
  }
  return value;
}

}  // namespace

std::int64_t WeightProfile::query_total() const {
  std::int64_t total = 0;
  for (std::int64_t v : query_counts) total += v;
  return total;
}

std::int64_t WeightProfile::key_total() const {
  std::int64_t total = 0;
  for (std::int64_t v : key_counts) total += v;
  return total;
}

WeightProfile weight_profile(int server_count, int message_count) {
  if (server_count < 2 || message_count < 2) {
    throw OutOfRange("weight profile requires at least 2 servers and 2 messages");
  }
  // Reject once N^K leaves the 64-bit range; the per-term products below are
  // all bounded by it.
  std::int64_t power = 1;
  for (int i = 0; i < message_count; ++i) power = checked_mul(power, server_count);

  WeightProfile profile;
  profile.query_counts.resize(static_cast<std::size_t>(message_count) + 1);
  profile.key_counts.resize(static_cast<std::size_t>(message_count));
  for (int j = 0; j <= message_count; ++j) {
    std::int64_t term = binomial(message_count, j);
    for (int i = 0; i < j; ++i) term = checked_mul(term, server_count - 1);
    profile.query_counts[static_cast<std::size_t>(j)] = term;
  }
  for (int j = 0; j < message_count; ++j) {
    std::int64_t term = binomial(message_count - 1, j);
    for (int i = 0; i < j; ++i) term = checked_mul(term, server_count - 1);
    profile.key_counts[static_cast<std::size_t>(j)] = term;
  }
  return profile;
}

int hamming_weight(std::span<const int> values) {
  int weight = 0;
  for (int v : values) weight += v != 0;
  return weight;
}

SystemParams::SystemParams(int servers, int messages, std::vector<double> trust_weights)
    : server_count(servers),
      message_count(messages),
      message_length(servers - 1),
      trust(std::move(trust_weights)) {
  if (servers < 2) throw OutOfRange("need at least 2 servers");
  if (messages < 2) throw OutOfRange("need at least 2 messages");
  if (trust.empty()) {
    trust.assign(static_cast<std::size_t>(servers), 1.0 / servers);
  }
  if (static_cast<int>(trust.size()) != servers) {
    throw OutOfRange("trust weight count must equal the server count");
  }
  for (double w : trust) {
    if (!(w > 0) || !std::isfinite(w)) {
      throw OutOfRange("trust weights must be positive and finite");
    }
  }
  std::sort(trust.begin(), trust.end());
}

double SystemParams::trust_total() const {
  return std::accumulate(trust.begin(), trust.end(), 0.0);
}

bool SystemParams::homogeneous_trust(double tol) const {
  for (double w : trust) {
    if (std::abs(w - trust.front()) > tol) return false;
  }
  return true;
}

}  // namespace wpir

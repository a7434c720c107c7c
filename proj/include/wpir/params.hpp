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
#include <span>
#include <vector>

#include "wpir/errors.hpp"

namespace wpir {

// One stored symbol, an element of GF(2^8). Addition is bitwise XOR, so every
// symbol is its own inverse and 0 is the identity.
using Symbol = std::uint8_t;

constexpr Symbol add(Symbol a, Symbol b) { return static_cast<Symbol>(a ^ b); }

// A bijection from servers [1:N] onto retrieval slots [0:N-1].
class Permutation {
 public:
  // Throws NotBijective unless `image` contains each of 0..N-1 exactly once.
  explicit Permutation(std::vector<int> image);

  int size() const { return static_cast<int>(image_.size()); }
  // Slot assigned to `server` (1-based).
  int operator()(int server) const { return image_[server - 1]; }
  const std::vector<int>& image() const { return image_; }

  // True when the slots advance by one (mod N) from each server to the next.
  bool is_cyclic() const;

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.image_ == b.image_;
  }
  friend bool operator<(const Permutation& a, const Permutation& b) {
    return a.image_ < b.image_;
  }

 private:
  std::vector<int> image_;
};

// The N cyclic permutations, sorted by the slot of server 1.
std::vector<Permutation> cyclic_permutations(int server_count);

// All N! permutations in lexicographic image order.
std::vector<Permutation> all_permutations(int server_count);

// Counts of query vectors (t_j, j in [0:K]) and key vectors (s_j, j in
// [0:K-1]) of each Hamming weight over the alphabet [0:N-1].
struct WeightProfile {
  std::vector<std::int64_t> query_counts;  // t_j = C(K,j) (N-1)^j
  std::vector<std::int64_t> key_counts;    // s_j = C(K-1,j) (N-1)^j

  std::int64_t query_total() const;  // N^K
  std::int64_t key_total() const;    // N^(K-1)
};

// Throws Overflow when N^K does not fit a 64-bit signed integer.
WeightProfile weight_profile(int server_count, int message_count);

// Number of nonzero entries. Entries are expected in [0:N-1].
int hamming_weight(std::span<const int> values);

// System-wide parameters shared by every module. Trust weights are kept
// unnormalized and sorted ascending, so server 1 is the most trusted.
struct SystemParams {
  int server_count = 0;
  int message_count = 0;
  int message_length = 0;  // always server_count - 1
  std::vector<double> trust;

  // Empty `trust_weights` means homogeneous 1/N per server.
  SystemParams(int servers, int messages, std::vector<double> trust_weights = {});

  double trust_total() const;
  bool homogeneous_trust(double tol = 1e-12) const;
};

}  // namespace wpir

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
#include <string>
#include <variant>
#include <vector>

#include "wpir/params.hpp"

// The retrieval code. A user who wants message k draws a private random key
// and sends one query to every server. The key is either a single server
// index (fetch the whole message from that server, all others get the all-zero
// query) or a pair of an interference-index vector and a permutation, in
// which case every server returns one XOR-coded symbol and the user cancels
// the interference during decoding.

namespace wpir {

// K messages of L = N-1 symbols. Index 0 of every message is a virtual dummy
// symbol equal to 0 and is never stored.
struct MessageStore {
  SystemParams params;
  std::vector<Symbol> data;  // row-major, message_count x message_length

  // message is 1-based; index in [0:L], 0 returns the dummy 0.
  Symbol at(int message, int index) const;
  std::span<const Symbol> row(int message) const;

  static MessageStore random(const SystemParams& params, std::uint64_t seed);
};

// Store file format: "WPIR" magic, one version byte (1), big-endian u16
// message count and message length, then the raw symbol rows.
std::vector<std::uint8_t> serialize_store(const MessageStore& store);
MessageStore parse_store(std::span<const std::uint8_t> bytes);
void save_store(const MessageStore& store, const std::string& path);
MessageStore load_store(const std::string& path);

struct DirectKey {
  int server = 0;  // 1-based
};

struct CodedKey {
  // One symbol index per non-requested message; selects what enters the
  // interference signal.
  std::vector<int> interference_indices;
  Permutation assignment;  // maps each server to its retrieval slot
};

// The user's private randomness.
class RandomKey {
 public:
  static RandomKey direct(int server);
  static RandomKey coded(std::vector<int> interference_indices, Permutation assignment);

  bool is_direct() const { return std::holds_alternative<DirectKey>(value_); }
  const DirectKey& direct_key() const { return std::get<DirectKey>(value_); }
  const CodedKey& coded_key() const { return std::get<CodedKey>(value_); }

  std::string label() const;

  // Matches the deterministic enumeration order: direct keys by server, then
  // coded keys lexicographic by (indices, assignment image).
  friend bool operator<(const RandomKey& a, const RandomKey& b);
  friend bool operator==(const RandomKey& a, const RandomKey& b);

 private:
  explicit RandomKey(std::variant<DirectKey, CodedKey> value) : value_(std::move(value)) {}
  std::variant<DirectKey, CodedKey> value_;
};

struct EscapeQuery {
  int message = 0;  // 1-based; requests the whole message
};

struct VectorQuery {
  std::vector<int> coords;  // length K, entries in [0:N-1]
};

class Query {
 public:
  static Query escape(int message);
  static Query vec(std::vector<int> coords);

  bool is_escape() const { return std::holds_alternative<EscapeQuery>(value_); }
  const EscapeQuery& escape_query() const { return std::get<EscapeQuery>(value_); }
  const VectorQuery& vector_query() const { return std::get<VectorQuery>(value_); }

  bool is_zero_vector() const;
  // L for an escape, 0 for the all-zero vector, 1 otherwise.
  int answer_length(const SystemParams& params) const;
  std::string label() const;

  friend bool operator<(const Query& a, const Query& b);
  friend bool operator==(const Query& a, const Query& b);

 private:
  explicit Query(std::variant<EscapeQuery, VectorQuery> value) : value_(std::move(value)) {}
  std::variant<EscapeQuery, VectorQuery> value_;
};

using Answer = std::vector<Symbol>;

// Queries for all N servers when requesting `message` under `key`. For a
// coded key, server n receives the index vector with
// (assignment(n) - sum(indices)) mod N inserted at position `message`.
std::vector<Query> encode_queries(int message, const RandomKey& key,
                                  const SystemParams& params);

// XOR of one symbol from each non-requested message.
Symbol interference(std::span<const int> indices, int message, const MessageStore& store);

// Escape: the full message. All-zero vector: empty. Otherwise the single
// symbol XOR_m W_m[q_m].
Answer answer(const Query& query, const MessageStore& store);

// Reconstructs the requested message from the N answers. Throws
// MalformedAnswers when a length disagrees with the query contract.
std::vector<Symbol> decode(const std::vector<Answer>& answers, int message,
                           const RandomKey& key, const SystemParams& params);

// N + N^(K-1) N! keys or TooLarge beyond 1e5.
std::vector<RandomKey> enumerate_key_space(const SystemParams& params);
std::int64_t key_space_size(const SystemParams& params);

}  // namespace wpir

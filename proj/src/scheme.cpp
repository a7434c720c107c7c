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

#include "wpir/scheme.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "wpir/rng.hpp"

namespace wpir {

Symbol MessageStore::at(int message, int index) const {
  if (index == 0) return 0;
  return data[static_cast<std::size_t>(message - 1) * params.message_length + index - 1];
}

std::span<const Symbol> MessageStore::row(int message) const {
  return {data.data() + static_cast<std::size_t>(message - 1) * params.message_length,
          static_cast<std::size_t>(params.message_length)};
}

MessageStore MessageStore::random(const SystemParams& params, std::uint64_t seed) {
  MessageStore store{params, {}};
  store.data.resize(static_cast<std::size_t>(params.message_count) * params.message_length);
  SplitMix64 rng(seed);
  for (auto& symbol : store.data) symbol = static_cast<Symbol>(rng.next() & 0xFF);
  return store;
}

namespace {

constexpr char kMagic[4] = {'W', 'P', 'I', 'R'};
constexpr std::uint8_t kStoreVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> bytes, std::size_t at) {
  return static_cast<std::uint16_t>((bytes[at] << 8) | bytes[at + 1]);
}

}  // namespace

std::vector<std::uint8_t> serialize_store(const MessageStore& store) {
  std::vector<std::uint8_t> out;
  out.reserve(9 + store.data.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kStoreVersion);
  put_u16(out, static_cast<std::uint16_t>(store.params.message_count));
  put_u16(out, static_cast<std::uint16_t>(store.params.message_length));
  out.insert(out.end(), store.data.begin(), store.data.end());
  return out;
}

MessageStore parse_store(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 9 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw FormatError("not a message-store file");
  }
  if (bytes[4] != kStoreVersion) {
    throw FormatError("unsupported store version " + std::to_string(bytes[4]));
  }
  const int messages = get_u16(bytes, 5);
  const int length = get_u16(bytes, 7);
  const std::size_t expected = 9 + static_cast<std::size_t>(messages) * length;
  if (bytes.size() != expected) {
    throw FormatError("store payload size mismatch");
  }
  MessageStore store{SystemParams(length + 1, messages), {}};
  store.data.assign(bytes.begin() + 9, bytes.end());
  return store;
}

void save_store(const MessageStore& store, const std::string& path) {
  const auto bytes = serialize_store(store);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

MessageStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_store(bytes);
}

RandomKey RandomKey::direct(int server) { return RandomKey(DirectKey{server}); }

RandomKey RandomKey::coded(std::vector<int> interference_indices, Permutation assignment) {
  return RandomKey(CodedKey{std::move(interference_indices), std::move(assignment)});
}

std::string RandomKey::label() const {
  std::ostringstream os;
  if (is_direct()) {
    os << "direct(" << direct_key().server << ")";
  } else {
    const auto& coded = coded_key();
    os << "coded(";
    for (int v : coded.interference_indices) os << v;
    os << ",[";
    for (std::size_t i = 0; i < coded.assignment.image().size(); ++i) {
      if (i) os << ",";
      os << coded.assignment.image()[i];
    }
    os << "])";
  }
  return os.str();
}

bool operator<(const RandomKey& a, const RandomKey& b) {
  if (a.is_direct() != b.is_direct()) return a.is_direct();
  if (a.is_direct()) return a.direct_key().server < b.direct_key().server;
  const auto& ca = a.coded_key();
  const auto& cb = b.coded_key();
  if (ca.interference_indices != cb.interference_indices) {
    return ca.interference_indices < cb.interference_indices;
  }
  return ca.assignment < cb.assignment;
}

bool operator==(const RandomKey& a, const RandomKey& b) {
  if (a.is_direct() != b.is_direct()) return false;
  if (a.is_direct()) return a.direct_key().server == b.direct_key().server;
  return a.coded_key().interference_indices == b.coded_key().interference_indices &&
         a.coded_key().assignment == b.coded_key().assignment;
}

Query Query::escape(int message) { return Query(EscapeQuery{message}); }

Query Query::vec(std::vector<int> coords) { return Query(VectorQuery{std::move(coords)}); }

bool Query::is_zero_vector() const {
  if (is_escape()) return false;
  for (int v : vector_query().coords) {
    if (v != 0) return false;
  }
  return true;
}

int Query::answer_length(const SystemParams& params) const {
  if (is_escape()) return params.message_length;
  return is_zero_vector() ? 0 : 1;
}

std::string Query::label() const {
  std::ostringstream os;
  if (is_escape()) {
    os << "#_" << escape_query().message;
  } else {
    for (int v : vector_query().coords) os << v;
  }
  return os.str();
}

bool operator<(const Query& a, const Query& b) {
  if (a.is_escape() != b.is_escape()) return a.is_escape();
  if (a.is_escape()) return a.escape_query().message < b.escape_query().message;
  return a.vector_query().coords < b.vector_query().coords;
}

bool operator==(const Query& a, const Query& b) {
  if (a.is_escape() != b.is_escape()) return false;
  if (a.is_escape()) return a.escape_query().message == b.escape_query().message;
  return a.vector_query().coords == b.vector_query().coords;
}

std::vector<Query> encode_queries(int message, const RandomKey& key,
                                  const SystemParams& params) {
  if (message < 1 || message > params.message_count) {
    throw IndexOutOfRange("message index " + std::to_string(message) + " not in 1.." +
                          std::to_string(params.message_count));
  }
  const int n = params.server_count;
  std::vector<Query> queries;
  queries.reserve(static_cast<std::size_t>(n));
  if (key.is_direct()) {
    for (int server = 1; server <= n; ++server) {
      if (server == key.direct_key().server) {
        queries.push_back(Query::escape(message));
      } else {
        queries.push_back(Query::vec(std::vector<int>(params.message_count, 0)));
      }
    }
    return queries;
  }
  const auto& coded = key.coded_key();
  const int index_sum = std::accumulate(coded.interference_indices.begin(),
                                        coded.interference_indices.end(), 0);
  for (int server = 1; server <= n; ++server) {
    const int inserted = ((coded.assignment(server) - index_sum) % n + n) % n;
    std::vector<int> coords(coded.interference_indices.begin(),
                            coded.interference_indices.end());
    coords.insert(coords.begin() + (message - 1), inserted);
    queries.push_back(Query::vec(std::move(coords)));
  }
  return queries;
}

Symbol interference(std::span<const int> indices, int message, const MessageStore& store) {
  Symbol signal = 0;
  int at = 0;
  for (int m = 1; m <= store.params.message_count; ++m) {
    if (m == message) continue;
    signal = add(signal, store.at(m, indices[at]));
    ++at;
  }
  return signal;
}

Answer answer(const Query& query, const MessageStore& store) {
  if (query.is_escape()) {
    const auto row = store.row(query.escape_query().message);
    return Answer(row.begin(), row.end());
  }
  if (query.is_zero_vector()) return {};
  Symbol coded = 0;
  const auto& coords = query.vector_query().coords;
  for (int m = 1; m <= store.params.message_count; ++m) {
    coded = add(coded, store.at(m, coords[m - 1]));
  }
  return {coded};
}

std::vector<Symbol> decode(const std::vector<Answer>& answers, int message,
                           const RandomKey& key, const SystemParams& params) {
  const auto queries = encode_queries(message, key, params);
  if (answers.size() != queries.size()) {
    throw MalformedAnswers("expected " + std::to_string(queries.size()) + " answers");
  }
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (static_cast<int>(answers[i].size()) != queries[i].answer_length(params)) {
      throw MalformedAnswers("answer " + std::to_string(i + 1) +
                             " has length " + std::to_string(answers[i].size()));
    }
  }

  if (key.is_direct()) {
    return answers[static_cast<std::size_t>(key.direct_key().server - 1)];
  }

  const auto& coded = key.coded_key();
  const int n = params.server_count;
  const int index_sum = std::accumulate(coded.interference_indices.begin(),
                                        coded.interference_indices.end(), 0);
  // Server n holds message symbol (assignment(n) - sum) mod N; slot 0 holds
  // the interference itself.
  Symbol interference_symbol = 0;
  std::vector<Symbol> message_symbols(static_cast<std::size_t>(params.message_length));
  int interference_server = 0;
  for (int server = 1; server <= n; ++server) {
    const int slot = ((coded.assignment(server) - index_sum) % n + n) % n;
    if (slot == 0) {
      interference_server = server;
      if (!answers[static_cast<std::size_t>(server - 1)].empty()) {
        interference_symbol = answers[static_cast<std::size_t>(server - 1)][0];
      }
    }
  }
  for (int server = 1; server <= n; ++server) {
    if (server == interference_server) continue;
    const int slot = ((coded.assignment(server) - index_sum) % n + n) % n;
    message_symbols[static_cast<std::size_t>(slot - 1)] =
        add(answers[static_cast<std::size_t>(server - 1)][0], interference_symbol);
  }
  return message_symbols;
}

std::int64_t key_space_size(const SystemParams& params) {
  std::int64_t coded = 1;
  for (int i = 0; i + 1 < params.message_count; ++i) coded *= params.server_count;
  for (int i = 2; i <= params.server_count; ++i) coded *= i;
  return params.server_count + coded;
}

std::vector<RandomKey> enumerate_key_space(const SystemParams& params) {
  const std::int64_t size = key_space_size(params);
  if (size - params.server_count > 100000) {
    throw TooLarge("key space has " + std::to_string(size) + " realizations");
  }
  std::vector<RandomKey> keys;
  keys.reserve(static_cast<std::size_t>(size));
  for (int server = 1; server <= params.server_count; ++server) {
    keys.push_back(RandomKey::direct(server));
  }
  const auto permutations = all_permutations(params.server_count);
  std::vector<int> indices(static_cast<std::size_t>(params.message_count - 1), 0);
  while (true) {
    for (const auto& permutation : permutations) {
      keys.push_back(RandomKey::coded(indices, permutation));
    }
    // odometer increment, most significant digit first
    int at = static_cast<int>(indices.size()) - 1;
    while (at >= 0 && indices[static_cast<std::size_t>(at)] == params.server_count - 1) {
      indices[static_cast<std::size_t>(at)] = 0;
      --at;
    }
    if (at < 0) break;
    ++indices[static_cast<std::size_t>(at)];
  }
  return keys;
}

}  // namespace wpir

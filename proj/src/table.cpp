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

#include "wpir/table.hpp"

#include <sstream>

namespace wpir {

namespace {

std::string message_symbol(int message, int index) {
  std::string name;
  if (message <= 26) {
    name = std::string(1, static_cast<char>('a' + message - 1));
  } else {
    name = "w" + std::to_string(message);
  }
  return name + "_" + std::to_string(index);
}

std::string answer_expression(const Query& query, const SystemParams& params) {
  if (query.is_escape()) {
    std::string out;
    for (int i = 1; i <= params.message_length; ++i) {
      if (i > 1) out += ",";
      out += message_symbol(query.escape_query().message, i);
    }
    return out;
  }
  if (query.is_zero_vector()) return "∅";
  std::string out;
  const auto& coords = query.vector_query().coords;
  for (int m = 1; m <= params.message_count; ++m) {
    if (coords[static_cast<std::size_t>(m - 1)] == 0) continue;
    if (!out.empty()) out += "⊕";
    out += message_symbol(m, coords[static_cast<std::size_t>(m - 1)]);
  }
  return out;
}

std::string probability_label(int message, const RandomKey& key) {
  std::ostringstream os;
  if (key.is_direct()) {
    os << "p_(#)^{" << message << "," << key.direct_key().server << "}";
    return os.str();
  }
  const auto& coded = key.coded_key();
  os << "p_(";
  for (int v : coded.interference_indices) os << v;
  os << ")^{" << message << ",[";
  for (std::size_t i = 0; i < coded.assignment.image().size(); ++i) {
    if (i) os << ",";
    os << coded.assignment.image()[i];
  }
  os << "]}";
  return os.str();
}

std::string key_column(const RandomKey& key) {
  if (key.is_direct()) return "#";
  std::string out;
  for (int v : key.coded_key().interference_indices) out += std::to_string(v);
  return out;
}

std::string permutation_column(const RandomKey& key) {
  if (key.is_direct()) return std::to_string(key.direct_key().server);
  std::string out = "(";
  const auto& image = key.coded_key().assignment.image();
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(image[i]);
  }
  return out + ")";
}

}  // namespace

std::string render_table_row(int message, const RandomKey& key, const SystemParams& params) {
  const auto queries = encode_queries(message, key, params);
  std::ostringstream os;
  os << probability_label(message, key) << " | " << key_column(key) << " | "
     << permutation_column(key);
  for (const auto& query : queries) {
    os << " | " << query.label() << " | " << answer_expression(query, params);
  }
  return os.str();
}

std::string render_code_table(const SystemParams& params) {
  const auto keys = enumerate_key_space(params);
  std::ostringstream os;
  for (int message = 1; message <= params.message_count; ++message) {
    os << "== Requesting message k=" << message << " ==\n";
    os << "prob | F | pi_or_n";
    for (int server = 1; server <= params.server_count; ++server) {
      os << " | Q_" << server << " | A_" << server;
    }
    os << "\n";
    for (const auto& key : keys) {
      os << render_table_row(message, key, params) << "\n";
    }
  }
  return os.str();
}

}  // namespace wpir

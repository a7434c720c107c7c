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

#include "wpir/errors.hpp"

#include <sstream>

namespace wpir {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::ostringstream os;
  os << "certificate failed: ";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) os << "; ";
    os << parts[i];
  }
  return os.str();
}

}  // namespace

NotNormalized::NotNormalized(int message, double res)
    : Error("allocation for message " + std::to_string(message) +
            " is not normalized (residual " + std::to_string(res) + ")"),
      message_index(message),
      residual(res) {}

NegativeProbability::NegativeProbability(int message, const std::string& key_label,
                                         double value)
    : Error("allocation for message " + std::to_string(message) +
            " assigns negative probability " + std::to_string(value) + " to " +
            key_label),
      message_index(message) {}

CertificateFailed::CertificateFailed(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

MalformedFrame::MalformedFrame(std::uint8_t r, const std::string& what)
    : Error(what), reason(r) {}

}  // namespace wpir

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

#include <stdexcept>
#include <string>
#include <vector>

namespace wpir {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotBijective : public Error {
 public:
  using Error::Error;
};

class Overflow : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class MalformedAnswers : public Error {
 public:
  using Error::Error;
};

// Per-message probability mass does not sum to one.
class NotNormalized : public Error {
 public:
  NotNormalized(int message, double residual);
  int message_index;
  double residual;
};

class NegativeProbability : public Error {
 public:
  NegativeProbability(int message, const std::string& key_label, double value);
  int message_index;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class NoBracket : public Error {
 public:
  using Error::Error;
};

class Degenerate : public Error {
 public:
  using Error::Error;
};

class CertificateFailed : public Error {
 public:
  explicit CertificateFailed(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class MalformedFrame : public Error {
 public:
  MalformedFrame(std::uint8_t reason, const std::string& what);
  std::uint8_t reason;
};

class ConnectionFailed : public Error {
 public:
  using Error::Error;
};

class Timeout : public Error {
 public:
  using Error::Error;
};

class AnswerLengthMismatch : public Error {
 public:
  using Error::Error;
};

class DecodeMismatch : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace wpir

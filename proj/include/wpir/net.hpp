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

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "wpir/allocation.hpp"
#include "wpir/sim.hpp"

// Protocol over a byte stream. Frames are a big-endian u32 payload length
// followed by the payload; payloads start with a type byte:
//   queries: 0x00 + K coordinate bytes, or 0x01 + big-endian u16 message
//   answers: 0x00 + raw symbols
//   errors:  0xFF + reason byte
// A malformed payload gets an error frame and the connection stays open; an
// oversized length breaks framing, so the server replies and closes.

namespace wpir {

constexpr std::size_t kMaxFramePayload = 1 << 16;

constexpr std::uint8_t kFrameQueryVector = 0x00;
constexpr std::uint8_t kFrameQueryEscape = 0x01;
constexpr std::uint8_t kFrameAnswer = 0x00;
constexpr std::uint8_t kFrameError = 0xFF;

constexpr std::uint8_t kReasonTruncated = 0x01;
constexpr std::uint8_t kReasonUnknownType = 0x02;
constexpr std::uint8_t kReasonBadValue = 0x03;
constexpr std::uint8_t kReasonOversize = 0x04;

std::vector<std::uint8_t> encode_query_payload(const Query& query);
// Throws MalformedFrame with the reason codes above.
Query parse_query_payload(std::span<const std::uint8_t> payload, const SystemParams& params);

// One server endpoint holding a message store. Listens on a background
// thread; stateless, one answer frame per query frame.
class Server {
 public:
  Server(MessageStore store, const std::string& host = "127.0.0.1",
         std::uint16_t port = 0);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }
  std::string endpoint() const;
  std::uint64_t frames_served() const { return frames_served_.load(); }
  void stop();

 private:
  void accept_loop();
  void handle_connection(int fd);

  MessageStore store_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> frames_served_{0};
  std::thread accept_thread_;
  std::vector<std::thread> workers_;
};

// Blocking variant for the command line; `address` is host:port.
void serve_blocking(const std::string& store_path, const std::string& address);

// Full retrieval over the wire: samples a key from the allocation (same
// stream as the simulator), queries every endpoint concurrently, decodes.
std::vector<Symbol> client_retrieve(int message, const Allocation& allocation,
                                    const std::vector<std::string>& endpoints,
                                    std::uint64_t seed, std::uint64_t trial = 0);

}  // namespace wpir

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

#include "wpir/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <future>

namespace wpir {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

bool read_exact(int fd, std::uint8_t* buffer, std::size_t count) {
  std::size_t done = 0;
  while (done < count) {
    const ssize_t got = ::recv(fd, buffer + done, count - done, 0);
    if (got <= 0) return false;
    done += static_cast<std::size_t>(got);
  }
  return true;
}

bool write_all(int fd, const std::uint8_t* buffer, std::size_t count) {
  std::size_t done = 0;
  while (done < count) {
    const ssize_t sent = ::send(fd, buffer + done, count - done, MSG_NOSIGNAL);
    if (sent <= 0) return false;
    done += static_cast<std::size_t>(sent);
  }
  return true;
}

bool write_frame(int fd, std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> frame;
  frame.reserve(4 + payload.size());
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  frame.insert(frame.end(), payload.begin(), payload.end());
  return write_all(fd, frame.data(), frame.size());
}

// Reads one frame payload; returns false on clean EOF or transport error.
// Oversized lengths throw MalformedFrame after the header is consumed.
bool read_frame(int fd, std::vector<std::uint8_t>& payload) {
  std::uint8_t header[4];
  if (!read_exact(fd, header, 4)) return false;
  const std::uint32_t length = (static_cast<std::uint32_t>(header[0]) << 24) |
                               (static_cast<std::uint32_t>(header[1]) << 16) |
                               (static_cast<std::uint32_t>(header[2]) << 8) |
                               static_cast<std::uint32_t>(header[3]);
  if (length > kMaxFramePayload) {
    throw MalformedFrame(kReasonOversize, "frame payload exceeds the limit");
  }
  payload.resize(length);
  return length == 0 || read_exact(fd, payload.data(), length);
}

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) {
    throw ConnectionFailed("endpoint '" + endpoint + "' is not host:port");
  }
  return {endpoint.substr(0, colon),
          static_cast<std::uint16_t>(std::stoi(endpoint.substr(colon + 1)))};
}

int connect_to(const std::string& endpoint) {
  const auto [host, port] = split_endpoint(endpoint);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ConnectionFailed("socket() failed for " + endpoint);
  sockaddr_in address{};
  address.sin_family = AF_INET;
  address.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &address.sin_addr) != 1) {
    ::close(fd);
    throw ConnectionFailed("bad host in " + endpoint);
  }
  timeval timeout{10, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &timeout, sizeof(timeout));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &timeout, sizeof(timeout));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&address), sizeof(address)) != 0) {
    ::close(fd);
    throw ConnectionFailed("cannot connect to " + endpoint);
  }
  return fd;
}

}  // namespace

std::vector<std::uint8_t> encode_query_payload(const Query& query) {
  std::vector<std::uint8_t> payload;
  if (query.is_escape()) {
    payload.push_back(kFrameQueryEscape);
    const int message = query.escape_query().message;
    payload.push_back(static_cast<std::uint8_t>(message >> 8));
    payload.push_back(static_cast<std::uint8_t>(message & 0xFF));
  } else {
    payload.push_back(kFrameQueryVector);
    for (int coord : query.vector_query().coords) {
      payload.push_back(static_cast<std::uint8_t>(coord));
    }
  }
  return payload;
}

Query parse_query_payload(std::span<const std::uint8_t> payload,
                          const SystemParams& params) {
  if (payload.empty()) throw MalformedFrame(kReasonTruncated, "empty query payload");
  const std::uint8_t type = payload[0];
  if (type == kFrameQueryEscape) {
    if (payload.size() < 3) {
      throw MalformedFrame(kReasonTruncated, "escape query shorter than 3 bytes");
    }
    const int message = (payload[1] << 8) | payload[2];
    if (message < 1 || message > params.message_count) {
      throw MalformedFrame(kReasonBadValue, "escape message index out of range");
    }
    return Query::escape(message);
  }
  if (type == kFrameQueryVector) {
    if (static_cast<int>(payload.size()) - 1 != params.message_count) {
      throw MalformedFrame(kReasonTruncated, "vector query length mismatch");
    }
    std::vector<int> coords(static_cast<std::size_t>(params.message_count));
    for (int i = 0; i < params.message_count; ++i) {
      coords[static_cast<std::size_t>(i)] = payload[static_cast<std::size_t>(i) + 1];
      if (coords[static_cast<std::size_t>(i)] >= params.server_count) {
        throw MalformedFrame(kReasonBadValue, "query coordinate out of range");
      }
    }
    return Query::vec(std::move(coords));
  }
  throw MalformedFrame(kReasonUnknownType, "unknown query type byte");
}

Server::Server(MessageStore store, const std::string& host, std::uint16_t port)
    : store_(std::move(store)), host_(host) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ConnectionFailed("socket() failed");
  const int enable = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &enable, sizeof(enable));
  sockaddr_in address{};
  address.sin_family = AF_INET;
  address.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &address.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ConnectionFailed("bad listen host " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&address), sizeof(address)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw ConnectionFailed("cannot listen on " + host + ":" + std::to_string(port));
  }
  sockaddr_in bound{};
  socklen_t bound_len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &bound_len);
  port_ = ntohs(bound.sin_port);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

Server::~Server() { stop(); }

std::string Server::endpoint() const { return host_ + ":" + std::to_string(port_); }

void Server::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  for (auto& worker : workers_) {
    if (worker.joinable()) worker.join();
  }
}

void Server::accept_loop() {
  while (!stopping_.load()) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    workers_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void Server::handle_connection(int fd) {
  std::vector<std::uint8_t> payload;
  while (!stopping_.load()) {
    bool close_after = false;
    try {
      if (!read_frame(fd, payload)) break;
    } catch (const MalformedFrame& error) {
      // Cannot trust the stream position any more.
      const std::uint8_t reply[2] = {kFrameError, error.reason};
      write_frame(fd, reply);
      break;
    }
    frames_served_.fetch_add(1);
    std::vector<std::uint8_t> out;
    try {
      const Query query = parse_query_payload(payload, store_.params);
      const Answer symbols = answer(query, store_);
      out.push_back(kFrameAnswer);
      out.insert(out.end(), symbols.begin(), symbols.end());
    } catch (const MalformedFrame& error) {
      out.push_back(kFrameError);
      out.push_back(error.reason);
    } catch (const Error&) {
      out.push_back(kFrameError);
      out.push_back(kReasonBadValue);
    }
    if (!write_frame(fd, out) || close_after) break;
  }
  ::close(fd);
}

void serve_blocking(const std::string& store_path, const std::string& address) {
  const auto [host, port] = split_endpoint(address);
  Server server(load_store(store_path), host, port);
  // Runs until the process is signalled.
  while (true) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
}

std::vector<Symbol> client_retrieve(int message, const Allocation& allocation,
                                    const std::vector<std::string>& endpoints,
                                    std::uint64_t seed, std::uint64_t trial) {
  const auto& params = allocation.params();
  if (static_cast<int>(endpoints.size()) != params.server_count) {
    throw ConnectionFailed("expected one endpoint per server");
  }
  const RandomKey key = sample_key(allocation, message, seed, trial);
  const auto queries = encode_queries(message, key, params);

  auto exchange = [&](int server) -> Answer {
    const auto& endpoint = endpoints[static_cast<std::size_t>(server - 1)];
    const int fd = connect_to(endpoint);
    const auto payload =
        encode_query_payload(queries[static_cast<std::size_t>(server - 1)]);
    std::vector<std::uint8_t> reply;
    bool ok = write_frame(fd, payload) && read_frame(fd, reply);
    ::close(fd);
    if (!ok) throw Timeout("no answer from " + endpoint);
    if (reply.empty() || reply[0] == kFrameError) {
      throw ConnectionFailed("error frame from " + endpoint);
    }
    return Answer(reply.begin() + 1, reply.end());
  };

  std::vector<std::future<Answer>> pending;
  pending.reserve(endpoints.size());
  for (int server = 1; server <= params.server_count; ++server) {
    pending.push_back(std::async(std::launch::async, exchange, server));
  }
  std::vector<Answer> answers;
  answers.reserve(endpoints.size());
  for (int server = 1; server <= params.server_count; ++server) {
    answers.push_back(pending[static_cast<std::size_t>(server - 1)].get());
    const int expected =
        queries[static_cast<std::size_t>(server - 1)].answer_length(params);
    if (static_cast<int>(answers.back().size()) != expected) {
      throw AnswerLengthMismatch("server " + std::to_string(server) + " sent " +
                                 std::to_string(answers.back().size()) + " symbols");
    }
  }
  return decode(answers, message, key, params);
}

}  // namespace wpir

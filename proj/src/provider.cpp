// Copyright 2026 The wmark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wmark/provider.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <json.hpp>

namespace wmark {
namespace {

using nlohmann::json;

json parse_line(std::string_view line, const char* what) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    fail(ErrorKind::provider, std::string("malformed JSON in ") + what);
  }
  if (!j.contains("v") || !j.at("v").is_number_integer() ||
      j.at("v").get<int>() != kProviderProtocolVersion) {
    fail(ErrorKind::provider, std::string(what) + " lacks protocol version 1");
  }
  return j;
}

}  // namespace

std::size_t parse_handshake(std::string_view line) {
  const json j = parse_line(line, "handshake");
  if (!j.contains("vocab_size") || !j.at("vocab_size").is_number_unsigned()) {
    fail(ErrorKind::provider, "protocol error: expected handshake with vocab_size");
  }
  const auto n = j.at("vocab_size").get<std::size_t>();
  if (n < 2) fail(ErrorKind::provider, "handshake vocab_size must be >= 2");
  return n;
}

std::string encode_request(std::span<const TokenId> context) {
  json j{{"v", kProviderProtocolVersion}, {"context", context}};
  return j.dump() + "\n";
}

std::vector<double> parse_logits_response(std::string_view line,
                                          std::size_t vocab_size) {
  const json j = parse_line(line, "response");
  if (!j.contains("logits") || !j.at("logits").is_array()) {
    fail(ErrorKind::provider, "response has no logits array");
  }
  const json& arr = j.at("logits");
  if (arr.size() != vocab_size) {
    fail(ErrorKind::provider, "length mismatch: provider returned " +
                                  std::to_string(arr.size()) +
                                  " logits, handshake declared " +
                                  std::to_string(vocab_size));
  }
  std::vector<double> out;
  out.reserve(vocab_size);
  for (const auto& x : arr) {
    if (x.is_number()) {
      out.push_back(x.get<double>());
    } else if (x.is_null()) {
      out.push_back(-INFINITY);  // JSON has no -inf; null masks a token
    } else {
      fail(ErrorKind::provider, "logits must be numbers");
    }
  }
  return out;
}

SubprocessProvider::SubprocessProvider(const std::string& command,
                                       ProviderOptions options)
    : options_(options) {
  // A dead child must surface as EPIPE, not kill the process.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) fail(ErrorKind::provider, "pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    fail(ErrorKind::provider, "pipe() failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    fail(ErrorKind::provider, "fork() failed");
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  try {
    vocab_size_ = parse_handshake(read_line());
  } catch (...) {
    shutdown();
    throw;
  }
}

SubprocessProvider::~SubprocessProvider() { shutdown(); }

void SubprocessProvider::shutdown() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Give the child a moment to exit on EOF, then force it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(2000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string SubprocessProvider::read_line() {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + options_.timeout;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - clock::now());
    if (left.count() <= 0) {
      fail(ErrorKind::provider, "provider timed out after " +
                                    std::to_string(options_.timeout.count()) + " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::provider, std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t got = ::read(from_child_, chunk, sizeof chunk);
    if (got < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::provider, std::string("read failed: ") + std::strerror(errno));
    }
    if (got == 0) fail(ErrorKind::provider, "provider closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

void SubprocessProvider::write_all(const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::provider, std::string("write to provider failed: ") +
                                    std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::vector<double> SubprocessProvider::next_logits(
    std::span<const TokenId> context) {
  if (to_child_ < 0) fail(ErrorKind::provider, "provider is not running");
  write_all(encode_request(context));
  return parse_logits_response(read_line(), vocab_size_);
}

LogitVector logit_provider_roundtrip(SubprocessProvider& provider,
                                     std::span<const TokenId> context) {
  return LogitVector{provider.next_logits(context), 1.0, 1.0};
}

}  // namespace wmark

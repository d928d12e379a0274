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

#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmark/samplers.hpp"

/// Line-delimited JSON logit provider running as a child process.
///
///   provider -> {"v":1,"vocab_size":n}          once, at startup
///   client   -> {"v":1,"context":[ids...]}      one request
///   provider -> {"v":1,"logits":[n numbers]}    one response
///
/// Requests and responses strictly alternate. Protocol violations, timeouts
/// and child exits throw Error(ErrorKind::provider).
namespace wmark {

inline constexpr int kProviderProtocolVersion = 1;

struct ProviderOptions {
  std::chrono::milliseconds timeout{30000};
};

std::size_t parse_handshake(std::string_view line);
std::string encode_request(std::span<const TokenId> context);
std::vector<double> parse_logits_response(std::string_view line,
                                          std::size_t vocab_size);

class SubprocessProvider final : public LogitSource {
 public:
  /// Runs `command` through /bin/sh and waits for the handshake line.
  explicit SubprocessProvider(const std::string& command,
                              ProviderOptions options = {});
  ~SubprocessProvider() override;

  SubprocessProvider(const SubprocessProvider&) = delete;
  SubprocessProvider& operator=(const SubprocessProvider&) = delete;

  std::size_t vocab_size() const override { return vocab_size_; }
  std::vector<double> next_logits(std::span<const TokenId> context) override;

 private:
  std::string read_line();
  void write_all(const std::string& data);
  void shutdown() noexcept;

  ProviderOptions options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::size_t vocab_size_ = 0;
};

LogitVector logit_provider_roundtrip(SubprocessProvider& provider,
                                     std::span<const TokenId> context);

}  // namespace wmark

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

#include "wmark/types.hpp"

#include <string>

namespace wmark {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::domain: return "domain";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::degenerate_input: return "degenerate_input";
    case ErrorKind::model_inconsistency: return "model_inconsistency";
    case ErrorKind::provider: return "provider";
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

void TokenSequence::validate() const {
  if (vocab_size == 0) fail(ErrorKind::config, "vocabulary size is zero");
  if (prompt_len > tokens.size()) {
    fail(ErrorKind::config, "prompt length exceeds sequence length");
  }
  for (TokenId t : tokens) {
    if (t >= vocab_size) {
      fail(ErrorKind::domain, "token id " + std::to_string(t) +
                                  " outside vocabulary of size " +
                                  std::to_string(vocab_size));
    }
  }
}

}  // namespace wmark

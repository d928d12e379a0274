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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "wmark/error.hpp"

namespace wmark {

using TokenId = std::uint32_t;

/// Token ids plus the vocabulary they are drawn from. The first
/// `prompt_len` tokens are context supplied by the caller and are never
/// scored by the detectors.
struct TokenSequence {
  std::vector<TokenId> tokens;
  std::size_t vocab_size = 0;
  std::size_t prompt_len = 0;

  std::size_t size() const noexcept { return tokens.size(); }
  void validate() const;
};

/// A probability in [0,1]. NaN is rejected at construction.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      fail(ErrorKind::domain, "probability outside [0,1]");
    }
  }

  /// Clamps a finished evaluation into [0,1]; NaN still throws.
  static Probability clamped(double value) {
    if (std::isnan(value)) fail(ErrorKind::domain, "probability is NaN");
    return Probability(value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value));
  }

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

}  // namespace wmark

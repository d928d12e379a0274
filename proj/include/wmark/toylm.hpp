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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wmark/samplers.hpp"

namespace wmark {

struct ToyModelConfig {
  std::size_t order = 3;       // Markov order k
  std::size_t vocab_size = 64;
  double alpha = 0.5;          // Dirichlet concentration; +inf gives uniform rows
  std::uint64_t seed = 0;
};

/// Markov toy language model. Each context of the last k tokens hashes to a
/// row seed; the row is a Dirichlet(alpha, ..., alpha) draw from that seed,
/// so no transition table is ever materialised.
class ToyModel final : public LogitSource {
 public:
  explicit ToyModel(const ToyModelConfig& config);

  /// Presets: "low" (alpha 0.05), "medium" (0.5), "high" (5), "uniform".
  static ToyModel preset(std::string_view name, std::uint64_t seed = 0,
                         std::size_t vocab_size = 64, std::size_t order = 3);
  static double preset_alpha(std::string_view name);

  const ToyModelConfig& config() const noexcept { return config_; }
  std::size_t vocab_size() const override { return config_.vocab_size; }

  /// Log-probabilities of the next token; feeding them to a temperature-1
  /// softmax recovers the row.
  LogitVector next_distribution(std::span<const TokenId> context) const;

  std::vector<double> next_logits(std::span<const TokenId> context) override {
    return next_distribution(context).logits;
  }

  std::uint64_t row_seed(std::span<const TokenId> context) const noexcept;

 private:
  ToyModelConfig config_;
  double mt_d_ = 0.0;  // Marsaglia-Tsang constants for shape alpha (+1 if < 1)
  double mt_c_ = 0.0;
};

/// H_T = -sum_t p_t ln p_t over the realized-token probabilities.
double entropy_of_completion(std::span<const double> realized_probs);

/// Recomputes p_t for every generated token of `seq` under `model` with the
/// given decoding knobs, then applies the span overload.
double entropy_of_completion(LogitSource& model, const TokenSequence& seq,
                             double temperature = 1.0, double top_p = 1.0);

}  // namespace wmark

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

#include "wmark/keying.hpp"
#include "wmark/types.hpp"

namespace wmark {

enum class Scheme { vanilla, greenlist, exponential };

std::string_view to_string(Scheme s) noexcept;
Scheme parse_scheme(std::string_view name);

/// Raw next-token logits with the decoding knobs applied to them.
struct LogitVector {
  std::vector<double> logits;
  double temperature = 1.0;
  double top_p = 1.0;
};

struct ProbVector {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t i) const noexcept { return probs[i]; }
};

/// Watermark and decoding parameters shared by generation and detection.
struct SamplerParams {
  Scheme scheme = Scheme::exponential;
  double delta = 2.0;        // greenlist logit boost
  double gamma = 0.25;       // greenlist fraction
  std::size_t h = 1;         // context window width
  double temperature = 1.0;
  double top_p = 1.0;
  bool greedy = false;       // argmax instead of a multinomial draw
  std::size_t num_messages = 1;
  std::size_t message = 0;

  void validate() const;
  /// Secret vector dimension d = max(M, |V|).
  std::size_t dim(std::size_t vocab_size) const noexcept {
    return num_messages > vocab_size ? num_messages : vocab_size;
  }
};

/// Anything that maps a context to next-token logits: the toy model, an
/// external provider process, a test double.
class LogitSource {
 public:
  virtual ~LogitSource() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual std::vector<double> next_logits(std::span<const TokenId> context) = 0;
};

/// Temperature softmax followed by top-p truncation. The nucleus is the
/// shortest prefix, in descending probability with ties broken by lower id,
/// whose mass reaches top_p; the rest is zeroed and the kept part
/// renormalised.
ProbVector softmax_with_nucleus(const LogitVector& l);

/// Adds delta to the logits selected by mask, then softmax_with_nucleus.
ProbVector greenlist_shift(const LogitVector& l, const std::vector<bool>& mask,
                           double delta);

/// argmax_v r_v^(1/p_v) over tokens with p_v > 0, evaluated as
/// argmin -ln(r_v)/p_v. Ties go to the lowest id.
TokenId exponential_select(const ProbVector& p, std::span<const double> r);

/// Inverse-CDF draw over ids in ascending order with one uniform in [0,1).
TokenId draw_inverse_cdf(const ProbVector& q, double u);

/// Lowest-id argmax.
TokenId argmax_token(const ProbVector& q);

struct Generation {
  TokenSequence sequence;
  /// Model probability p_t of each generated token (before any watermark
  /// shift), one per generated position.
  std::vector<double> realized_probs;
  /// Full model distributions per generated position when requested.
  std::vector<ProbVector> step_dists;
};

struct GenerateOptions {
  std::uint64_t sampling_seed = 0;
  bool record_dists = false;
};

/// Autoregressive generation of n tokens after `prompt`. Vanilla and
/// greenlist draws consume one output of a xoshiro256** stream seeded with
/// options.sampling_seed per step; the exponential scheme is deterministic.
Generation generate_traced(LogitSource& model, const SamplerParams& params,
                           const MasterKey& key, const TokenSequence& prompt,
                           std::size_t n, const GenerateOptions& options = {});

TokenSequence generate(LogitSource& model, const SamplerParams& params,
                       const MasterKey& key, const TokenSequence& prompt,
                       std::size_t n, std::uint64_t sampling_seed = 0);

}  // namespace wmark

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
#include <vector>

#include "wmark/detectors.hpp"
#include "wmark/keying.hpp"
#include "wmark/samplers.hpp"

namespace wmark {

/// entries[i] = r0[(i + m) mod d]. Throws a domain error unless m < d.
SecretVector shifted_vector(const SecretVector& r0, std::size_t m);

/// Generation carrying message m in {0..M-1}: every step uses the secret
/// vector of dimension d = max(M, |V|) shifted by m, truncated to |V|.
TokenSequence generate_multibit(LogitSource& model, SamplerParams params,
                                const MasterKey& key,
                                const TokenSequence& prompt, std::size_t n,
                                std::size_t message,
                                std::uint64_t sampling_seed = 0);

struct MessageScores {
  std::vector<double> scores;  // length d; scores[m] is message m's score
  std::size_t scored_tokens = 0;
  std::size_t total_tokens = 0;
};

/// Scores of every message at once: per admitted position the vector
/// f(r(0)) is cyclically shifted by the token id and accumulated, so that
/// scores[m] equals the zero-bit score under shifted_vector(., m). f is
/// 1{r < gamma} (greenlist) or -ln(1 - r) (exponential). OpenMP-parallel.
MessageScores score_all_messages(const TokenSequence& seq,
                                 const MasterKey& key,
                                 const SamplerParams& params,
                                 DedupRule dedup = DedupRule::tuple);

/// Single-threaded version of the same accumulation.
MessageScores score_all_messages_serial(const TokenSequence& seq,
                                        const MasterKey& key,
                                        const SamplerParams& params,
                                        DedupRule dedup = DedupRule::tuple);

/// Reference: one zero-bit detection per message, `num_messages` of them.
MessageScores score_all_messages_naive(const TokenSequence& seq,
                                       const MasterKey& key,
                                       const SamplerParams& params,
                                       std::size_t num_messages,
                                       DedupRule dedup = DedupRule::tuple);

struct IdentificationReport {
  std::vector<double> scores;               // first M components
  std::vector<double> per_message_pvalues;
  std::size_t best_message = 0;
  double global_pvalue = 1.0;
  std::size_t scored_tokens = 0;
  std::size_t total_tokens = 0;
  bool flagged = false;
};

/// 1 - (1 - p)^M evaluated as -expm1(M log1p(-p)).
double global_pvalue(double p, std::size_t num_messages);

/// Decision over the first M components of precomputed scores.
IdentificationReport identify_from_scores(const MessageScores& scores,
                                          std::size_t num_messages,
                                          Scheme scheme, double gamma,
                                          double fpr_target);

/// Scores with d = params.dim(|V|) and identifies among the first M messages.
IdentificationReport identify(const TokenSequence& seq, const MasterKey& key,
                              const SamplerParams& params,
                              std::size_t num_messages, double fpr_target,
                              DedupRule dedup = DedupRule::tuple);

}  // namespace wmark

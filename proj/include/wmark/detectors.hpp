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
#include "wmark/samplers.hpp"
#include "wmark/types.hpp"

namespace wmark {

/// Which repeated positions are skipped during scoring.
enum class DedupRule {
  tuple,    // score only novel {context + current token} (h+1)-tuples
  context,  // score only novel h-token contexts
  off,
};

enum class TestKind { binomial, gamma, ztest, neyman_pearson, simplified };

std::string_view to_string(DedupRule r) noexcept;
std::string_view to_string(TestKind t) noexcept;
DedupRule parse_dedup(std::string_view name);
TestKind parse_test(std::string_view name);

struct DetectionReport {
  double score = 0.0;
  std::size_t scored_tokens = 0;  // T'
  std::size_t total_tokens = 0;   // T
  double p_value = 1.0;
  TestKind test = TestKind::gamma;
  DedupRule dedup = DedupRule::tuple;
};

/// Set of tuples already seen in one pass over a sequence. Tuples are stored
/// as positions into the sequence and compared by content.
class ScoringContext {
 public:
  ScoringContext(std::size_t h, DedupRule rule) : h_(h), rule_(rule) {}

  /// Starts a new pass over `tokens`; `expected` sizes the table.
  void reset(std::span<const TokenId> tokens, std::size_t expected);

  /// True if the tuple ending at `pos` (which must be >= h) is new; records
  /// it. Always true for DedupRule::off.
  bool admit(std::size_t pos);

  std::size_t seen() const noexcept { return count_; }

 private:
  std::span<const TokenId> key_at(std::size_t pos) const noexcept;
  std::uint64_t hash(std::span<const TokenId> tuple) const noexcept;

  std::size_t h_;
  DedupRule rule_;
  std::span<const TokenId> tokens_;
  std::vector<std::int64_t> slots_;
  std::size_t count_ = 0;
};

/// First scored position: detection skips the prompt and any position whose
/// window would need padding.
std::size_t first_scored_position(const TokenSequence& seq,
                                  std::size_t h) noexcept;

/// Secret-vector entries r_{x_t} at admitted positions, shifted for
/// params.message in dimension params.dim(|V|).
struct AdmittedValues {
  std::vector<double> r;
  std::vector<std::size_t> positions;
  std::size_t total_tokens = 0;
};

AdmittedValues admitted_secret_values(const TokenSequence& seq,
                                      const MasterKey& key,
                                      const SamplerParams& params,
                                      DedupRule dedup);

/// Same, reusing a caller-owned context (hot loops).
void admitted_secret_values(const TokenSequence& seq, const MasterKey& key,
                            const SamplerParams& params, ScoringContext& ctx,
                            AdmittedValues& out);

struct ScoreResult {
  double score = 0.0;
  std::size_t scored_tokens = 0;
  std::size_t total_tokens = 0;
};

/// Number of admitted tokens in their greenlist.
ScoreResult score_greenlist(const TokenSequence& seq, const MasterKey& key,
                            const SamplerParams& params, DedupRule dedup);

/// sum over admitted tokens of -ln(1 - r_{x_t}).
ScoreResult score_exponential(const TokenSequence& seq, const MasterKey& key,
                              const SamplerParams& params, DedupRule dedup);

/// P(S >= s) for S ~ B(T', gamma): I_gamma(s, T'-s+1), 1 when s == 0.
Probability pvalue_binomial(std::uint64_t s, std::size_t scored_tokens,
                            double gamma);

/// P(S >= s) for S ~ Gamma(T', 1).
Probability pvalue_gamma(double s, std::size_t scored_tokens);

/// Normal approximation; mu0/sigma0 are gamma, sqrt(gamma(1-gamma)) for the
/// greenlist and 1, 1 for the exponential score.
Probability pvalue_ztest(double score, std::size_t scored_tokens,
                         Scheme scheme, double gamma);

struct NeymanPearsonResult {
  double score = 0.0;
  std::size_t scored_tokens = 0;
  std::size_t total_tokens = 0;
  double pvalue_bound = 1.0;
};

/// Likelihood-ratio score sum (1/p_t - 1) ln r_t. `step_dists` holds the
/// model distribution for every generated position (index pos - prompt_len).
NeymanPearsonResult score_neyman_pearson(const TokenSequence& seq,
                                         const MasterKey& key,
                                         const SamplerParams& params,
                                         std::span<const ProbVector> step_dists,
                                         DedupRule dedup);

/// Chernoff upper bound on P(S > s) for S = sum_t (1/p_t - 1) ln R_t with
/// R_t iid uniform. The optimising c > 0 solves sum 1/(c + lambda_t) = -s,
/// lambda_t = p_t / (1 - p_t), and is found by bisection on (0, 1e8]; when
/// the root is not positive the bound is 1.
double chernoff_pvalue_bound(std::span<const double> realized_probs,
                             double s);

/// Unweighted score sum ln r_t with p-value P(T', -s).
DetectionReport pvalue_simplified(const TokenSequence& seq,
                                  const MasterKey& key,
                                  const SamplerParams& params,
                                  DedupRule dedup);

struct DetectConfig {
  SamplerParams params;
  TestKind test = TestKind::gamma;
  DedupRule dedup = DedupRule::tuple;
};

/// Runs the configured score and test. The Neyman-Pearson test needs
/// `model` to recompute p_t; every other test ignores it.
DetectionReport detect(const TokenSequence& seq, const MasterKey& key,
                       const DetectConfig& config,
                       LogitSource* model = nullptr);

/// p-values of all tests that apply to `scheme`, from admitted values alone.
struct H0Pvalues {
  double exact = 1.0;       // binomial or gamma
  double ztest = 1.0;
  double simplified = 1.0;  // exponential scheme only
  std::size_t scored_tokens = 0;
};
H0Pvalues pvalues_from_values(std::span<const double> r, Scheme scheme,
                              double gamma);

}  // namespace wmark

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

#include "wmark/multibit.hpp"

#include <cmath>
#include <string>

namespace wmark {
namespace {

// Admitted positions with the full d-dimensional f(r(0)) for each, row-major.
struct ScoreRows {
  std::vector<std::size_t> positions;
  std::vector<double> f;  // positions.size() x d
  std::size_t d = 0;
  std::size_t total_tokens = 0;
};

void require_watermark(Scheme scheme) {
  if (scheme == Scheme::vanilla) {
    fail(ErrorKind::config, "multi-bit scoring needs a watermark scheme");
  }
}

std::vector<std::size_t> admitted_positions(const TokenSequence& seq,
                                            std::size_t h, DedupRule dedup,
                                            std::size_t& total) {
  seq.validate();
  const std::size_t start = first_scored_position(seq, h);
  if (seq.size() <= start) {
    fail(ErrorKind::insufficient_data,
         "sequence has no scorable position after the prompt and window");
  }
  total = seq.size() - start;
  ScoringContext ctx(h, dedup);
  ctx.reset(seq.tokens, total);
  std::vector<std::size_t> positions;
  for (std::size_t pos = start; pos < seq.size(); ++pos) {
    if (ctx.admit(pos)) positions.push_back(pos);
  }
  if (positions.empty()) {
    fail(ErrorKind::insufficient_data, "no admitted positions to score");
  }
  return positions;
}

inline double apply_f(double r, Scheme scheme, double gamma) noexcept {
  return scheme == Scheme::greenlist ? (r < gamma ? 1.0 : 0.0)
                                     : -std::log1p(-r);
}

ScoreRows build_rows(const TokenSequence& seq, const MasterKey& key,
                     const SamplerParams& params, DedupRule dedup,
                     bool parallel) {
  require_watermark(params.scheme);
  ScoreRows rows;
  rows.positions = admitted_positions(seq, params.h, dedup, rows.total_tokens);
  rows.d = params.dim(seq.vocab_size);
  const std::size_t d = rows.d;
  const std::size_t n = rows.positions.size();
  rows.f.resize(n * d);
  const std::span<const TokenId> tokens = seq.tokens;

#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t pos = rows.positions[t];
    const WindowSeed seed =
        derive_seed(key, tokens.subspan(pos - params.h, params.h), params.h);
    const SecretVector r0 = secret_vector(seed, d);
    double* row = rows.f.data() + t * d;
    for (std::size_t i = 0; i < d; ++i) {
      row[i] = apply_f(r0[i], params.scheme, params.gamma);
    }
  }
  return rows;
}

// scores[m] = sum_t f_t[(x_t + m) mod d], t ascending for every m, so the
// serial and parallel paths produce identical bits.
MessageScores accumulate(const ScoreRows& rows, const TokenSequence& seq,
                         bool parallel) {
  const std::size_t d = rows.d;
  const std::size_t n = rows.positions.size();
  MessageScores out;
  out.scores.assign(d, 0.0);
  out.scored_tokens = n;
  out.total_tokens = rows.total_tokens;

#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t m = 0; m < d; ++m) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t x = seq.tokens[rows.positions[t]];
      acc += rows.f[t * d + (x + m) % d];
    }
    out.scores[m] = acc;
  }
  return out;
}

}  // namespace

SecretVector shifted_vector(const SecretVector& r0, std::size_t m) {
  const std::size_t d = r0.size();
  if (m >= d) {
    fail(ErrorKind::domain, "message " + std::to_string(m) +
                                " out of range for dimension " +
                                std::to_string(d));
  }
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = r0[(i + m) % d];
  return SecretVector(std::move(out));
}

TokenSequence generate_multibit(LogitSource& model, SamplerParams params,
                                const MasterKey& key,
                                const TokenSequence& prompt, std::size_t n,
                                std::size_t message,
                                std::uint64_t sampling_seed) {
  require_watermark(params.scheme);
  params.message = message;
  return generate(model, params, key, prompt, n, sampling_seed);
}

MessageScores score_all_messages(const TokenSequence& seq,
                                 const MasterKey& key,
                                 const SamplerParams& params,
                                 DedupRule dedup) {
  const ScoreRows rows = build_rows(seq, key, params, dedup, true);
  return accumulate(rows, seq, true);
}

MessageScores score_all_messages_serial(const TokenSequence& seq,
                                        const MasterKey& key,
                                        const SamplerParams& params,
                                        DedupRule dedup) {
  const ScoreRows rows = build_rows(seq, key, params, dedup, false);
  return accumulate(rows, seq, false);
}

MessageScores score_all_messages_naive(const TokenSequence& seq,
                                       const MasterKey& key,
                                       const SamplerParams& params,
                                       std::size_t num_messages,
                                       DedupRule dedup) {
  require_watermark(params.scheme);
  SamplerParams p = params;
  MessageScores out;
  out.scores.resize(num_messages);
  for (std::size_t m = 0; m < num_messages; ++m) {
    p.message = m;
    const AdmittedValues v = admitted_secret_values(seq, key, p, dedup);
    double acc = 0.0;
    for (double r : v.r) acc += apply_f(r, p.scheme, p.gamma);
    out.scores[m] = acc;
    out.scored_tokens = v.r.size();
    out.total_tokens = v.total_tokens;
  }
  return out;
}

double global_pvalue(double p, std::size_t num_messages) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::domain, "p outside [0,1]");
  if (num_messages == 0) fail(ErrorKind::domain, "M must be >= 1");
  if (p == 1.0) return 1.0;
  const double g =
      -std::expm1(static_cast<double>(num_messages) * std::log1p(-p));
  return Probability::clamped(g);
}

IdentificationReport identify_from_scores(const MessageScores& scores,
                                          std::size_t num_messages,
                                          Scheme scheme, double gamma,
                                          double fpr_target) {
  require_watermark(scheme);
  if (num_messages < 1 || num_messages > scores.scores.size()) {
    fail(ErrorKind::domain, "need 1 <= M <= d");
  }
  IdentificationReport rep;
  rep.scored_tokens = scores.scored_tokens;
  rep.total_tokens = scores.total_tokens;
  rep.scores.assign(scores.scores.begin(),
                    scores.scores.begin() + num_messages);
  rep.per_message_pvalues.resize(num_messages);
  for (std::size_t m = 0; m < num_messages; ++m) {
    const double s = rep.scores[m];
    rep.per_message_pvalues[m] =
        scheme == Scheme::greenlist
            ? pvalue_binomial(static_cast<std::uint64_t>(std::llround(s)),
                              scores.scored_tokens, gamma)
            : pvalue_gamma(s, scores.scored_tokens);
    if (rep.per_message_pvalues[m] <
        rep.per_message_pvalues[rep.best_message]) {
      rep.best_message = m;
    }
  }
  rep.global_pvalue =
      global_pvalue(rep.per_message_pvalues[rep.best_message], num_messages);
  rep.flagged = rep.global_pvalue < fpr_target;
  return rep;
}

IdentificationReport identify(const TokenSequence& seq, const MasterKey& key,
                              const SamplerParams& params,
                              std::size_t num_messages, double fpr_target,
                              DedupRule dedup) {
  const MessageScores scores = score_all_messages(seq, key, params, dedup);
  return identify_from_scores(scores, num_messages, params.scheme,
                              params.gamma, fpr_target);
}

}  // namespace wmark

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

#include "wmark/detectors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "wmark/statfun.hpp"

namespace wmark {
namespace {

void require_scored(std::size_t scored) {
  if (scored == 0) {
    fail(ErrorKind::insufficient_data, "no admitted positions to score");
  }
}

double exponential_sum(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s -= std::log1p(-v);
  return s;
}

double log_sum(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += std::log(v);
  return s;
}

std::uint64_t green_count(std::span<const double> r, double gamma) {
  return static_cast<std::uint64_t>(
      std::count_if(r.begin(), r.end(), [&](double v) { return v < gamma; }));
}

void require_scheme(const SamplerParams& params, Scheme expected,
                    TestKind test) {
  if (params.scheme != expected) {
    fail(ErrorKind::config, std::string(to_string(test)) +
                                " test requires the " +
                                std::string(to_string(expected)) + " scheme");
  }
}

}  // namespace

std::string_view to_string(DedupRule r) noexcept {
  switch (r) {
    case DedupRule::tuple: return "tuple";
    case DedupRule::context: return "context";
    case DedupRule::off: return "off";
  }
  return "unknown";
}

std::string_view to_string(TestKind t) noexcept {
  switch (t) {
    case TestKind::binomial: return "binomial";
    case TestKind::gamma: return "gamma";
    case TestKind::ztest: return "ztest";
    case TestKind::neyman_pearson: return "np";
    case TestKind::simplified: return "simplified";
  }
  return "unknown";
}

DedupRule parse_dedup(std::string_view name) {
  if (name == "tuple") return DedupRule::tuple;
  if (name == "context") return DedupRule::context;
  if (name == "off") return DedupRule::off;
  fail(ErrorKind::config, "unknown dedup rule '" + std::string(name) + "'");
}

TestKind parse_test(std::string_view name) {
  if (name == "binomial") return TestKind::binomial;
  if (name == "gamma") return TestKind::gamma;
  if (name == "ztest") return TestKind::ztest;
  if (name == "np") return TestKind::neyman_pearson;
  if (name == "simplified") return TestKind::simplified;
  fail(ErrorKind::config, "unknown test '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// ScoringContext

void ScoringContext::reset(std::span<const TokenId> tokens,
                           std::size_t expected) {
  tokens_ = tokens;
  count_ = 0;
  if (rule_ == DedupRule::off) return;
  const std::size_t capacity = std::bit_ceil(std::max<std::size_t>(
      16, 2 * expected + 2));
  slots_.assign(capacity, -1);
}

std::span<const TokenId> ScoringContext::key_at(
    std::size_t pos) const noexcept {
  const std::size_t len = rule_ == DedupRule::tuple ? h_ + 1 : h_;
  return tokens_.subspan(pos - h_, len);
}

std::uint64_t ScoringContext::hash(
    std::span<const TokenId> tuple) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ tuple.size();
  for (TokenId t : tuple) {
    h ^= t;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 32;
  }
  return h;
}

bool ScoringContext::admit(std::size_t pos) {
  if (rule_ == DedupRule::off) {
    ++count_;
    return true;
  }
  if (2 * (count_ + 1) > slots_.size()) {
    // Grow and rehash; only happens when `expected` was an underestimate.
    std::vector<std::int64_t> old = std::move(slots_);
    slots_.assign(old.size() * 2, -1);
    const std::size_t mask = slots_.size() - 1;
    for (std::int64_t p : old) {
      if (p < 0) continue;
      std::size_t i = hash(key_at(static_cast<std::size_t>(p))) & mask;
      while (slots_[i] >= 0) i = (i + 1) & mask;
      slots_[i] = p;
    }
  }
  const auto key = key_at(pos);
  const std::size_t mask = slots_.size() - 1;
  std::size_t i = hash(key) & mask;
  while (slots_[i] >= 0) {
    if (std::ranges::equal(key_at(static_cast<std::size_t>(slots_[i])), key)) {
      return false;
    }
    i = (i + 1) & mask;
  }
  slots_[i] = static_cast<std::int64_t>(pos);
  ++count_;
  return true;
}

// ---------------------------------------------------------------------------
// Scanning

std::size_t first_scored_position(const TokenSequence& seq,
                                  std::size_t h) noexcept {
  return std::max(seq.prompt_len, h);
}

void admitted_secret_values(const TokenSequence& seq, const MasterKey& key,
                            const SamplerParams& params, ScoringContext& ctx,
                            AdmittedValues& out) {
  const std::size_t start = first_scored_position(seq, params.h);
  if (seq.size() <= start) {
    fail(ErrorKind::insufficient_data,
         "sequence has no scorable position after the prompt and window");
  }
  const std::size_t d = params.dim(seq.vocab_size);
  const std::span<const TokenId> tokens = seq.tokens;
  out.r.clear();
  out.positions.clear();
  out.total_tokens = seq.size() - start;
  ctx.reset(tokens, out.total_tokens);
  for (std::size_t pos = start; pos < seq.size(); ++pos) {
    if (!ctx.admit(pos)) continue;
    const WindowSeed seed =
        derive_seed(key, tokens.subspan(pos - params.h, params.h), params.h);
    out.r.push_back(secret_entry(seed, (tokens[pos] + params.message) % d));
    out.positions.push_back(pos);
  }
}

AdmittedValues admitted_secret_values(const TokenSequence& seq,
                                      const MasterKey& key,
                                      const SamplerParams& params,
                                      DedupRule dedup) {
  seq.validate();
  ScoringContext ctx(params.h, dedup);
  AdmittedValues out;
  admitted_secret_values(seq, key, params, ctx, out);
  return out;
}

// ---------------------------------------------------------------------------
// Scores and p-values

ScoreResult score_greenlist(const TokenSequence& seq, const MasterKey& key,
                            const SamplerParams& params, DedupRule dedup) {
  const AdmittedValues v = admitted_secret_values(seq, key, params, dedup);
  require_scored(v.r.size());
  return {static_cast<double>(green_count(v.r, params.gamma)), v.r.size(),
          v.total_tokens};
}

ScoreResult score_exponential(const TokenSequence& seq, const MasterKey& key,
                              const SamplerParams& params, DedupRule dedup) {
  const AdmittedValues v = admitted_secret_values(seq, key, params, dedup);
  require_scored(v.r.size());
  return {exponential_sum(v.r), v.r.size(), v.total_tokens};
}

Probability pvalue_binomial(std::uint64_t s, std::size_t scored_tokens,
                            double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    fail(ErrorKind::domain, "gamma must lie in (0,1)");
  }
  if (s > scored_tokens) fail(ErrorKind::domain, "score exceeds T'");
  if (s == 0) return Probability(1.0);
  return statfun::reg_inc_beta(gamma, static_cast<double>(s),
                               static_cast<double>(scored_tokens - s + 1));
}

Probability pvalue_gamma(double s, std::size_t scored_tokens) {
  if (scored_tokens == 0) fail(ErrorKind::domain, "T' must be >= 1");
  if (!(s >= 0.0)) fail(ErrorKind::domain, "gamma score must be >= 0");
  return statfun::reg_upper_gamma(static_cast<double>(scored_tokens), s);
}

Probability pvalue_ztest(double score, std::size_t scored_tokens,
                         Scheme scheme, double gamma) {
  if (scored_tokens == 0) {
    fail(ErrorKind::insufficient_data, "z-test needs T' >= 1");
  }
  double mu0 = 1.0;
  double sigma0 = 1.0;
  switch (scheme) {
    case Scheme::greenlist:
      if (!(gamma > 0.0 && gamma < 1.0)) {
        fail(ErrorKind::domain, "gamma must lie in (0,1)");
      }
      mu0 = gamma;
      sigma0 = std::sqrt(gamma * (1.0 - gamma));
      break;
    case Scheme::exponential:
      break;
    case Scheme::vanilla:
      fail(ErrorKind::config, "z-test needs a watermark scheme");
  }
  const double t = static_cast<double>(scored_tokens);
  const double z = (score / t - mu0) / (sigma0 / std::sqrt(t));
  return statfun::normal_sf(z);
}

double chernoff_pvalue_bound(std::span<const double> realized_probs,
                             double s) {
  std::vector<double> lambdas;
  lambdas.reserve(realized_probs.size());
  for (double p : realized_probs) {
    if (!(p > 0.0)) {
      fail(ErrorKind::model_inconsistency, "realized token has p = 0");
    }
    if (p < 1.0) lambdas.push_back(p / (1.0 - p));
  }
  const double target = -s;
  if (lambdas.empty() || !(target > 0.0)) return 1.0;

  auto slope = [&](double c) {
    double sum = 0.0;
    for (double l : lambdas) sum += 1.0 / (c + l);
    return sum;
  };
  // slope() decreases in c; a positive root needs slope(0) > target.
  if (slope(0.0) <= target) return 1.0;

  constexpr double kUpper = 1e8;
  double c = kUpper;
  if (slope(kUpper) <= target) {
    double lo = 0.0;
    double hi = kUpper;
    for (int it = 0; it < 400 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (slope(mid) > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    c = 0.5 * (lo + hi);
  }
  double log_bound = -c * s;
  for (double l : lambdas) log_bound -= std::log1p(c / l);
  return std::min(1.0, std::exp(log_bound));
}

NeymanPearsonResult score_neyman_pearson(const TokenSequence& seq,
                                         const MasterKey& key,
                                         const SamplerParams& params,
                                         std::span<const ProbVector> step_dists,
                                         DedupRule dedup) {
  const AdmittedValues v = admitted_secret_values(seq, key, params, dedup);
  require_scored(v.r.size());
  if (step_dists.size() < seq.size() - seq.prompt_len) {
    fail(ErrorKind::config,
         "need one model distribution per generated position");
  }
  std::vector<double> realized(v.r.size());
  double score = 0.0;
  for (std::size_t i = 0; i < v.r.size(); ++i) {
    const std::size_t pos = v.positions[i];
    const ProbVector& dist = step_dists[pos - seq.prompt_len];
    const double p = dist[seq.tokens[pos]];
    if (!(p > 0.0)) {
      fail(ErrorKind::model_inconsistency,
           "token at position " + std::to_string(pos) +
               " has zero model probability");
    }
    realized[i] = p;
    score += (1.0 / p - 1.0) * std::log(v.r[i]);
  }
  return {score, v.r.size(), v.total_tokens,
          chernoff_pvalue_bound(realized, score)};
}

DetectionReport pvalue_simplified(const TokenSequence& seq,
                                  const MasterKey& key,
                                  const SamplerParams& params,
                                  DedupRule dedup) {
  const AdmittedValues v = admitted_secret_values(seq, key, params, dedup);
  require_scored(v.r.size());
  DetectionReport rep;
  rep.score = log_sum(v.r);
  rep.scored_tokens = v.r.size();
  rep.total_tokens = v.total_tokens;
  rep.p_value = statfun::reg_lower_gamma(static_cast<double>(v.r.size()),
                                         -rep.score);
  rep.test = TestKind::simplified;
  rep.dedup = dedup;
  return rep;
}

H0Pvalues pvalues_from_values(std::span<const double> r, Scheme scheme,
                              double gamma) {
  require_scored(r.size());
  H0Pvalues out;
  out.scored_tokens = r.size();
  if (scheme == Scheme::greenlist) {
    const std::uint64_t s = green_count(r, gamma);
    out.exact = pvalue_binomial(s, r.size(), gamma);
    out.ztest = pvalue_ztest(static_cast<double>(s), r.size(), scheme, gamma);
  } else if (scheme == Scheme::exponential) {
    const double s = exponential_sum(r);
    out.exact = pvalue_gamma(s, r.size());
    out.ztest = pvalue_ztest(s, r.size(), scheme, gamma);
    out.simplified = statfun::reg_lower_gamma(static_cast<double>(r.size()),
                                              -log_sum(r));
  } else {
    fail(ErrorKind::config, "vanilla scheme has no detector");
  }
  return out;
}

DetectionReport detect(const TokenSequence& seq, const MasterKey& key,
                       const DetectConfig& config, LogitSource* model) {
  const SamplerParams& params = config.params;
  params.validate();
  if (params.scheme == Scheme::vanilla) {
    fail(ErrorKind::config, "cannot detect with the vanilla scheme");
  }

  DetectionReport rep;
  rep.test = config.test;
  rep.dedup = config.dedup;
  switch (config.test) {
    case TestKind::binomial: {
      require_scheme(params, Scheme::greenlist, config.test);
      const ScoreResult s = score_greenlist(seq, key, params, config.dedup);
      rep.score = s.score;
      rep.scored_tokens = s.scored_tokens;
      rep.total_tokens = s.total_tokens;
      rep.p_value = pvalue_binomial(static_cast<std::uint64_t>(s.score),
                                    s.scored_tokens, params.gamma);
      break;
    }
    case TestKind::gamma: {
      require_scheme(params, Scheme::exponential, config.test);
      const ScoreResult s = score_exponential(seq, key, params, config.dedup);
      rep.score = s.score;
      rep.scored_tokens = s.scored_tokens;
      rep.total_tokens = s.total_tokens;
      rep.p_value = pvalue_gamma(s.score, s.scored_tokens);
      break;
    }
    case TestKind::ztest: {
      const ScoreResult s =
          params.scheme == Scheme::greenlist
              ? score_greenlist(seq, key, params, config.dedup)
              : score_exponential(seq, key, params, config.dedup);
      rep.score = s.score;
      rep.scored_tokens = s.scored_tokens;
      rep.total_tokens = s.total_tokens;
      rep.p_value =
          pvalue_ztest(s.score, s.scored_tokens, params.scheme, params.gamma);
      break;
    }
    case TestKind::neyman_pearson: {
      require_scheme(params, Scheme::exponential, config.test);
      if (model == nullptr) {
        fail(ErrorKind::config,
             "the np test needs model access to recompute token "
             "probabilities (pass --model)");
      }
      if (model->vocab_size() != seq.vocab_size) {
        fail(ErrorKind::model_inconsistency,
             "model vocabulary differs from the sequence's");
      }
      const std::span<const TokenId> tokens = seq.tokens;
      std::vector<ProbVector> dists;
      dists.reserve(seq.size() - seq.prompt_len);
      for (std::size_t pos = seq.prompt_len; pos < seq.size(); ++pos) {
        dists.push_back(softmax_with_nucleus(
            {model->next_logits(tokens.first(pos)), params.temperature,
             params.top_p}));
      }
      const NeymanPearsonResult np =
          score_neyman_pearson(seq, key, params, dists, config.dedup);
      rep.score = np.score;
      rep.scored_tokens = np.scored_tokens;
      rep.total_tokens = np.total_tokens;
      rep.p_value = np.pvalue_bound;
      break;
    }
    case TestKind::simplified:
      require_scheme(params, Scheme::exponential, config.test);
      return pvalue_simplified(seq, key, params, config.dedup);
  }
  return rep;
}

}  // namespace wmark

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

#include "wmark/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wmark/rng.hpp"

namespace wmark {

std::string_view to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::vanilla: return "vanilla";
    case Scheme::greenlist: return "greenlist";
    case Scheme::exponential: return "exponential";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "vanilla") return Scheme::vanilla;
  if (name == "greenlist") return Scheme::greenlist;
  if (name == "exponential") return Scheme::exponential;
  fail(ErrorKind::config, "unknown scheme '" + std::string(name) + "'");
}

void SamplerParams::validate() const {
  if (!(std::isfinite(delta) && delta >= 0.0)) {
    fail(ErrorKind::config, "delta must be finite and >= 0");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    fail(ErrorKind::config, "gamma must lie in (0,1)");
  }
  if (!(std::isfinite(temperature) && temperature > 0.0)) {
    fail(ErrorKind::config, "temperature must be > 0");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    fail(ErrorKind::config, "top_p must lie in (0,1]");
  }
  if (num_messages < 1) fail(ErrorKind::config, "num_messages must be >= 1");
  if (message >= num_messages) {
    fail(ErrorKind::config, "message index must be < num_messages");
  }
}

ProbVector softmax_with_nucleus(const LogitVector& l) {
  const std::size_t n = l.logits.size();
  if (n < 2) fail(ErrorKind::config, "logit vector needs at least 2 entries");
  if (!(std::isfinite(l.temperature) && l.temperature > 0.0)) {
    fail(ErrorKind::config, "temperature must be > 0");
  }
  if (!(l.top_p > 0.0 && l.top_p <= 1.0)) {
    fail(ErrorKind::config, "top_p must lie in (0,1]");
  }

  double max_logit = -std::numeric_limits<double>::infinity();
  for (double x : l.logits) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      fail(ErrorKind::degenerate_input, "logits must be finite or -inf");
    }
    max_logit = std::max(max_logit, x);
  }
  if (max_logit == -std::numeric_limits<double>::infinity()) {
    fail(ErrorKind::degenerate_input, "all logits are -inf");
  }

  ProbVector p;
  p.probs.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.probs[i] = std::exp((l.logits[i] - max_logit) / l.temperature);
    sum += p.probs[i];
  }
  for (double& x : p.probs) x /= sum;
  if (l.top_p >= 1.0) return p;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return p.probs[a] > p.probs[b];
                   });
  double mass = 0.0;
  std::size_t keep = n;
  for (std::size_t k = 0; k < n; ++k) {
    mass += p.probs[order[k]];
    if (mass >= l.top_p) {
      keep = k + 1;
      break;
    }
  }
  if (keep == n) return p;
  double kept = 0.0;
  for (std::size_t k = 0; k < keep; ++k) kept += p.probs[order[k]];
  for (std::size_t k = keep; k < n; ++k) p.probs[order[k]] = 0.0;
  for (double& x : p.probs) x /= kept;
  return p;
}

ProbVector greenlist_shift(const LogitVector& l, const std::vector<bool>& mask,
                           double delta) {
  if (mask.size() != l.logits.size()) {
    fail(ErrorKind::config, "greenlist mask length differs from vocabulary");
  }
  LogitVector shifted = l;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) shifted.logits[i] += delta;
  }
  return softmax_with_nucleus(shifted);
}

TokenId exponential_select(const ProbVector& p, std::span<const double> r) {
  if (r.size() < p.size()) {
    fail(ErrorKind::config, "secret vector shorter than the vocabulary");
  }
  bool found = false;
  TokenId best = 0;
  double best_key = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (!(p[v] > 0.0)) continue;
    const double key = -std::log(r[v]) / p[v];
    if (!found || key < best_key) {
      found = true;
      best = static_cast<TokenId>(v);
      best_key = key;
    }
  }
  if (!found) fail(ErrorKind::degenerate_input, "distribution has no mass");
  return best;
}

TokenId draw_inverse_cdf(const ProbVector& q, double u) {
  double cum = 0.0;
  std::size_t last_positive = q.size();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    cum += q[i];
    last_positive = i;
    if (u < cum) return static_cast<TokenId>(i);
  }
  if (last_positive == q.size()) {
    fail(ErrorKind::degenerate_input, "distribution has no mass");
  }
  // Rounding left the cumulative sum just below u.
  return static_cast<TokenId>(last_positive);
}

TokenId argmax_token(const ProbVector& q) {
  return static_cast<TokenId>(
      std::max_element(q.probs.begin(), q.probs.end()) - q.probs.begin());
}

Generation generate_traced(LogitSource& model, const SamplerParams& params,
                           const MasterKey& key, const TokenSequence& prompt,
                           std::size_t n, const GenerateOptions& options) {
  params.validate();
  const std::size_t vocab = model.vocab_size();
  if (prompt.vocab_size != 0 && prompt.vocab_size != vocab) {
    fail(ErrorKind::config, "prompt vocabulary differs from the model's");
  }
  if (params.scheme == Scheme::vanilla && params.num_messages > 1) {
    fail(ErrorKind::config, "vanilla generation cannot carry a message");
  }

  Generation out;
  out.sequence.vocab_size = vocab;
  out.sequence.prompt_len = prompt.tokens.size();
  out.sequence.tokens = prompt.tokens;
  out.sequence.validate();
  out.sequence.tokens.reserve(prompt.tokens.size() + n);
  out.realized_probs.reserve(n);

  auto& tokens = out.sequence.tokens;
  auto rng = Xoshiro256ss::from_seed(options.sampling_seed);
  const std::size_t d = params.dim(vocab);
  std::vector<double> r(vocab);
  std::vector<bool> mask(vocab);

  for (std::size_t step = 0; step < n; ++step) {
    LogitVector lv{model.next_logits(tokens), params.temperature,
                   params.top_p};
    if (lv.logits.size() != vocab) {
      fail(ErrorKind::model_inconsistency,
           "model returned " + std::to_string(lv.logits.size()) +
               " logits for a vocabulary of " + std::to_string(vocab));
    }
    const ProbVector p = softmax_with_nucleus(lv);

    if (params.scheme != Scheme::vanilla) {
      const WindowSeed seed =
          derive_seed_at(key, tokens, tokens.size(), params.h);
      const SecretVector r0 = secret_vector(seed, d);
      for (std::size_t i = 0; i < vocab; ++i) {
        r[i] = r0[(i + params.message) % d];
      }
    }

    TokenId next = 0;
    switch (params.scheme) {
      case Scheme::vanilla:
        next = params.greedy ? argmax_token(p)
                             : draw_inverse_cdf(p, unit_closed_open(rng()));
        break;
      case Scheme::greenlist: {
        for (std::size_t i = 0; i < vocab; ++i) mask[i] = r[i] < params.gamma;
        const ProbVector q = greenlist_shift(lv, mask, params.delta);
        next = params.greedy ? argmax_token(q)
                             : draw_inverse_cdf(q, unit_closed_open(rng()));
        break;
      }
      case Scheme::exponential:
        next = exponential_select(p, r);
        break;
    }

    out.realized_probs.push_back(p[next]);
    if (options.record_dists) out.step_dists.push_back(p);
    tokens.push_back(next);
  }
  return out;
}

TokenSequence generate(LogitSource& model, const SamplerParams& params,
                       const MasterKey& key, const TokenSequence& prompt,
                       std::size_t n, std::uint64_t sampling_seed) {
  return generate_traced(model, params, key, prompt, n,
                         GenerateOptions{sampling_seed, false})
      .sequence;
}

}  // namespace wmark

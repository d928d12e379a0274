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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "wmark/harness.hpp"
#include "wmark/multibit.hpp"
#include "wmark/stats.hpp"
#include "wmark/toylm.hpp"

using namespace wmark;
using namespace wmark::harness;

namespace {

// Always puts all mass on (last token + 1) mod V.
class OneHotSource final : public LogitSource {
 public:
  explicit OneHotSource(std::size_t V) : V_(V) {}
  std::size_t vocab_size() const override { return V_; }
  std::vector<double> next_logits(std::span<const TokenId> ctx) override {
    std::vector<double> l(V_, -INFINITY);
    l[ctx.empty() ? 0 : (ctx.back() + 1) % V_] = 0.0;
    return l;
  }

 private:
  std::size_t V_;
};

ExperimentSpec small_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.experiment = kind;
  s.trials = 40;
  s.text_length = 48;
  s.keys = default_keys(3, 5);
  s.h_values = {1, 2};
  s.seed = 17;
  return s;
}

}  // namespace

TEST_CASE("attack_substitute") {
  TokenSequence seq{{}, 50, 10};
  for (TokenId i = 0; i < 1010; ++i) seq.tokens.push_back(i % 50);
  CHECK(attack_substitute(seq, 0.0, 1).tokens == seq.tokens);

  const auto all = attack_substitute(seq, 1.0, 2);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i < 10) {
      CHECK(all.tokens[i] == seq.tokens[i]);
    } else {
      CHECK(all.tokens[i] != seq.tokens[i]);
      CHECK(all.tokens[i] < 50);
    }
  }

  const auto some = attack_substitute(seq, 0.3, 3);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) changed += some.tokens[i] != seq.tokens[i];
  CHECK(std::abs(static_cast<double>(changed) - 300.0) <= 4 * std::sqrt(1000 * 0.3 * 0.7));
  CHECK(attack_substitute(seq, 0.3, 3).tokens == some.tokens);
}

TEST_CASE("repetitive streams contain a short-period run") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const TokenSequence t = repetitive_stream(64, 260, 4, s);
    CHECK(t.size() == 264);
    CHECK(t.prompt_len == 4);
    std::size_t best = 0, run = 0;
    for (std::size_t i = 7; i < t.size(); ++i) {
      const bool periodic = t.tokens[i] == t.tokens[i - 1] || t.tokens[i] == t.tokens[i - 2] ||
                            t.tokens[i] == t.tokens[i - 3];
      run = periodic ? run + 1 : 0;
      best = std::max(best, run);
    }
    CHECK(best >= 0.3 * 256 - 3);
  }
}

TEST_CASE("a single-trial calibration curve is 0/1 with wide intervals") {
  ExperimentSpec s = small_spec(ExperimentKind::fpr_calibration);
  s.trials = 1;
  s.keys = default_keys(1, 5);
  s.sources = {H0Source::uniform};
  s.h_values = {2};
  const auto curves = run_fpr_calibration(s);
  REQUIRE(!curves.empty());
  for (const auto& c : curves) {
    CHECK(c.detections == 1);
    REQUIRE(c.thresholds.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK((c.empirical[i] == 0.0 || c.empirical[i] == 1.0));
      CHECK(c.ci_high[i] - c.ci_low[i] >= 0.97);
    }
  }
}

TEST_CASE("parallel and serial runs are bit-identical") {
  ExperimentSpec s = small_spec(ExperimentKind::fpr_calibration);
  ExperimentSpec t = s;
  t.parallel = false;
  const auto a = run_fpr_calibration(s);
  const auto b = run_fpr_calibration(t);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].flagged == b[i].flagged);
    CHECK(a[i].mean_scored_tokens == b[i].mean_scored_tokens);
  }

  s.experiment = t.experiment = ExperimentKind::robustness;
  const auto ra = run_robustness(s);
  const auto rb = run_robustness(t);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].clean_hits == rb[i].clean_hits);
    CHECK(ra[i].attacked_hits == rb[i].attacked_hits);
  }

  s.experiment = t.experiment = ExperimentKind::h1_bounds;
  s.h_values = t.h_values = {4};
  const auto ha = run_h1_bounds(s);
  const auto hb = run_h1_bounds(t);
  REQUIRE(ha.size() == hb.size());
  for (std::size_t i = 0; i < ha.size(); ++i) {
    CHECK(ha[i].mean_score == hb[i].mean_score);
    CHECK(ha[i].conditional_variance == hb[i].conditional_variance);
  }

  s.experiment = t.experiment = ExperimentKind::identification;
  s.users = t.users = 4;
  s.trials = t.trials = 5;
  s.message_counts = t.message_counts = {4, 16};
  const auto ia = run_identification(s);
  const auto ib = run_identification(t);
  REQUIRE(ia.size() == ib.size());
  for (std::size_t i = 0; i < ia.size(); ++i) {
    CHECK(ia[i].flagged == ib[i].flagged);
    CHECK(ia[i].correct == ib[i].correct);
  }
}

TEST_CASE("robustness with threshold 1 flags everything") {
  ExperimentSpec s = small_spec(ExperimentKind::robustness);
  s.fpr = 1.0;
  s.attack_probability = 0.0;
  for (const auto& c : run_robustness(s)) {
    CHECK(c.tpr == 1.0);
    CHECK(c.tpr_attacked == 1.0);
  }
}

TEST_CASE("identification with one message is detection") {
  ExperimentSpec s = small_spec(ExperimentKind::identification);
  s.users = 1;
  s.message_counts = {1};
  s.h_values = {4};
  for (const auto& c : run_identification(s)) {
    CHECK(c.correct == c.flagged);
    CHECK(c.false_accusations == 0);
    CHECK(c.texts == 40);
  }
}

TEST_CASE("one-hot completions score T' on average") {
  OneHotSource src(64);
  SamplerParams p;
  p.h = 1;
  std::vector<double> ratio;
  for (std::uint64_t k = 0; k < 2000; ++k) {
    const MasterKey key = MasterKey::from_seed(k);
    const auto g = generate_traced(src, p, key, {{static_cast<TokenId>(k % 64)}, 64, 1}, 40);
    CHECK(entropy_of_completion(g.realized_probs) == 0.0);
    const auto s = score_exponential(g.sequence, key, p, DedupRule::tuple);
    ratio.push_back(s.score / static_cast<double>(s.scored_tokens));
  }
  const auto m = stats::moments(ratio);
  CHECK(std::abs(m.mean - 1.0) <= 4 * m.se_mean);
}

TEST_CASE("spec validation") {
  ExperimentSpec s;
  s.trials = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.attack_probability = 1.5;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.experiment = ExperimentKind::identification;
  s.users = 20;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(parse_experiment("h1_bounds") == ExperimentKind::h1_bounds);
  CHECK(parse_source("repetitive") == H0Source::repetitive);
  CHECK(default_keys(3, 1) == default_keys(3, 1));
  CHECK(default_keys(3, 1) != default_keys(3, 2));
}

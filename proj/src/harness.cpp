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

#include "wmark/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wmark/multibit.hpp"
#include "wmark/rng.hpp"
#include "wmark/statfun.hpp"
#include "wmark/toylm.hpp"

namespace wmark::harness {
namespace {

constexpr double kEntropyCoefficient = std::numbers::pi * std::numbers::pi / 6.0 - 1.0;
constexpr double kPiSquaredOver6 = std::numbers::pi * std::numbers::pi / 6.0;

// Per-trial stream indices under split_seed(trial_seed, .).
constexpr std::uint64_t kPromptStream = 0;
constexpr std::uint64_t kSamplingStream = 1;
constexpr std::uint64_t kAttackStream = 2;
constexpr std::uint64_t kSourceStream = 3;

__extension__ typedef unsigned __int128 u128;

// Multiply-shift draw from [0, n); bias below 2^-50 for the sizes used here.
std::uint64_t bounded(Xoshiro256ss& rng, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<u128>(rng()) * n) >> 64);
}

std::uint64_t experiment_seed(const ExperimentSpec& spec, std::uint64_t tag) {
  return split_seed(spec.seed, tag);
}

TokenSequence uniform_prompt(std::size_t vocab, std::size_t len,
                             std::uint64_t seed) {
  TokenSequence s;
  s.vocab_size = vocab;
  s.prompt_len = len;
  s.tokens.resize(len);
  auto rng = Xoshiro256ss::from_seed(seed);
  for (auto& t : s.tokens) t = static_cast<TokenId>(bounded(rng, vocab));
  return s;
}

ToyModel make_model(const ExperimentSpec& spec, std::string_view preset) {
  return ToyModel::preset(preset, spec.model_seed, spec.vocab_size,
                          spec.model_order);
}

bool is_flagged(double p, double threshold) noexcept { return p < threshold; }

double detect_pvalue(const TokenSequence& seq, const MasterKey& key,
                     const DetectConfig& cfg) {
  try {
    return detect(seq, key, cfg).p_value;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::insufficient_data) return 1.0;
    throw;
  }
}

TestKind exact_test(Scheme s) {
  return s == Scheme::greenlist ? TestKind::binomial : TestKind::gamma;
}

std::vector<TestKind> calibrated_tests(Scheme s) {
  if (s == Scheme::greenlist) return {TestKind::binomial, TestKind::ztest};
  return {TestKind::gamma, TestKind::ztest, TestKind::simplified};
}

double pick(const H0Pvalues& p, TestKind t) noexcept {
  switch (t) {
    case TestKind::ztest:
      return p.ztest;
    case TestKind::simplified:
      return p.simplified;
    default:
      return p.exact;
  }
}

TokenSequence h0_text_with(const ExperimentSpec& spec, const ToyModel& model,
                           H0Source source, std::size_t trial) {
  const std::uint64_t trial_seed = split_seed(
      experiment_seed(spec, 100 + static_cast<std::uint64_t>(source)), trial);
  const std::size_t V = spec.vocab_size;
  switch (source) {
    case H0Source::toy: {
      SamplerParams p = spec.params;
      p.scheme = Scheme::vanilla;
      p.num_messages = 1;
      p.message = 0;
      ToyModel m = model;
      return generate(m, p, MasterKey{},
                      uniform_prompt(V, spec.prompt_length,
                                     split_seed(trial_seed, kPromptStream)),
                      spec.text_length, split_seed(trial_seed, kSamplingStream));
    }
    case H0Source::uniform: {
      TokenSequence s = uniform_prompt(V, spec.prompt_length + spec.text_length,
                                       split_seed(trial_seed, kSourceStream));
      s.prompt_len = spec.prompt_length;
      return s;
    }
    case H0Source::repetitive:
      return repetitive_stream(V, spec.text_length, spec.prompt_length,
                               split_seed(trial_seed, kSourceStream));
  }
  fail(ErrorKind::config, "unknown H0 source");
}

// Runs body(i) for i in [0, n). `body` must only touch per-index state or the
// thread-local accumulator handed to it.
template <class Acc, class Body, class Merge>
void parallel_trials(std::size_t n, bool parallel, const Acc& init, Body body,
                     Merge merge) {
#pragma omp parallel if (parallel)
  {
    Acc local = init;
#pragma omp for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) body(i, local);
#pragma omp critical(wmark_harness_merge)
    merge(local);
  }
}

void add_into(std::vector<std::uint64_t>& dst,
              const std::vector<std::uint64_t>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

std::string_view to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::fpr_calibration:
      return "fpr_calibration";
    case ExperimentKind::robustness:
      return "robustness";
    case ExperimentKind::identification:
      return "identification";
    case ExperimentKind::h1_bounds:
      return "h1_bounds";
  }
  return "?";
}

std::string_view to_string(H0Source s) noexcept {
  switch (s) {
    case H0Source::toy:
      return "toy";
    case H0Source::uniform:
      return "uniform";
    case H0Source::repetitive:
      return "repetitive";
  }
  return "?";
}

ExperimentKind parse_experiment(std::string_view name) {
  for (auto k : {ExperimentKind::fpr_calibration, ExperimentKind::robustness,
                 ExperimentKind::identification, ExperimentKind::h1_bounds}) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorKind::config, "unknown experiment '" + std::string(name) + "'");
}

H0Source parse_source(std::string_view name) {
  for (auto s : {H0Source::toy, H0Source::uniform, H0Source::repetitive}) {
    if (name == to_string(s)) return s;
  }
  fail(ErrorKind::config, "unknown H0 source '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  if (trials < 1) fail(ErrorKind::config, "trials must be >= 1");
  if (!(attack_probability >= 0.0 && attack_probability <= 1.0)) {
    fail(ErrorKind::config, "attack probability must lie in [0,1]");
  }
  if (text_length < 1) fail(ErrorKind::config, "text_length must be >= 1");
  if (vocab_size < 2) fail(ErrorKind::config, "vocab_size must be >= 2");
  if (h_values.empty()) fail(ErrorKind::config, "h list is empty");
  for (double t : targets) {
    if (!(t > 0.0 && t <= 1.0)) fail(ErrorKind::config, "targets must lie in (0,1]");
  }
  for (double t : fpr_targets) {
    if (!(t > 0.0 && t <= 1.0)) fail(ErrorKind::config, "fpr targets must lie in (0,1]");
  }
  if (!(fpr > 0.0 && fpr <= 1.0)) fail(ErrorKind::config, "fpr must lie in (0,1]");
  SamplerParams p = params;
  p.scheme = Scheme::exponential;
  p.validate();
  if (experiment == ExperimentKind::identification) {
    if (message_counts.empty() || users < 1) {
      fail(ErrorKind::config, "identification needs users and message counts");
    }
    if (users > *std::min_element(message_counts.begin(), message_counts.end())) {
      fail(ErrorKind::config, "more users than the smallest message count");
    }
  }
}

std::vector<MasterKey> default_keys(std::size_t count, std::uint64_t seed) {
  std::vector<MasterKey> keys;
  keys.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    keys.push_back(MasterKey::from_seed(split_seed(seed ^ 0x6b6579ULL, k)));
  }
  return keys;
}

std::vector<MasterKey> ExperimentSpec::resolved_keys() const {
  return keys.empty() ? default_keys(10, seed) : keys;
}

// ---------------------------------------------------------------------------
// Calibration

TokenSequence repetitive_stream(std::size_t vocab_size, std::size_t length,
                                std::size_t prompt_len, std::uint64_t seed) {
  TokenSequence s = uniform_prompt(vocab_size, prompt_len + length, seed);
  s.prompt_len = prompt_len;
  auto rng = Xoshiro256ss::from_seed(split_seed(seed, 1));
  const std::size_t period = 1 + bounded(rng, 3);
  std::vector<TokenId> motif(period);
  for (auto& t : motif) t = static_cast<TokenId>(bounded(rng, vocab_size));
  const double frac = 0.3 + 0.4 * unit_closed_open(rng());
  const auto run = static_cast<std::size_t>(frac * static_cast<double>(length));
  const std::size_t offset = prompt_len + bounded(rng, length - run + 1);
  for (std::size_t j = 0; j < run; ++j) s.tokens[offset + j] = motif[j % period];
  return s;
}

TokenSequence h0_text(const ExperimentSpec& spec, H0Source source,
                      std::size_t trial) {
  return h0_text_with(spec, make_model(spec, spec.model), source, trial);
}

std::vector<CalibrationCurve> run_fpr_calibration(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<MasterKey> keys = spec.resolved_keys();
  const ToyModel model = make_model(spec, spec.model);
  const std::size_t n_targets = spec.targets.size();

  // Curve layout: source-major, then h, scheme, test, dedup.
  std::vector<CalibrationCurve> curves;
  for (H0Source src : spec.sources) {
    for (std::size_t h : spec.h_values) {
      for (Scheme scheme : spec.schemes) {
        for (TestKind test : calibrated_tests(scheme)) {
          for (DedupRule dedup : spec.dedups) {
            CalibrationCurve c;
            c.source = src;
            c.scheme = scheme;
            c.test = test;
            c.dedup = dedup;
            c.h = h;
            c.thresholds = spec.targets;
            curves.push_back(std::move(c));
          }
        }
      }
    }
  }
  std::size_t per_h = 0;
  for (Scheme scheme : spec.schemes) per_h += calibrated_tests(scheme).size();
  per_h *= spec.dedups.size();
  const std::size_t per_source = per_h * spec.h_values.size();

  struct Acc {
    std::vector<std::uint64_t> flagged;
    std::vector<std::uint64_t> scored;
  };
  const Acc zero{std::vector<std::uint64_t>(curves.size() * n_targets, 0),
                 std::vector<std::uint64_t>(curves.size(), 0)};
  Acc total = zero;

  for (std::size_t si = 0; si < spec.sources.size(); ++si) {
    const H0Source src = spec.sources[si];
    parallel_trials(
        spec.trials, spec.parallel, zero,
        [&](std::size_t trial, Acc& acc) {
          const TokenSequence text = h0_text_with(spec, model, src, trial);
          const std::span<const TokenId> tokens = text.tokens;
          std::vector<std::vector<char>> admitted(spec.dedups.size());
          std::vector<double> r;
          std::vector<double> picked;
          for (std::size_t hi = 0; hi < spec.h_values.size(); ++hi) {
            const std::size_t h = spec.h_values[hi];
            const std::size_t start = first_scored_position(text, h);
            const std::size_t n = text.size() > start ? text.size() - start : 0;
            std::vector<std::size_t> counts(spec.dedups.size(), 0);
            for (std::size_t di = 0; di < spec.dedups.size(); ++di) {
              ScoringContext ctx(h, spec.dedups[di]);
              ctx.reset(tokens, n);
              admitted[di].assign(n, 0);
              for (std::size_t j = 0; j < n; ++j) {
                admitted[di][j] = ctx.admit(start + j) ? 1 : 0;
                counts[di] += admitted[di][j];
              }
            }
            r.resize(n);
            for (const MasterKey& key : keys) {
              for (std::size_t j = 0; j < n; ++j) {
                const std::size_t pos = start + j;
                const WindowSeed seed = derive_seed(key, tokens.subspan(pos - h, h), h);
                r[j] = secret_entry(seed, tokens[pos] % text.vocab_size);
              }
              std::size_t ci = si * per_source + hi * per_h;
              for (Scheme scheme : spec.schemes) {
                const std::vector<TestKind> tests = calibrated_tests(scheme);
                for (std::size_t ti = 0; ti < tests.size(); ++ti) {
                  for (std::size_t di = 0; di < spec.dedups.size(); ++di, ++ci) {
                    acc.scored[ci] += counts[di];
                  }
                }
                ci -= tests.size() * spec.dedups.size();
                for (std::size_t di = 0; di < spec.dedups.size(); ++di) {
                  picked.clear();
                  for (std::size_t j = 0; j < n; ++j) {
                    if (admitted[di][j]) picked.push_back(r[j]);
                  }
                  H0Pvalues pv;
                  if (!picked.empty()) {
                    pv = pvalues_from_values(picked, scheme, spec.params.gamma);
                  }
                  for (std::size_t ti = 0; ti < tests.size(); ++ti) {
                    const double p = pick(pv, tests[ti]);
                    const std::size_t curve = ci + ti * spec.dedups.size() + di;
                    for (std::size_t k = 0; k < n_targets; ++k) {
                      if (is_flagged(p, spec.targets[k])) {
                        ++acc.flagged[curve * n_targets + k];
                      }
                    }
                  }
                }
                ci += tests.size() * spec.dedups.size();
              }
            }
          }
        },
        [&](const Acc& local) {
          add_into(total.flagged, local.flagged);
          add_into(total.scored, local.scored);
        });
  }

  const std::uint64_t detections =
      static_cast<std::uint64_t>(spec.trials) * keys.size();
  for (std::size_t c = 0; c < curves.size(); ++c) {
    CalibrationCurve& cv = curves[c];
    cv.detections = detections;
    cv.mean_scored_tokens =
        static_cast<double>(total.scored[c]) / static_cast<double>(detections);
    for (std::size_t k = 0; k < n_targets; ++k) {
      const std::uint64_t f = total.flagged[c * n_targets + k];
      const stats::Interval ci = stats::clopper_pearson(f, detections);
      cv.flagged.push_back(f);
      cv.empirical.push_back(static_cast<double>(f) / static_cast<double>(detections));
      cv.ci_low.push_back(ci.low);
      cv.ci_high.push_back(ci.high);
    }
  }
  return curves;
}

// ---------------------------------------------------------------------------
// Robustness

TokenSequence attack_substitute(const TokenSequence& seq, double p_sub,
                                std::uint64_t rng_seed) {
  if (!(p_sub >= 0.0 && p_sub <= 1.0)) {
    fail(ErrorKind::domain, "substitution probability must lie in [0,1]");
  }
  seq.validate();
  TokenSequence out = seq;
  if (seq.vocab_size < 2) return out;
  auto rng = Xoshiro256ss::from_seed(rng_seed);
  for (std::size_t i = seq.prompt_len; i < out.size(); ++i) {
    if (!(unit_closed_open(rng()) < p_sub)) continue;
    auto alt = static_cast<TokenId>(bounded(rng, seq.vocab_size - 1));
    if (alt >= out.tokens[i]) ++alt;
    out.tokens[i] = alt;
  }
  return out;
}

std::vector<RobustnessCell> run_robustness(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<MasterKey> keys = spec.resolved_keys();
  const ToyModel model = make_model(spec, spec.model);

  std::vector<RobustnessCell> cells;
  for (Scheme scheme : spec.schemes) {
    const bool green = scheme == Scheme::greenlist;
    const std::vector<double>& knob = green ? spec.deltas : spec.temperatures;
    for (double strength : knob) {
      for (std::size_t h : spec.h_values) {
        RobustnessCell c;
        c.scheme = scheme;
        c.knob = green ? "delta" : "temperature";
        c.strength = strength;
        c.h = h;
        c.trials = spec.trials;
        cells.push_back(std::move(c));
      }
    }
  }

  std::vector<std::uint64_t> hits(cells.size() * 2, 0);
  const std::uint64_t base = experiment_seed(spec, 200);
  parallel_trials(
      cells.size() * spec.trials, spec.parallel,
      std::vector<std::uint64_t>(hits.size(), 0),
      [&](std::size_t idx, std::vector<std::uint64_t>& acc) {
        const std::size_t cell = idx / spec.trials;
        const std::size_t trial = idx % spec.trials;
        const RobustnessCell& c = cells[cell];
        // Trial randomness is shared across cells (common random numbers).
        const std::uint64_t trial_seed = split_seed(base, trial);
        SamplerParams p = spec.params;
        p.scheme = c.scheme;
        p.h = c.h;
        p.num_messages = 1;
        p.message = 0;
        if (c.scheme == Scheme::greenlist) {
          p.delta = c.strength;
        } else {
          p.temperature = c.strength;
        }
        const MasterKey& key = keys[trial % keys.size()];
        ToyModel m = model;
        const TokenSequence seq = generate(
            m, p, key,
            uniform_prompt(spec.vocab_size, spec.prompt_length,
                           split_seed(trial_seed, kPromptStream)),
            spec.text_length, split_seed(trial_seed, kSamplingStream));
        const DetectConfig cfg{p, exact_test(c.scheme), spec.dedups.front()};
        if (is_flagged(detect_pvalue(seq, key, cfg), spec.fpr)) ++acc[2 * cell];
        const TokenSequence attacked = attack_substitute(
            seq, spec.attack_probability, split_seed(trial_seed, kAttackStream));
        if (is_flagged(detect_pvalue(attacked, key, cfg), spec.fpr)) {
          ++acc[2 * cell + 1];
        }
      },
      [&](const std::vector<std::uint64_t>& local) { add_into(hits, local); });

  for (std::size_t i = 0; i < cells.size(); ++i) {
    RobustnessCell& c = cells[i];
    c.clean_hits = hits[2 * i];
    c.attacked_hits = hits[2 * i + 1];
    c.tpr = static_cast<double>(c.clean_hits) / static_cast<double>(c.trials);
    c.tpr_attacked =
        static_cast<double>(c.attacked_hits) / static_cast<double>(c.trials);
    c.ci = stats::clopper_pearson(c.clean_hits, c.trials);
    c.ci_attacked = stats::clopper_pearson(c.attacked_hits, c.trials);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Identification

std::vector<IdentificationCell> run_identification(const ExperimentSpec& spec) {
  spec.validate();
  const MasterKey key = spec.resolved_keys().front();
  const ToyModel model = make_model(spec, spec.model);
  const std::size_t max_m =
      *std::max_element(spec.message_counts.begin(), spec.message_counts.end());
  const std::size_t n_m = spec.message_counts.size();
  const std::size_t n_f = spec.fpr_targets.size();
  const std::size_t texts = spec.users * spec.trials;

  std::vector<IdentificationCell> out;
  for (Scheme scheme : spec.schemes) {
    for (std::size_t h : spec.h_values) {
      SamplerParams p = spec.params;
      p.scheme = scheme;
      p.h = h;
      p.num_messages = max_m;
      const std::uint64_t base = experiment_seed(spec, 300);

      // Per (M, fpr): flagged, correct, false accusations.
      std::vector<std::uint64_t> counts(n_m * n_f * 3, 0);
      parallel_trials(
          texts, spec.parallel, std::vector<std::uint64_t>(counts.size(), 0),
          [&](std::size_t t, std::vector<std::uint64_t>& acc) {
            const std::size_t user = t / spec.trials;
            const std::uint64_t trial_seed = split_seed(base, t);
            ToyModel m = model;
            const TokenSequence seq = generate_multibit(
                m, p, key,
                uniform_prompt(spec.vocab_size, spec.prompt_length,
                               split_seed(trial_seed, kPromptStream)),
                spec.text_length, user, split_seed(trial_seed, kSamplingStream));
            SamplerParams dp = p;
            dp.message = 0;
            MessageScores ms;
            try {
              ms = score_all_messages_serial(seq, key, dp, spec.dedups.front());
            } catch (const Error& e) {
              if (e.kind() == ErrorKind::insufficient_data) return;
              throw;
            }
            for (std::size_t mi = 0; mi < n_m; ++mi) {
              for (std::size_t fi = 0; fi < n_f; ++fi) {
                const IdentificationReport rep =
                    identify_from_scores(ms, spec.message_counts[mi], scheme,
                                         p.gamma, spec.fpr_targets[fi]);
                if (!rep.flagged) continue;
                const std::size_t base_idx = (mi * n_f + fi) * 3;
                ++acc[base_idx];
                if (rep.best_message == user) {
                  ++acc[base_idx + 1];
                } else {
                  ++acc[base_idx + 2];
                }
              }
            }
          },
          [&](const std::vector<std::uint64_t>& local) { add_into(counts, local); });

      for (std::size_t mi = 0; mi < n_m; ++mi) {
        for (std::size_t fi = 0; fi < n_f; ++fi) {
          const std::size_t b = (mi * n_f + fi) * 3;
          IdentificationCell c;
          c.scheme = scheme;
          c.h = h;
          c.num_messages = spec.message_counts[mi];
          c.fpr_target = spec.fpr_targets[fi];
          c.texts = texts;
          c.flagged = counts[b];
          c.correct = counts[b + 1];
          c.false_accusations = counts[b + 2];
          c.accuracy = static_cast<double>(c.correct) / static_cast<double>(texts);
          c.ci = stats::clopper_pearson(c.correct, texts);
          out.push_back(c);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// H1 bounds

std::vector<H1BoundReport> run_h1_bounds(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<MasterKey> keys = spec.resolved_keys();
  std::vector<H1BoundReport> out;

  for (const std::string& preset : spec.presets) {
    const ToyModel model = make_model(spec, preset);
    for (std::size_t h : spec.h_values) {
      SamplerParams p = spec.params;
      p.scheme = Scheme::exponential;
      p.h = h;
      p.num_messages = 1;
      p.message = 0;
      const std::uint64_t base = experiment_seed(spec, 400);

      // Per text: S, T', H_T, sum_t H_{1/p_t}.
      std::vector<double> score(spec.trials), scored(spec.trials),
          entropy(spec.trials), expected(spec.trials);
      parallel_trials(
          spec.trials, spec.parallel, 0,
          [&](std::size_t i, int&) {
            const std::uint64_t trial_seed = split_seed(base, i);
            const MasterKey& key = keys[i % keys.size()];
            ToyModel m = model;
            const Generation g = generate_traced(
                m, p, key,
                uniform_prompt(spec.vocab_size, spec.prompt_length,
                               split_seed(trial_seed, kPromptStream)),
                spec.text_length, {split_seed(trial_seed, kSamplingStream), false});
            // Tuple dedup keeps only fresh windows, where the selection law
            // holds with an unused secret vector.
            const AdmittedValues v =
                admitted_secret_values(g.sequence, key, p, DedupRule::tuple);
            double s = 0.0, ent = 0.0, e = 0.0;
            for (std::size_t k = 0; k < v.r.size(); ++k) {
              const double pt = g.realized_probs[v.positions[k] - g.sequence.prompt_len];
              s -= std::log1p(-v.r[k]);
              ent -= pt * std::log(pt);
              e += statfun::harmonic(1.0 / pt);
            }
            score[i] = s;
            scored[i] = static_cast<double>(v.r.size());
            entropy[i] = ent;
            expected[i] = e;
          },
          [](int) {});

      std::vector<double> gap(spec.trials), residual(spec.trials);
      for (std::size_t i = 0; i < spec.trials; ++i) {
        gap[i] = score[i] - scored[i] - kEntropyCoefficient * entropy[i];
        residual[i] = score[i] - expected[i];
      }
      const stats::Moments ms = stats::moments(score);
      const stats::Moments mg = stats::moments(gap);
      const stats::Moments mr = stats::moments(residual);
      const stats::Moments mt = stats::moments(scored);
      const stats::Moments me = stats::moments(entropy);

      H1BoundReport r;
      r.preset = preset;
      r.h = h;
      r.trials = spec.trials;
      r.mean_scored_tokens = mt.mean;
      r.mean_entropy = me.mean;
      r.mean_score = ms.mean;
      r.se_score = ms.se_mean;
      r.mean_bound = mt.mean + kEntropyCoefficient * me.mean;
      r.mean_gap = mg.mean;
      r.se_gap = mg.se_mean;
      r.raw_variance = ms.variance;
      r.se_raw_variance = ms.se_variance;
      r.conditional_variance = mr.variance;
      r.se_conditional_variance = mr.se_variance;
      r.variance_bound = mt.mean * kPiSquaredOver6;
      r.mean_pass = r.mean_gap >= -3.0 * r.se_gap;
      r.variance_pass =
          r.conditional_variance <= r.variance_bound + 3.0 * r.se_conditional_variance;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace wmark::harness

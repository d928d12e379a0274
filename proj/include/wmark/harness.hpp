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
#include <string>
#include <string_view>
#include <vector>

#include "wmark/detectors.hpp"
#include "wmark/keying.hpp"
#include "wmark/samplers.hpp"
#include "wmark/stats.hpp"

/// Batch experiments on the toy model: FPR calibration, robustness under a
/// substitution attack, identification accuracy and H1 score bounds.
///
/// Every trial draws its randomness from split_seed(spec.seed, trial), so a
/// run is bit-identical whether trials execute in parallel or serially.
namespace wmark::harness {

enum class ExperimentKind { fpr_calibration, robustness, identification, h1_bounds };

/// Null-hypothesis text sources for calibration.
enum class H0Source {
  toy,         // vanilla generations from the toy model
  uniform,     // i.i.d. uniform tokens
  repetitive,  // uniform text with a long motif of period 1..3
};

std::string_view to_string(ExperimentKind k) noexcept;
std::string_view to_string(H0Source s) noexcept;
ExperimentKind parse_experiment(std::string_view name);
H0Source parse_source(std::string_view name);

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::fpr_calibration;
  std::size_t trials = 1000;          // N (per key for calibration, per cell otherwise)
  std::vector<MasterKey> keys;        // empty means default_keys(10, seed)
  std::size_t text_length = 256;      // generated tokens T
  std::size_t prompt_length = 4;
  SamplerParams params;               // gamma, delta, temperature, top_p
  std::vector<std::size_t> h_values{1, 2, 4};
  std::vector<Scheme> schemes{Scheme::greenlist, Scheme::exponential};
  std::vector<H0Source> sources{H0Source::toy, H0Source::uniform,
                                H0Source::repetitive};
  std::vector<DedupRule> dedups{DedupRule::tuple, DedupRule::context,
                                DedupRule::off};
  std::vector<double> targets{1e-1, 1e-2, 1e-3};
  std::string model = "medium";       // toy preset
  std::vector<std::string> presets{"low", "medium", "high"};
  std::size_t vocab_size = 64;
  std::size_t model_order = 3;
  std::uint64_t model_seed = 0;
  double attack_probability = 0.3;
  double fpr = 1e-5;                  // robustness decision threshold
  std::vector<double> deltas{1.0, 2.0, 4.0};
  std::vector<double> temperatures{0.8, 1.0, 1.1};
  std::vector<std::size_t> message_counts{16, 64, 256};
  std::vector<double> fpr_targets{1e-3, 1e-6};
  std::size_t users = 16;             // M'
  std::uint64_t seed = 1;
  bool parallel = true;
  std::string output;                 // path stem; empty writes nothing

  void validate() const;
  std::vector<MasterKey> resolved_keys() const;
};

std::vector<MasterKey> default_keys(std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// FPR calibration

struct CalibrationCurve {
  H0Source source = H0Source::toy;
  Scheme scheme = Scheme::exponential;
  TestKind test = TestKind::gamma;
  DedupRule dedup = DedupRule::tuple;
  std::size_t h = 1;
  std::uint64_t detections = 0;       // texts x keys
  std::vector<double> thresholds;
  std::vector<std::uint64_t> flagged;
  std::vector<double> empirical;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  double mean_scored_tokens = 0.0;
};

std::vector<CalibrationCurve> run_fpr_calibration(const ExperimentSpec& spec);

/// The H0 text of one calibration trial (prompt included).
TokenSequence h0_text(const ExperimentSpec& spec, H0Source source,
                      std::size_t trial);

TokenSequence repetitive_stream(std::size_t vocab_size, std::size_t length,
                                std::size_t prompt_len, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Robustness

/// Replaces each non-prompt token, independently with probability p_sub, by a
/// uniformly drawn different token.
TokenSequence attack_substitute(const TokenSequence& seq, double p_sub,
                                std::uint64_t rng_seed);

struct RobustnessCell {
  Scheme scheme = Scheme::greenlist;
  std::string knob;                   // "delta" or "temperature"
  double strength = 0.0;
  std::size_t h = 1;
  std::uint64_t trials = 0;
  std::uint64_t clean_hits = 0;
  std::uint64_t attacked_hits = 0;
  double tpr = 0.0;
  double tpr_attacked = 0.0;
  stats::Interval ci;
  stats::Interval ci_attacked;
};

std::vector<RobustnessCell> run_robustness(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Identification

struct IdentificationCell {
  Scheme scheme = Scheme::exponential;
  std::size_t h = 1;
  std::size_t num_messages = 1;       // M
  double fpr_target = 1e-3;
  std::uint64_t texts = 0;
  std::uint64_t flagged = 0;
  std::uint64_t correct = 0;          // flagged and attributed to the author
  std::uint64_t false_accusations = 0;
  double accuracy = 0.0;
  stats::Interval ci;
};

std::vector<IdentificationCell> run_identification(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// H1 bounds (exponential scheme)

struct H1BoundReport {
  std::string preset;
  std::size_t h = 1;
  std::size_t trials = 0;
  double mean_scored_tokens = 0.0;    // E[T']
  double mean_entropy = 0.0;          // E[H_T]
  double mean_score = 0.0;
  double se_score = 0.0;
  double mean_bound = 0.0;            // E[T' + (pi^2/6 - 1) H_T]
  double mean_gap = 0.0;              // E[S - bound], per-text paired
  double se_gap = 0.0;
  double raw_variance = 0.0;          // Var(S), includes variation of p_t
  double se_raw_variance = 0.0;
  double conditional_variance = 0.0;  // Var(S - sum_t H_{1/p_t})
  double se_conditional_variance = 0.0;
  double variance_bound = 0.0;        // E[T'] pi^2/6
  bool mean_pass = false;             // mean_gap >= -3 se_gap
  bool variance_pass = false;         // conditional <= bound + 3 se
};

std::vector<H1BoundReport> run_h1_bounds(const ExperimentSpec& spec);

}  // namespace wmark::harness

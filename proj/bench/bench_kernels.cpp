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

// Parallel kernels against their serial references.
//
//   bench_kernels --benchmark_filter=ScoreAll
//
// Set OMP_NUM_THREADS to control the parallel variants.

#include <benchmark/benchmark.h>

#include "wmark/harness.hpp"
#include "wmark/keying.hpp"
#include "wmark/multibit.hpp"
#include "wmark/sha256.hpp"
#include "wmark/toylm.hpp"

namespace {

using namespace wmark;

TokenSequence watermarked_text(std::size_t length, std::size_t messages) {
  ToyModel model = ToyModel::preset("medium", 1);
  SamplerParams p;
  p.h = 4;
  p.num_messages = messages;
  TokenSequence prompt;
  prompt.vocab_size = model.vocab_size();
  prompt.tokens = {1, 2, 3, 4};
  prompt.prompt_len = 4;
  return generate_multibit(model, p, MasterKey::from_seed(9), prompt, length,
                           messages / 2);
}

SamplerParams multibit_params(std::size_t messages) {
  SamplerParams p;
  p.h = 4;
  p.num_messages = messages;
  return p;
}

void BM_ScoreAllMessages(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const TokenSequence seq = watermarked_text(256, m);
  const SamplerParams p = multibit_params(m);
  const MasterKey key = MasterKey::from_seed(9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_all_messages(seq, key, p));
  }
}

void BM_ScoreAllMessagesSerial(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const TokenSequence seq = watermarked_text(256, m);
  const SamplerParams p = multibit_params(m);
  const MasterKey key = MasterKey::from_seed(9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_all_messages_serial(seq, key, p));
  }
}

void BM_ScoreAllMessagesNaive(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const TokenSequence seq = watermarked_text(256, m);
  const SamplerParams p = multibit_params(m);
  const MasterKey key = MasterKey::from_seed(9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_all_messages_naive(seq, key, p, m));
  }
}

void calibration(benchmark::State& state, bool parallel) {
  harness::ExperimentSpec spec;
  spec.trials = static_cast<std::size_t>(state.range(0));
  spec.sources = {harness::H0Source::uniform};
  spec.h_values = {2};
  spec.dedups = {DedupRule::tuple};
  spec.parallel = parallel;
  for (auto _ : state) {
    benchmark::DoNotOptimize(harness::run_fpr_calibration(spec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10);
}

void BM_CalibrationParallel(benchmark::State& state) { calibration(state, true); }
void BM_CalibrationSerial(benchmark::State& state) { calibration(state, false); }

void BM_DeriveSeed(benchmark::State& state) {
  const MasterKey key = MasterKey::from_seed(1);
  std::vector<TokenId> window(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    window[0]++;
    benchmark::DoNotOptimize(derive_seed(key, window, window.size()));
  }
}

}  // namespace

BENCHMARK(BM_ScoreAllMessages)->Arg(16)->Arg(256)->Arg(4096);
BENCHMARK(BM_ScoreAllMessagesSerial)->Arg(16)->Arg(256)->Arg(4096);
BENCHMARK(BM_ScoreAllMessagesNaive)->Arg(16)->Arg(256);
BENCHMARK(BM_CalibrationParallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrationSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeriveSeed)->Arg(1)->Arg(4)->Arg(16);

BENCHMARK_MAIN();

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

#include <string>
#include <vector>

#include <json.hpp>

#include "wmark/detectors.hpp"
#include "wmark/harness.hpp"
#include "wmark/multibit.hpp"
#include "wmark/samplers.hpp"
#include "wmark/types.hpp"

/// JSON records for sequences, reports and experiment results. Parsing
/// failures throw Error(ErrorKind::config).
namespace wmark::jsonio {

using nlohmann::json;

json params_to_json(const SamplerParams& p);
/// Overrides the fields present in `j` on top of `base`.
SamplerParams params_from_json(const json& j, SamplerParams base = {});

/// {"tokens":[...], "prompt_len":n, "vocab_size":V, "params":{...}}
json sequence_record(const TokenSequence& seq, const SamplerParams& params);
TokenSequence sequence_from_record(const json& j, std::size_t default_vocab = 0);

json report_to_json(const DetectionReport& r);
json report_to_json(const IdentificationReport& r);

harness::ExperimentSpec spec_from_json(const json& j);

json to_json(const harness::CalibrationCurve& c);
json to_json(const harness::RobustnessCell& c);
json to_json(const harness::IdentificationCell& c);
json to_json(const harness::H1BoundReport& r);

std::string calibration_csv(const std::vector<harness::CalibrationCurve>& curves);
std::string robustness_csv(const std::vector<harness::RobustnessCell>& cells);
std::string identification_csv(const std::vector<harness::IdentificationCell>& cells);
std::string h1_csv(const std::vector<harness::H1BoundReport>& reports);

/// Runs the experiment named in `spec` and returns its records.
json run_experiment(const harness::ExperimentSpec& spec, std::string* csv = nullptr);

/// Writes `<stem>.jsonl` (one record per line) and `<stem>.csv`.
void write_outputs(const std::string& stem, const json& records,
                   const std::string& csv);

}  // namespace wmark::jsonio

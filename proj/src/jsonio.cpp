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

#include "wmark/jsonio.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace wmark::jsonio {
namespace {

using harness::ExperimentSpec;

template <class T>
T get_as(const json& j, const char* name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::config, std::string("field '") + name + "' has the wrong type");
  }
}

template <class T>
void read(const json& j, const char* name, T& out) {
  if (j.contains(name)) out = get_as<T>(j.at(name), name);
}

template <class T>
std::vector<T> scalar_or_list(const json& v, const char* name) {
  if (v.is_array()) return get_as<std::vector<T>>(v, name);
  return {get_as<T>(v, name)};
}

template <class E, class Parse>
void read_enums(const json& j, const char* name, std::vector<E>& out, Parse parse) {
  if (!j.contains(name)) return;
  out.clear();
  for (const auto& s : scalar_or_list<std::string>(j.at(name), name)) {
    out.push_back(parse(s));
  }
}

json interval(const stats::Interval& i) { return json::array({i.low, i.high}); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

json params_to_json(const SamplerParams& p) {
  json j{{"scheme", to_string(p.scheme)},
         {"h", p.h},
         {"gamma", p.gamma},
         {"delta", p.delta},
         {"temperature", p.temperature},
         {"top_p", p.top_p}};
  if (p.greedy) j["greedy"] = true;
  if (p.num_messages > 1) {
    j["num_messages"] = p.num_messages;
    j["message"] = p.message;
  }
  return j;
}

SamplerParams params_from_json(const json& j, SamplerParams base) {
  if (!j.is_object()) fail(ErrorKind::config, "params must be an object");
  if (j.contains("scheme")) {
    base.scheme = parse_scheme(get_as<std::string>(j.at("scheme"), "scheme"));
  }
  read(j, "h", base.h);
  read(j, "gamma", base.gamma);
  read(j, "delta", base.delta);
  read(j, "temperature", base.temperature);
  read(j, "theta", base.temperature);
  read(j, "top_p", base.top_p);
  read(j, "greedy", base.greedy);
  read(j, "num_messages", base.num_messages);
  read(j, "message", base.message);
  return base;
}

json sequence_record(const TokenSequence& seq, const SamplerParams& params) {
  return json{{"tokens", seq.tokens},
              {"prompt_len", seq.prompt_len},
              {"vocab_size", seq.vocab_size},
              {"params", params_to_json(params)}};
}

TokenSequence sequence_from_record(const json& j, std::size_t default_vocab) {
  if (!j.is_object()) fail(ErrorKind::config, "record is not a JSON object");
  if (!j.contains("tokens") || !j.at("tokens").is_array()) {
    fail(ErrorKind::config, "record has no 'tokens' array");
  }
  TokenSequence s;
  for (const auto& t : j.at("tokens")) {
    if (!t.is_number_integer() || t.get<long long>() < 0 ||
        t.get<std::uint64_t>() > std::numeric_limits<TokenId>::max()) {
      fail(ErrorKind::config, "token ids must be integers in [0, 2^32)");
    }
    s.tokens.push_back(t.get<TokenId>());
  }
  read(j, "prompt_len", s.prompt_len);
  s.vocab_size = default_vocab;
  read(j, "vocab_size", s.vocab_size);
  s.validate();
  return s;
}

json report_to_json(const DetectionReport& r) {
  return json{{"score", r.score},
              {"scored_tokens", r.scored_tokens},
              {"total_tokens", r.total_tokens},
              {"p_value", r.p_value},
              {"test", to_string(r.test)},
              {"dedup", to_string(r.dedup)}};
}

json report_to_json(const IdentificationReport& r) {
  return json{{"best_message", r.best_message},
              {"global_p_value", r.global_pvalue},
              {"p_value", r.per_message_pvalues.empty()
                              ? 1.0
                              : r.per_message_pvalues[r.best_message]},
              {"flagged", r.flagged},
              {"scored_tokens", r.scored_tokens},
              {"total_tokens", r.total_tokens},
              {"scores", r.scores},
              {"per_message_p_values", r.per_message_pvalues}};
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::config, "experiment spec must be an object");
  static const std::set<std::string> known{
      "experiment", "trials", "keys", "text_length", "prompt_length", "params",
      "h", "schemes", "sources", "dedups", "targets", "model", "presets",
      "vocab_size", "model_order", "model_seed", "attack_probability", "fpr",
      "deltas", "temperatures", "message_counts", "fpr_targets", "users",
      "seed", "parallel", "output"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) fail(ErrorKind::config, "unknown spec field '" + k + "'");
  }
  ExperimentSpec s;
  if (j.contains("experiment")) {
    s.experiment = harness::parse_experiment(
        get_as<std::string>(j.at("experiment"), "experiment"));
  }
  read(j, "trials", s.trials);
  if (j.contains("keys")) {
    const json& ks = j.at("keys");
    if (ks.is_number_integer() && ks.get<long long>() >= 0) {
      s.keys = harness::default_keys(ks.get<std::size_t>(), 0);
    } else {
      for (const auto& k : scalar_or_list<json>(ks, "keys")) {
        if (k.is_string()) {
          s.keys.push_back(MasterKey::from_hex(k.get<std::string>()));
        } else if (k.is_number_integer() && k.get<long long>() >= 0) {
          s.keys.push_back(MasterKey::from_seed(k.get<std::uint64_t>()));
        } else {
          fail(ErrorKind::config, "keys must be hex strings or seeds");
        }
      }
    }
  }
  read(j, "text_length", s.text_length);
  read(j, "prompt_length", s.prompt_length);
  if (j.contains("params")) s.params = params_from_json(j.at("params"), s.params);
  if (j.contains("h")) s.h_values = scalar_or_list<std::size_t>(j.at("h"), "h");
  read_enums(j, "schemes", s.schemes, parse_scheme);
  read_enums(j, "sources", s.sources, harness::parse_source);
  read_enums(j, "dedups", s.dedups, parse_dedup);
  if (j.contains("targets")) s.targets = scalar_or_list<double>(j.at("targets"), "targets");
  read(j, "model", s.model);
  if (j.contains("presets")) {
    s.presets = scalar_or_list<std::string>(j.at("presets"), "presets");
  }
  read(j, "vocab_size", s.vocab_size);
  read(j, "model_order", s.model_order);
  read(j, "model_seed", s.model_seed);
  read(j, "attack_probability", s.attack_probability);
  read(j, "fpr", s.fpr);
  if (j.contains("deltas")) s.deltas = scalar_or_list<double>(j.at("deltas"), "deltas");
  if (j.contains("temperatures")) {
    s.temperatures = scalar_or_list<double>(j.at("temperatures"), "temperatures");
  }
  if (j.contains("message_counts")) {
    s.message_counts =
        scalar_or_list<std::size_t>(j.at("message_counts"), "message_counts");
  }
  if (j.contains("fpr_targets")) {
    s.fpr_targets = scalar_or_list<double>(j.at("fpr_targets"), "fpr_targets");
  }
  read(j, "users", s.users);
  read(j, "seed", s.seed);
  read(j, "parallel", s.parallel);
  read(j, "output", s.output);
  if (s.dedups.empty()) fail(ErrorKind::config, "dedups list is empty");
  s.validate();
  return s;
}

json to_json(const harness::CalibrationCurve& c) {
  return json{{"experiment", "fpr_calibration"},
              {"source", harness::to_string(c.source)},
              {"scheme", to_string(c.scheme)},
              {"test", to_string(c.test)},
              {"dedup", to_string(c.dedup)},
              {"h", c.h},
              {"detections", c.detections},
              {"mean_scored_tokens", c.mean_scored_tokens},
              {"thresholds", c.thresholds},
              {"flagged", c.flagged},
              {"empirical", c.empirical},
              {"ci_low", c.ci_low},
              {"ci_high", c.ci_high}};
}

json to_json(const harness::RobustnessCell& c) {
  return json{{"experiment", "robustness"},
              {"scheme", to_string(c.scheme)},
              {"knob", c.knob},
              {"strength", c.strength},
              {"h", c.h},
              {"trials", c.trials},
              {"tpr", c.tpr},
              {"tpr_ci", interval(c.ci)},
              {"tpr_attacked", c.tpr_attacked},
              {"tpr_attacked_ci", interval(c.ci_attacked)}};
}

json to_json(const harness::IdentificationCell& c) {
  return json{{"experiment", "identification"},
              {"scheme", to_string(c.scheme)},
              {"h", c.h},
              {"num_messages", c.num_messages},
              {"fpr_target", c.fpr_target},
              {"texts", c.texts},
              {"flagged", c.flagged},
              {"correct", c.correct},
              {"false_accusations", c.false_accusations},
              {"accuracy", c.accuracy},
              {"accuracy_ci", interval(c.ci)}};
}

json to_json(const harness::H1BoundReport& r) {
  return json{{"experiment", "h1_bounds"},
              {"preset", r.preset},
              {"h", r.h},
              {"trials", r.trials},
              {"mean_scored_tokens", r.mean_scored_tokens},
              {"mean_entropy", r.mean_entropy},
              {"mean_score", r.mean_score},
              {"se_score", r.se_score},
              {"mean_bound", r.mean_bound},
              {"mean_gap", r.mean_gap},
              {"se_gap", r.se_gap},
              {"raw_variance", r.raw_variance},
              {"se_raw_variance", r.se_raw_variance},
              {"conditional_variance", r.conditional_variance},
              {"se_conditional_variance", r.se_conditional_variance},
              {"variance_bound", r.variance_bound},
              {"mean_pass", r.mean_pass},
              {"variance_pass", r.variance_pass}};
}

std::string calibration_csv(const std::vector<harness::CalibrationCurve>& curves) {
  std::ostringstream os;
  os << "source,scheme,test,dedup,h,target,detections,flagged,empirical,ci_low,ci_high\n";
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
      os << harness::to_string(c.source) << ',' << to_string(c.scheme) << ','
         << to_string(c.test) << ',' << to_string(c.dedup) << ',' << c.h << ','
         << fmt(c.thresholds[k]) << ',' << c.detections << ',' << c.flagged[k]
         << ',' << fmt(c.empirical[k]) << ',' << fmt(c.ci_low[k]) << ','
         << fmt(c.ci_high[k]) << '\n';
    }
  }
  return os.str();
}

std::string robustness_csv(const std::vector<harness::RobustnessCell>& cells) {
  std::ostringstream os;
  os << "scheme,knob,strength,h,trials,tpr,tpr_low,tpr_high,tpr_attacked,"
        "attacked_low,attacked_high\n";
  for (const auto& c : cells) {
    os << to_string(c.scheme) << ',' << c.knob << ',' << fmt(c.strength) << ','
       << c.h << ',' << c.trials << ',' << fmt(c.tpr) << ',' << fmt(c.ci.low)
       << ',' << fmt(c.ci.high) << ',' << fmt(c.tpr_attacked) << ','
       << fmt(c.ci_attacked.low) << ',' << fmt(c.ci_attacked.high) << '\n';
  }
  return os.str();
}

std::string identification_csv(const std::vector<harness::IdentificationCell>& cells) {
  std::ostringstream os;
  os << "scheme,h,num_messages,fpr_target,texts,flagged,correct,"
        "false_accusations,accuracy,ci_low,ci_high\n";
  for (const auto& c : cells) {
    os << to_string(c.scheme) << ',' << c.h << ',' << c.num_messages << ','
       << fmt(c.fpr_target) << ',' << c.texts << ',' << c.flagged << ','
       << c.correct << ',' << c.false_accusations << ',' << fmt(c.accuracy)
       << ',' << fmt(c.ci.low) << ',' << fmt(c.ci.high) << '\n';
  }
  return os.str();
}

std::string h1_csv(const std::vector<harness::H1BoundReport>& reports) {
  std::ostringstream os;
  os << "preset,h,trials,mean_scored_tokens,mean_score,mean_bound,mean_gap,se_gap,"
        "raw_variance,conditional_variance,se_conditional_variance,variance_bound,"
        "mean_pass,variance_pass\n";
  for (const auto& r : reports) {
    os << r.preset << ',' << r.h << ',' << r.trials << ','
       << fmt(r.mean_scored_tokens) << ',' << fmt(r.mean_score) << ','
       << fmt(r.mean_bound) << ',' << fmt(r.mean_gap) << ',' << fmt(r.se_gap)
       << ',' << fmt(r.raw_variance) << ',' << fmt(r.conditional_variance) << ','
       << fmt(r.se_conditional_variance) << ',' << fmt(r.variance_bound) << ','
       << r.mean_pass << ',' << r.variance_pass << '\n';
  }
  return os.str();
}

json run_experiment(const harness::ExperimentSpec& spec, std::string* csv) {
  json records = json::array();
  auto emit = [&](const auto& rows, auto to_csv) {
    for (const auto& r : rows) records.push_back(to_json(r));
    if (csv) *csv = to_csv(rows);
  };
  switch (spec.experiment) {
    case harness::ExperimentKind::fpr_calibration:
      emit(harness::run_fpr_calibration(spec), calibration_csv);
      break;
    case harness::ExperimentKind::robustness:
      emit(harness::run_robustness(spec), robustness_csv);
      break;
    case harness::ExperimentKind::identification:
      emit(harness::run_identification(spec), identification_csv);
      break;
    case harness::ExperimentKind::h1_bounds:
      emit(harness::run_h1_bounds(spec), h1_csv);
      break;
  }
  return records;
}

void write_outputs(const std::string& stem, const json& records,
                   const std::string& csv) {
  std::ofstream jl(stem + ".jsonl");
  if (!jl) fail(ErrorKind::io, "cannot write " + stem + ".jsonl");
  for (const auto& r : records) jl << r.dump() << '\n';
  std::ofstream cs(stem + ".csv");
  if (!cs) fail(ErrorKind::io, "cannot write " + stem + ".csv");
  cs << csv;
  if (!jl || !cs) fail(ErrorKind::io, "write failed for " + stem);
}

}  // namespace wmark::jsonio

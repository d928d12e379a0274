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

// wmark: generate, detect and identify watermarked token sequences, and run
// the calibration experiments.
//
// Exit status: 0 ok, 1 usage, 2 data, 3 provider.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmark/detectors.hpp"
#include "wmark/harness.hpp"
#include "wmark/jsonio.hpp"
#include "wmark/keying.hpp"
#include "wmark/multibit.hpp"
#include "wmark/provider.hpp"
#include "wmark/rng.hpp"
#include "wmark/samplers.hpp"
#include "wmark/toylm.hpp"

namespace {

using nlohmann::json;
using namespace wmark;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::usage:
    case ErrorKind::config:
      return kExitUsage;
    case ErrorKind::provider:
      return kExitProvider;
    default:
      return kExitData;
  }
}

// ---------------------------------------------------------------------------
// Shared flags

struct ParamFlags {
  std::string scheme = "exponential";
  std::string key_hex;
  std::size_t h = 1;
  double gamma = 0.25;
  double delta = 2.0;
  double theta = 1.0;
  double top_p = 1.0;
  std::size_t message = 0;
  std::size_t num_messages = 1;

  CLI::Option* scheme_opt = nullptr;
  CLI::Option* h_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* top_p_opt = nullptr;
  CLI::Option* message_opt = nullptr;
  CLI::Option* num_messages_opt = nullptr;

  void add(CLI::App& app, bool with_message) {
    scheme_opt = app.add_option("--scheme", scheme, "vanilla | greenlist | exponential")
                     ->check(CLI::IsMember({"vanilla", "greenlist", "exponential"}));
    app.add_option("--key", key_hex, "master key, 64 hex chars (default: $WMARK_KEY)");
    h_opt = app.add_option("--h", h, "context window width");
    gamma_opt = app.add_option("--gamma", gamma, "greenlist fraction");
    delta_opt = app.add_option("--delta", delta, "greenlist logit boost");
    theta_opt = app.add_option("--theta", theta, "sampling temperature");
    top_p_opt = app.add_option("--top-p", top_p, "nucleus mass");
    if (with_message) {
      message_opt = app.add_option("--message", message, "embedded message id");
      num_messages_opt =
          app.add_option("--num-messages", num_messages, "number of messages M");
    }
  }

  // Record params first, explicit flags on top.
  SamplerParams resolve(const SamplerParams& base) const {
    SamplerParams p = base;
    if (scheme_opt && scheme_opt->count()) p.scheme = parse_scheme(scheme);
    if (h_opt->count()) p.h = h;
    if (gamma_opt->count()) p.gamma = gamma;
    if (delta_opt->count()) p.delta = delta;
    if (theta_opt->count()) p.temperature = theta;
    if (top_p_opt->count()) p.top_p = top_p;
    return p;
  }

  SamplerParams defaults() const {
    SamplerParams p;
    p.scheme = parse_scheme(scheme);
    p.h = h;
    p.gamma = gamma;
    p.delta = delta;
    p.temperature = theta;
    p.top_p = top_p;
    return p;
  }

  std::optional<MasterKey> key() const {
    std::string hex = key_hex;
    if (hex.empty()) {
      if (const char* env = std::getenv("WMARK_KEY")) hex = env;
    }
    if (hex.empty()) return std::nullopt;
    return MasterKey::from_hex(hex);
  }

  MasterKey require_key() const {
    auto k = key();
    if (!k) throw UsageError("a master key is required (--key or WMARK_KEY)");
    return *k;
  }
};

struct ModelFlags {
  std::string spec;
  std::size_t vocab = 64;
  std::size_t order = 3;
  std::uint64_t seed = 0;
  int timeout_ms = 30000;

  void add(CLI::App& app, const std::string& default_spec) {
    spec = default_spec;
    app.add_option("--model", spec, "toy:<low|medium|high|uniform> or provider:<command>");
    app.add_option("--vocab", vocab, "toy vocabulary size")->check(CLI::Range(2, 1 << 20));
    app.add_option("--order", order, "toy Markov order");
    app.add_option("--model-seed", seed, "toy model seed");
    app.add_option("--provider-timeout", timeout_ms, "provider timeout in ms")
        ->check(CLI::PositiveNumber);
  }

  bool present() const { return !spec.empty(); }
  bool is_provider() const { return spec.rfind("provider:", 0) == 0; }

  std::unique_ptr<LogitSource> make() const {
    if (spec.rfind("toy:", 0) == 0) {
      return std::make_unique<ToyModel>(ToyModel::preset(spec.substr(4), seed, vocab, order));
    }
    if (is_provider()) {
      const std::string cmd = spec.substr(9);
      if (cmd.empty()) throw UsageError("provider: needs a command");
      return std::make_unique<SubprocessProvider>(
          cmd, ProviderOptions{std::chrono::milliseconds(timeout_ms)});
    }
    throw UsageError("--model must be toy:<preset> or provider:<command>");
  }
};

struct IoFlags {
  std::string in = "-";
  std::string out = "-";

  void add(CLI::App& app) {
    app.add_option("--in", in, "input JSONL ('-' for stdin)");
    app.add_option("--out", out, "output JSONL ('-' for stdout)");
  }
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream file;
  std::istream* is = &std::cin;
  if (path != "-") {
    file.open(path);
    if (!file) fail(ErrorKind::io, "cannot open " + path);
    is = &file;
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(*is, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) fail(ErrorKind::io, "cannot write " + path);
    }
  }
  void line(const json& j) {
    stream() << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

json error_object(std::size_t record, const std::string& kind, const std::string& msg) {
  return json{{"record", record}, {"error", {{"kind", kind}, {"message", msg}}}};
}

// Applies fn to every record, in parallel unless `serial`; output keeps input
// order and a failing record yields an error object.
template <class Fn>
void for_each_record(const std::vector<std::string>& lines, bool serial,
                     Output& out, Fn fn) {
  std::vector<json> results(lines.size());
  std::optional<Error> provider_error;
#pragma omp parallel for schedule(dynamic) if (!serial)
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      const json rec = json::parse(lines[i], nullptr, false);
      if (rec.is_discarded()) {
        results[i] = error_object(i, "config", "malformed JSON");
        continue;
      }
      results[i] = fn(rec);
      results[i]["record"] = i;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::provider) {
#pragma omp critical(wmark_cli_provider)
        if (!provider_error) provider_error = e;
      }
      results[i] = error_object(i, std::string(to_string(e.kind())), e.what());
    } catch (const std::exception& e) {
      results[i] = error_object(i, "data", e.what());
    }
  }
  for (const auto& r : results) out.line(r);
  if (provider_error) throw *provider_error;
}

// ---------------------------------------------------------------------------
// Prompts

std::vector<TokenSequence> load_prompts(const std::string& file,
                                        const std::string& text,
                                        std::size_t vocab) {
  std::vector<TokenSequence> prompts;
  auto text_prompt = [&](const std::string& s) {
    if (vocab < 256) throw UsageError("text prompts need a vocabulary of at least 256");
    TokenSequence p;
    p.vocab_size = vocab;
    for (unsigned char c : s) p.tokens.push_back(c);
    p.prompt_len = p.tokens.size();
    return p;
  };
  if (!text.empty()) prompts.push_back(text_prompt(text));
  if (!file.empty()) {
    for (const auto& line : read_lines(file)) {
      const json j = json::parse(line, nullptr, false);
      TokenSequence p;
      if (j.is_discarded()) {
        prompts.push_back(text_prompt(line));
        continue;
      }
      if (j.is_array()) {
        p = jsonio::sequence_from_record(json{{"tokens", j}}, vocab);
      } else {
        p = jsonio::sequence_from_record(j, vocab);
      }
      if (p.vocab_size != vocab) {
        fail(ErrorKind::config, "prompt vocabulary differs from the model's");
      }
      p.prompt_len = p.tokens.size();
      prompts.push_back(std::move(p));
    }
  }
  if (prompts.empty()) {
    TokenSequence p;
    p.vocab_size = vocab;
    prompts.push_back(p);
  }
  return prompts;
}

std::string decode_bytes(const TokenSequence& s) {
  std::string out;
  for (TokenId t : s.tokens) out.push_back(static_cast<char>(t & 0xff));
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct GenerateCmd {
  ParamFlags params;
  ModelFlags model;
  std::size_t length = 256;
  std::string prompt_file;
  std::string prompt_text;
  std::string out = "-";
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t prompt_length = 0;
  bool greedy = false;
  bool text = false;

  void add(CLI::App& app) {
    params.add(app, true);
    model.add(app, "toy:medium");
    app.add_option("--length", length, "tokens to generate")->check(CLI::PositiveNumber);
    app.add_option("--prompt-file", prompt_file,
                   "prompts, one per line: JSON id array, record, or raw text");
    app.add_option("--prompt-text", prompt_text, "prompt as bytes (ids 0-255)");
    app.add_option("--out", out, "output JSONL ('-' for stdout)");
    app.add_option("--seed", seed, "sampling seed");
    app.add_option("--count", count, "records per prompt")->check(CLI::PositiveNumber);
    app.add_option("--prompt-length", prompt_length,
                   "random uniform prompt of this many tokens per record, "
                   "drawn from the record seed (when no prompt is given)");
    app.add_flag("--greedy", greedy, "argmax decoding for vanilla/greenlist");
    app.add_flag("--text", text, "add a byte-decoded 'text' field");
  }

  int run() {
    if (params.message_opt->count() && !params.num_messages_opt->count()) {
      throw UsageError("--message requires --num-messages");
    }
    if (params.num_messages_opt->count() && params.num_messages < 1) {
      throw UsageError("--num-messages must be >= 1");
    }
    if (params.message >= params.num_messages) {
      throw UsageError("--message must be below --num-messages");
    }
    SamplerParams p = params.defaults();
    p.greedy = greedy;
    p.num_messages = params.num_messages;
    p.message = params.message;
    p.validate();
    const MasterKey key =
        p.scheme == Scheme::vanilla ? params.key().value_or(MasterKey{}) : params.require_key();

    std::unique_ptr<LogitSource> first = model.make();
    const std::size_t vocab = first->vocab_size();
    const std::vector<TokenSequence> prompts = load_prompts(prompt_file, prompt_text, vocab);
    const std::size_t n = prompts.size() * count;
    std::vector<json> records(n);
    const bool serial = model.is_provider();
    std::optional<Error> failure;

#pragma omp parallel if (!serial)
    {
      std::unique_ptr<LogitSource> local;
#pragma omp for schedule(dynamic)
      for (std::size_t i = 0; i < n; ++i) {
        try {
          LogitSource* m = first.get();
          if (!serial) {
            if (!local) local = model.make();
            m = local.get();
          }
          const std::uint64_t s = count == 1 && prompts.size() == 1 ? seed : split_seed(seed, i);
          TokenSequence prompt = prompts[i / count];
          if (prompt.tokens.empty() && prompt_length > 0) {
            auto rng = Xoshiro256ss::from_seed(split_seed(s, 0x70726f6d7074ULL));
            for (std::size_t k = 0; k < prompt_length; ++k) {
              prompt.tokens.push_back(static_cast<TokenId>(rng() % vocab));
            }
            prompt.prompt_len = prompt_length;
          }
          const TokenSequence seq = generate(*m, p, key, prompt, length, s);
          json rec = jsonio::sequence_record(seq, p);
          rec["seed"] = s;
          if (text) rec["text"] = decode_bytes(seq);
          records[i] = std::move(rec);
        } catch (const Error& e) {
#pragma omp critical(wmark_generate_fail)
          if (!failure) failure = e;
        }
      }
    }
    if (failure) throw *failure;
    Output o(out);
    for (const auto& r : records) o.line(r);
    return kExitOk;
  }
};

struct DetectCmd {
  ParamFlags params;
  ModelFlags model;
  IoFlags io;
  std::string test;
  std::string dedup = "tuple";

  void add(CLI::App& app) {
    params.add(app, false);
    model.add(app, "");
    io.add(app);
    app.add_option("--test", test, "binomial | gamma | ztest | np | simplified (default: exact test of the scheme)")
        ->check(CLI::IsMember({"binomial", "gamma", "ztest", "np", "simplified"}));
    app.add_option("--dedup", dedup, "tuple | context | off")
        ->check(CLI::IsMember({"tuple", "context", "off"}));
  }

  int run() {
    if (test == "np" && !model.present()) {
      throw UsageError(
          "the np test needs model access to recompute token probabilities; pass --model");
    }
    const MasterKey key = params.require_key();
    const DedupRule rule = parse_dedup(dedup);
    const std::vector<std::string> lines = read_lines(io.in);
    Output out(io.out);
    const bool serial = model.present() && model.is_provider();
    std::unique_ptr<LogitSource> shared = serial ? model.make() : nullptr;

    for_each_record(lines, serial, out, [&](const json& rec) {
      SamplerParams base = params.defaults();
      if (rec.contains("params")) base = jsonio::params_from_json(rec.at("params"), base);
      DetectConfig cfg;
      cfg.params = params.resolve(base);
      cfg.params.num_messages = 1;
      cfg.params.message = 0;
      cfg.dedup = rule;
      cfg.test = test.empty() ? (cfg.params.scheme == Scheme::greenlist ? TestKind::binomial
                                                                        : TestKind::gamma)
                              : parse_test(test);
      std::unique_ptr<LogitSource> local;
      LogitSource* m = shared.get();
      if (model.present() && !serial) {
        local = model.make();
        m = local.get();
      }
      const std::size_t vocab = m ? m->vocab_size() : 0;
      const TokenSequence seq = jsonio::sequence_from_record(rec, vocab);
      json rep = jsonio::report_to_json(detect(seq, key, cfg, m));
      rep["scheme"] = to_string(cfg.params.scheme);
      rep["h"] = cfg.params.h;
      return rep;
    });
    return kExitOk;
  }
};

struct IdentifyCmd {
  ParamFlags params;
  IoFlags io;
  std::size_t num_messages = 0;
  double fpr = 1e-3;
  std::string dedup = "tuple";

  void add(CLI::App& app) {
    params.add(app, false);
    io.add(app);
    app.add_option("--num-messages", num_messages, "number of candidate messages M")
        ->required();
    app.add_option("--fpr", fpr, "global false-positive target")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--dedup", dedup, "tuple | context | off")
        ->check(CLI::IsMember({"tuple", "context", "off"}));
  }

  int run() {
    if (num_messages < 1) throw UsageError("--num-messages must be >= 1");
    const MasterKey key = params.require_key();
    const DedupRule rule = parse_dedup(dedup);
    const std::vector<std::string> lines = read_lines(io.in);
    Output out(io.out);
    for_each_record(lines, false, out, [&](const json& rec) {
      SamplerParams base = params.defaults();
      if (rec.contains("params")) base = jsonio::params_from_json(rec.at("params"), base);
      SamplerParams p = params.resolve(base);
      p.message = 0;
      // The secret-vector dimension d = max(M, |V|) must match generation,
      // so the record's own message count takes precedence.
      const bool recorded =
          rec.contains("params") && rec.at("params").contains("num_messages");
      p.num_messages = recorded ? base.num_messages : num_messages;
      const TokenSequence seq = jsonio::sequence_from_record(rec);
      const MessageScores ms = score_all_messages_serial(seq, key, p, rule);
      json rep = jsonio::report_to_json(
          identify_from_scores(ms, num_messages, p.scheme, p.gamma, fpr));
      rep["num_messages"] = num_messages;
      return rep;
    });
    return kExitOk;
  }
};

struct ExperimentCmd {
  std::string spec_path;
  std::string output;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  bool serial = false;
  bool quiet = false;

  void add(CLI::App& app) {
    app.add_option("--spec", spec_path, "experiment spec (JSON)")->required();
    app.add_option("--output", output, "output stem: writes <stem>.jsonl and <stem>.csv");
    app.add_option("--trials", trials, "override the spec's trial count");
    app.add_option("--seed", seed, "override the spec's seed");
    app.add_flag("--serial", serial, "run trials on one thread");
    app.add_flag("--quiet", quiet, "do not echo records to stdout");
  }

  int run() {
    std::ifstream f(spec_path);
    if (!f) fail(ErrorKind::io, "cannot open " + spec_path);
    const json j = json::parse(f, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::config, "spec is not valid JSON");
    harness::ExperimentSpec spec = jsonio::spec_from_json(j);
    if (trials) spec.trials = *trials;
    if (seed) spec.seed = *seed;
    if (serial) spec.parallel = false;
    if (!output.empty()) spec.output = output;
    spec.validate();
    std::string csv;
    const json records = jsonio::run_experiment(spec, &csv);
    if (!spec.output.empty()) jsonio::write_outputs(spec.output, records, csv);
    if (!quiet) {
      for (const auto& r : records) std::cout << r.dump() << '\n';
    }
    return kExitOk;
  }
};

struct KeygenCmd {
  std::optional<std::uint64_t> seed;

  void add(CLI::App& app) {
    app.add_option("--seed", seed, "derive a reproducible test key from a seed");
  }

  int run() {
    if (seed) {
      std::cout << MasterKey::from_seed(*seed).to_hex() << '\n';
      return kExitOk;
    }
    std::random_device rd;
    std::array<std::uint8_t, MasterKey::kSize> bytes{};
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rd() & 0xff);
    std::cout << MasterKey(bytes).to_hex() << '\n';
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical watermarking for token sequences"};
  // -h would collide with the window-width flag --h.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  GenerateCmd gen;
  DetectCmd det;
  IdentifyCmd ide;
  ExperimentCmd exp;
  KeygenCmd kg;
  auto sub = [&](const char* name, const char* desc) -> CLI::App& {
    CLI::App* s = app.add_subcommand(name, desc);
    s->set_help_flag("--help", "Print this help message and exit");
    return *s;
  };
  gen.add(sub("generate", "generate (watermarked) token sequences"));
  det.add(sub("detect", "score records and report p-values"));
  ide.add(sub("identify", "decode the embedded message of each record"));
  exp.add(sub("experiment", "run a calibration/robustness/identification/h1 experiment"));
  kg.add(sub("keygen", "print a fresh master key"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("generate")) return gen.run();
    if (app.got_subcommand("detect")) return det.run();
    if (app.got_subcommand("identify")) return ide.run();
    if (app.got_subcommand("experiment")) return exp.run();
    if (app.got_subcommand("keygen")) return kg.run();
  } catch (const UsageError& e) {
    std::cerr << "wmark: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "wmark: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "wmark: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

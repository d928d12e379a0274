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

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "wmark/jsonio.hpp"
#include "wmark/provider.hpp"
#include "wmark/toylm.hpp"

using namespace wmark;
using jsonio::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::io;
}

std::string echo(const std::string& args) {
  return std::string(WMARK_ECHO_PROVIDER) + " " + args;
}

}  // namespace

TEST_CASE("sequence records round trip") {
  SamplerParams p;
  p.scheme = Scheme::greenlist;
  p.h = 3;
  p.delta = 1.5;
  p.num_messages = 16;
  p.message = 3;
  const TokenSequence seq{{1, 2, 3, 40}, 64, 2};
  const json rec = jsonio::sequence_record(seq, p);
  const TokenSequence back = jsonio::sequence_from_record(json::parse(rec.dump()));
  CHECK(back.tokens == seq.tokens);
  CHECK(back.prompt_len == 2);
  CHECK(back.vocab_size == 64);
  const SamplerParams q = jsonio::params_from_json(rec.at("params"));
  CHECK(q.scheme == Scheme::greenlist);
  CHECK(q.h == 3);
  CHECK(q.delta == 1.5);
  CHECK(q.num_messages == 16);
  CHECK(q.message == 3);
  CHECK(jsonio::params_from_json(json{{"theta", 0.7}}).temperature == 0.7);
}

TEST_CASE("malformed records are config errors") {
  CHECK(kind_of([] { jsonio::sequence_from_record(json::array()); }) == ErrorKind::config);
  CHECK(kind_of([] { jsonio::sequence_from_record(json{{"tokens", 3}}); }) == ErrorKind::config);
  CHECK(kind_of([] {
          jsonio::sequence_from_record(json{{"tokens", {1, -2}}, {"vocab_size", 8}});
        }) == ErrorKind::config);
  CHECK(kind_of([] {
          jsonio::sequence_from_record(json{{"tokens", {1, 5000000000ULL}}, {"vocab_size", 8}});
        }) == ErrorKind::config);
  // Token outside the declared vocabulary.
  CHECK_THROWS_AS(jsonio::sequence_from_record(json{{"tokens", {1, 9}}, {"vocab_size", 8}}),
                  Error);
}

TEST_CASE("experiment specs") {
  const json j = json::parse(R"({
      "experiment": "robustness", "trials": 12, "keys": ["00000000000000000000000000000000000000000000000000000000000000ff", 5],
      "h": 2, "schemes": "greenlist", "deltas": [1, 3], "params": {"gamma": 0.5}})");
  const auto s = jsonio::spec_from_json(j);
  CHECK(s.experiment == harness::ExperimentKind::robustness);
  CHECK(s.trials == 12);
  CHECK(s.keys.size() == 2);
  CHECK(s.keys[1] == MasterKey::from_seed(5));
  CHECK(s.h_values == std::vector<std::size_t>{2});
  CHECK(s.schemes == std::vector<Scheme>{Scheme::greenlist});
  CHECK(s.params.gamma == 0.5);
  CHECK(jsonio::spec_from_json(json{{"keys", 4}}).keys.size() == 4);
  CHECK(kind_of([] { jsonio::spec_from_json(json{{"trails", 3}}); }) == ErrorKind::config);
  CHECK(kind_of([] { jsonio::spec_from_json(json{{"trials", "many"}}); }) == ErrorKind::config);

  harness::ExperimentSpec small = s;
  small.trials = 3;
  small.text_length = 20;
  std::string csv;
  const json out = jsonio::run_experiment(small, &csv);
  CHECK(out.size() == 2);
  CHECK(csv.find("delta") != std::string::npos);
}

TEST_CASE("provider protocol parsing") {
  CHECK(parse_handshake(R"({"v":1,"vocab_size":5})") == 5);
  CHECK(kind_of([] { parse_handshake(R"({"v":2,"vocab_size":5})"); }) == ErrorKind::provider);
  CHECK(kind_of([] { parse_handshake(R"({"v":1,"logits":[]})"); }) == ErrorKind::provider);
  CHECK(kind_of([] { parse_handshake("{oops"); }) == ErrorKind::provider);

  const std::vector<TokenId> ctx{3, 1, 4};
  CHECK(encode_request(ctx) == "{\"context\":[3,1,4],\"v\":1}\n");

  const auto l = parse_logits_response(R"({"v":1,"logits":[0.5,null,-2]})", 3);
  CHECK(l[0] == 0.5);
  CHECK(std::isinf(l[1]));
  CHECK(l[2] == -2.0);
  CHECK(kind_of([] { parse_logits_response(R"({"v":1,"logits":[0.5]})", 3); }) ==
        ErrorKind::provider);
  CHECK(kind_of([] { parse_logits_response(R"({"v":1,"logits":["a","b"]})", 2); }) ==
        ErrorKind::provider);
}

TEST_CASE("uniform echo provider matches the uniform toy model") {
  SubprocessProvider provider(echo("--vocab 16"));
  CHECK(provider.vocab_size() == 16);
  const std::vector<TokenId> ctx{1, 2};
  const LogitVector lv = logit_provider_roundtrip(provider, ctx);
  CHECK(lv.logits == std::vector<double>(16, 0.0));

  ToyModel toy = ToyModel::preset("uniform", 0, 16);
  SamplerParams p;
  p.h = 2;
  const TokenSequence prompt{{1, 2}, 16, 2};
  const MasterKey key = MasterKey::from_seed(8);
  for (Scheme s : {Scheme::exponential, Scheme::greenlist, Scheme::vanilla}) {
    p.scheme = s;
    CHECK(generate(provider, p, key, prompt, 30, 4).tokens ==
          generate(toy, p, key, prompt, 30, 4).tokens);
  }
}

TEST_CASE("provider failures") {
  {
    SubprocessProvider bad(echo("--vocab 8 --mode bad-length"));
    const std::vector<TokenId> ctx{1};
    try {
      bad.next_logits(ctx);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::provider);
      CHECK(std::string(e.what()).find("length mismatch") != std::string::npos);
    }
  }
  {
    SubprocessProvider garbage(echo("--mode garbage"));
    const std::vector<TokenId> ctx{1};
    CHECK(kind_of([&] { garbage.next_logits(ctx); }) == ErrorKind::provider);
  }
  const auto start = std::chrono::steady_clock::now();
  CHECK(kind_of([] {
          SubprocessProvider p(echo("--mode no-handshake"),
                               ProviderOptions{std::chrono::milliseconds(300)});
        }) == ErrorKind::provider);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
  CHECK(kind_of([] { SubprocessProvider p("exit 3"); }) == ErrorKind::provider);
  CHECK(kind_of([] { SubprocessProvider p("/nonexistent/provider"); }) == ErrorKind::provider);
}

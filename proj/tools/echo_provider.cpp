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

// Reference logit provider: answers every request with uniform logits.
//
//   echo_provider [--vocab N] [--mode uniform|bad-length|no-handshake|garbage]
//
// The non-uniform modes exist to exercise the client's protocol checks.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

int main(int argc, char** argv) {
  CLI::App app{"uniform-logit provider speaking the wmark JSONL protocol"};
  std::size_t vocab = 64;
  std::string mode = "uniform";
  app.add_option("--vocab", vocab, "vocabulary size")->check(CLI::Range(2, 1 << 24));
  app.add_option("--mode", mode, "behaviour")
      ->check(CLI::IsMember({"uniform", "bad-length", "no-handshake", "garbage"}));
  CLI11_PARSE(app, argc, argv);

  using nlohmann::json;
  std::ios::sync_with_stdio(false);
  if (mode != "no-handshake") {
    std::cout << json{{"v", 1}, {"vocab_size", vocab}}.dump() << std::endl;
  }
  const std::size_t n = mode == "bad-length" ? vocab - 1 : vocab;
  const std::string reply = json{{"v", 1}, {"logits", std::vector<double>(n, 0.0)}}.dump();

  std::string line;
  while (std::getline(std::cin, line)) {
    const json req = json::parse(line, nullptr, false);
    if (req.is_discarded() || !req.contains("context")) {
      std::cerr << "echo_provider: bad request\n";
      return 2;
    }
    if (mode == "garbage") {
      std::cout << "{not json" << std::endl;
    } else {
      std::cout << reply << std::endl;
    }
  }
  return 0;
}

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

#include "wmark/toylm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wmark/rng.hpp"

namespace wmark {
namespace {

class GammaSampler {
 public:
  GammaSampler(Xoshiro256ss& rng, double d, double c) noexcept
      : rng_(rng), d_(d), c_(c) {}

  // log of a Gamma(d + 1/3, 1) variate (Marsaglia-Tsang).
  double log_variate() noexcept {
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c_ * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = unit_open(rng_());
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2 ||
          std::log(u) < 0.5 * x2 + d_ * (1.0 - v + std::log(v))) {
        return std::log(d_) + std::log(v);
      }
    }
  }

  double uniform() noexcept { return unit_open(rng_()); }

 private:
  // Marsaglia polar method, second value cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * unit_closed_open(rng_()) - 1.0;
      v = 2.0 * unit_closed_open(rng_()) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  Xoshiro256ss& rng_;
  double d_;
  double c_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

ToyModel::ToyModel(const ToyModelConfig& config) : config_(config) {
  if (config_.vocab_size < 2) fail(ErrorKind::config, "toy vocab must be >= 2");
  if (!(config_.alpha > 0.0)) fail(ErrorKind::config, "alpha must be > 0");
  if (std::isfinite(config_.alpha)) {
    const double shape = config_.alpha < 1.0 ? config_.alpha + 1.0
                                             : config_.alpha;
    mt_d_ = shape - 1.0 / 3.0;
    mt_c_ = 1.0 / std::sqrt(9.0 * mt_d_);
  }
}

double ToyModel::preset_alpha(std::string_view name) {
  if (name == "low") return 0.05;
  if (name == "medium") return 0.5;
  if (name == "high") return 5.0;
  if (name == "uniform") return std::numeric_limits<double>::infinity();
  fail(ErrorKind::config, "unknown toy preset '" + std::string(name) + "'");
}

ToyModel ToyModel::preset(std::string_view name, std::uint64_t seed,
                          std::size_t vocab_size, std::size_t order) {
  const double alpha = preset_alpha(name);
  return ToyModel(ToyModelConfig{std::isfinite(alpha) ? order : 0,
                                 vocab_size, alpha, seed});
}

std::uint64_t ToyModel::row_seed(
    std::span<const TokenId> context) const noexcept {
  const std::size_t used = std::min(config_.order, context.size());
  std::uint64_t h = split_seed(config_.seed, used);
  for (TokenId t : context.last(used)) h = split_seed(h, t);
  return h;
}

LogitVector ToyModel::next_distribution(
    std::span<const TokenId> context) const {
  const std::size_t n = config_.vocab_size;
  LogitVector out;
  out.logits.assign(n, 0.0);
  if (!std::isfinite(config_.alpha)) {
    const double lp = -std::log(static_cast<double>(n));
    std::fill(out.logits.begin(), out.logits.end(), lp);
    return out;
  }

  auto rng = Xoshiro256ss::from_seed(row_seed(context));
  GammaSampler gamma(rng, mt_d_, mt_c_);
  const bool boost = config_.alpha < 1.0;
  double max_log = -std::numeric_limits<double>::infinity();
  for (double& x : out.logits) {
    x = gamma.log_variate();
    // Gamma(a) = Gamma(a + 1) * U^(1/a) for a < 1, kept in log space.
    if (boost) x += std::log(gamma.uniform()) / config_.alpha;
    max_log = std::max(max_log, x);
  }
  double sum = 0.0;
  for (double x : out.logits) sum += std::exp(x - max_log);
  const double log_norm = max_log + std::log(sum);
  for (double& x : out.logits) x -= log_norm;
  return out;
}

double entropy_of_completion(std::span<const double> realized_probs) {
  double h = 0.0;
  for (double p : realized_probs) {
    if (p > 0.0 && p < 1.0) h -= p * std::log(p);
  }
  return h;
}

double entropy_of_completion(LogitSource& model, const TokenSequence& seq,
                             double temperature, double top_p) {
  std::vector<double> realized;
  realized.reserve(seq.size() - seq.prompt_len);
  const std::span<const TokenId> tokens = seq.tokens;
  for (std::size_t pos = seq.prompt_len; pos < seq.size(); ++pos) {
    const LogitVector lv{model.next_logits(tokens.first(pos)), temperature,
                         top_p};
    realized.push_back(softmax_with_nucleus(lv)[tokens[pos]]);
  }
  return entropy_of_completion(realized);
}

}  // namespace wmark

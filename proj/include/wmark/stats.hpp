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
#include <functional>
#include <span>
#include <vector>

namespace wmark::stats {

struct Interval {
  double low = 0.0;
  double high = 1.0;

  bool contains(double x) const noexcept { return low <= x && x <= high; }
};

/// Inverse of x -> I_x(a,b) by bisection.
double beta_quantile(double q, double a, double b);

/// Exact (Clopper-Pearson) two-sided interval for k successes in n trials.
Interval clopper_pearson(std::uint64_t k, std::uint64_t n,
                         double confidence = 0.95);

/// sup |F_n - F| for the given continuous CDF. Sorts a copy of `samples`.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov tail probability with Stephens' small-n
/// correction.
double ks_pvalue(double statistic, std::size_t n);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;     // unbiased
  double se_mean = 0.0;
  double se_variance = 0.0;  // large-sample standard error of `variance`
  std::size_t n = 0;
};

Moments moments(std::span<const double> xs);

}  // namespace wmark::stats

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

#include "wmark/stats.hpp"

#include <algorithm>
#include <cmath>

#include "wmark/error.hpp"
#include "wmark/statfun.hpp"

namespace wmark::stats {

double beta_quantile(double q, double a, double b) {
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorKind::domain, "quantile outside [0,1]");
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (statfun::reg_inc_beta(mid, a, b) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence) {
  if (n == 0 || k > n) fail(ErrorKind::domain, "need 0 <= k <= n, n >= 1");
  const double alpha = 1.0 - confidence;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  Interval ci;
  ci.low = k == 0 ? 0.0 : beta_quantile(alpha / 2, kd, nd - kd + 1);
  ci.high = k == n ? 1.0 : beta_quantile(1 - alpha / 2, kd + 1, nd - kd);
  return ci;
}

double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf) {
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = xs.size();
  if (m.n < 2) fail(ErrorKind::insufficient_data, "need at least 2 samples");
  const double n = static_cast<double>(m.n);
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double dx = x - m.mean;
    m2 += dx * dx;
    m4 += dx * dx * dx * dx;
  }
  m.variance = m2 / (n - 1.0);
  m.se_mean = std::sqrt(m.variance / n);
  const double mu2 = m2 / n;
  const double mu4 = m4 / n;
  m.se_variance = std::sqrt(std::max(0.0, (mu4 - mu2 * mu2) / n));
  return m;
}

}  // namespace wmark::stats

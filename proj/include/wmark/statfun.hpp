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

#include "wmark/types.hpp"

/// Special functions behind the exact p-values. All results are clamped into
/// [0,1]; domain violations throw Error(ErrorKind::domain).
namespace wmark::statfun {

/// Regularized incomplete beta I_x(a,b), 0 <= x <= 1, a,b > 0.
Probability reg_inc_beta(double x, double a, double b);

/// Regularized upper incomplete gamma Q(a,s) = Gamma(a,s)/Gamma(a).
Probability reg_upper_gamma(double a, double s);

/// Regularized lower incomplete gamma P(a,s) = 1 - Q(a,s). Computed on
/// whichever side keeps relative accuracy for small results.
Probability reg_lower_gamma(double a, double s);

/// Standard normal survival function 1 - Phi(z).
Probability normal_sf(double z);

/// ln Gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2], z > 0.
double stirling_correction(double z);

/// log1p(u) - u without cancellation for small |u|.
double log1pmx(double u);

/// Digamma psi(z), z > 0.
double digamma(double z);

/// Harmonic number H_z = psi(z + 1) + Euler's constant, z >= 0.
double harmonic(double z);

}  // namespace wmark::statfun

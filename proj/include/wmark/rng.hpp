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

#include <array>
#include <bit>
#include <cstdint>
#include <limits>

namespace wmark {

/// splitmix64 (Steele, Lea, Flood). Used to expand a 64-bit seed into
/// generator state and to split seeds into independent streams.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept {
    return std::numeric_limits<std::uint64_t>::max();
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman, Vigna).
class Xoshiro256ss {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256ss(std::array<std::uint64_t, 4> state) noexcept
      : s_(state) {}

  /// Standard seeding: four consecutive splitmix64 outputs.
  static constexpr Xoshiro256ss from_seed(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    const std::uint64_t a = sm(), b = sm(), c = sm(), d = sm();
    return Xoshiro256ss({a, b, c, d});
  }

  constexpr std::uint64_t operator()() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept {
    return std::numeric_limits<std::uint64_t>::max();
  }

 private:
  std::array<std::uint64_t, 4> s_;
};

inline constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

/// Top 53 bits as a double in [0,1).
constexpr double unit_closed_open(std::uint64_t u) noexcept {
  return static_cast<double>(u >> 11) * kTwoPow53Inv;
}

/// Same grid as unit_closed_open but exact zero is replaced by 2^-53, so
/// the result lies in (0,1).
constexpr double unit_open(std::uint64_t u) noexcept {
  const double v = unit_closed_open(u);
  return v == 0.0 ? kTwoPow53Inv : v;
}

/// Derives an independent stream seed from a parent seed and an index.
constexpr std::uint64_t split_seed(std::uint64_t parent,
                                   std::uint64_t index) noexcept {
  SplitMix64 sm(parent ^ (0xd1b54a32d192ed03ULL * (index + 1)));
  sm();
  return sm();
}

}  // namespace wmark

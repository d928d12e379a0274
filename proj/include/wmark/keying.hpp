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
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmark/types.hpp"

namespace wmark {

/// 32-byte watermark master key.
class MasterKey {
 public:
  static constexpr std::size_t kSize = 32;

  MasterKey() = default;
  explicit MasterKey(const std::array<std::uint8_t, kSize>& bytes)
      : bytes_(bytes) {}

  /// Parses exactly 64 hex characters (either case).
  static MasterKey from_hex(std::string_view hex);
  /// Deterministic key material for experiments; not for production use.
  static MasterKey from_seed(std::uint64_t seed);

  std::string to_hex() const;
  std::span<const std::uint8_t, kSize> bytes() const noexcept {
    return bytes_;
  }

  friend bool operator==(const MasterKey&, const MasterKey&) = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

/// Per-step RNG seed derived from the master key and the token window.
struct WindowSeed {
  std::uint64_t value = 0;
  friend auto operator<=>(const WindowSeed&, const WindowSeed&) = default;
};

/// Secret vector r in (0,1)^d.
class SecretVector {
 public:
  SecretVector() = default;
  explicit SecretVector(std::vector<double> entries)
      : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const noexcept { return entries_[i]; }
  std::span<const double> entries() const noexcept { return entries_; }

 private:
  std::vector<double> entries_;
};

/// Seed for the window x[t-h..t-1] (oldest first). Preimage layout:
///
///   key (32 bytes) || h (u32 LE) || window[0] (u32 LE) || ... || window[h-1]
///
/// and the seed is the first 8 digest bytes read big-endian. Throws a
/// config error when `window.size() != h`.
WindowSeed derive_seed(const MasterKey& key, std::span<const TokenId> window,
                       std::size_t h);

/// Seed for position `pos` of `tokens`: the window is the h tokens before
/// `pos`, left-padded with token 0 where the sequence is too short.
WindowSeed derive_seed_at(const MasterKey& key,
                          std::span<const TokenId> tokens, std::size_t pos,
                          std::size_t h);

/// First d outputs of xoshiro256** seeded by splitmix64(seed), mapped into
/// (0,1). Any prefix of the vector does not depend on d.
SecretVector secret_vector(WindowSeed seed, std::size_t d);

/// Entry `index` of secret_vector(seed, d) for any d > index, without
/// materialising the vector.
double secret_entry(WindowSeed seed, std::size_t index) noexcept;

/// mask[i] = entries[i] < gamma. Throws a config error unless 0 < gamma < 1.
std::vector<bool> greenlist_mask(const SecretVector& v, double gamma);

}  // namespace wmark

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

#include "wmark/keying.hpp"

#include <algorithm>

#include "wmark/rng.hpp"
#include "wmark/sha256.hpp"

namespace wmark {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline void put_le32(std::uint8_t* out, std::uint32_t v) noexcept {
  out[0] = static_cast<std::uint8_t>(v);
  out[1] = static_cast<std::uint8_t>(v >> 8);
  out[2] = static_cast<std::uint8_t>(v >> 16);
  out[3] = static_cast<std::uint8_t>(v >> 24);
}

// Windows up to this width hash from a stack buffer.
constexpr std::size_t kInlineWindow = 32;

}  // namespace

MasterKey MasterKey::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kSize) {
    fail(ErrorKind::config, "master key must be 64 hex characters, got " +
                                std::to_string(hex.size()));
  }
  std::array<std::uint8_t, kSize> bytes{};
  for (std::size_t i = 0; i < kSize; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(ErrorKind::config, "master key is not hex");
    bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return MasterKey(bytes);
}

MasterKey MasterKey::from_seed(std::uint64_t seed) {
  SplitMix64 sm(seed);
  std::array<std::uint8_t, kSize> bytes{};
  for (std::size_t i = 0; i < kSize; i += 8) {
    const std::uint64_t w = sm();
    for (std::size_t j = 0; j < 8; ++j) {
      bytes[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
    }
  }
  return MasterKey(bytes);
}

std::string MasterKey::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * kSize);
  for (std::uint8_t b : bytes_) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

WindowSeed derive_seed(const MasterKey& key, std::span<const TokenId> window,
                       std::size_t h) {
  if (window.size() != h) {
    fail(ErrorKind::config, "window length " + std::to_string(window.size()) +
                                " does not match h=" + std::to_string(h));
  }
  const std::size_t len = MasterKey::kSize + 4 + 4 * h;
  std::uint8_t inline_buf[MasterKey::kSize + 4 + 4 * kInlineWindow];
  std::vector<std::uint8_t> heap_buf;
  std::uint8_t* buf = inline_buf;
  if (h > kInlineWindow) {
    heap_buf.resize(len);
    buf = heap_buf.data();
  }
  std::copy(key.bytes().begin(), key.bytes().end(), buf);
  put_le32(buf + MasterKey::kSize, static_cast<std::uint32_t>(h));
  for (std::size_t i = 0; i < h; ++i) {
    put_le32(buf + MasterKey::kSize + 4 + 4 * i, window[i]);
  }
  const Sha256Digest digest = sha256({buf, len});
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed = (seed << 8) | digest[i];
  return WindowSeed{seed};
}

WindowSeed derive_seed_at(const MasterKey& key,
                          std::span<const TokenId> tokens, std::size_t pos,
                          std::size_t h) {
  if (pos >= h) return derive_seed(key, tokens.subspan(pos - h, h), h);
  std::vector<TokenId> window(h, 0);
  std::copy(tokens.begin(), tokens.begin() + pos, window.begin() + (h - pos));
  return derive_seed(key, window, h);
}

SecretVector secret_vector(WindowSeed seed, std::size_t d) {
  auto rng = Xoshiro256ss::from_seed(seed.value);
  std::vector<double> entries(d);
  for (double& e : entries) e = unit_open(rng());
  return SecretVector(std::move(entries));
}

double secret_entry(WindowSeed seed, std::size_t index) noexcept {
  auto rng = Xoshiro256ss::from_seed(seed.value);
  for (std::size_t i = 0; i < index; ++i) rng();
  return unit_open(rng());
}

std::vector<bool> greenlist_mask(const SecretVector& v, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    fail(ErrorKind::config, "gamma must lie in (0,1)");
  }
  std::vector<bool> mask(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mask[i] = v[i] < gamma;
  return mask;
}

}  // namespace wmark

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
#include <cstdint>
#include <span>

namespace wmark {

using Sha256Digest = std::array<std::uint8_t, 32>;

// FIPS 180-4 SHA-256. Kept in-tree because seed derivation runs once per
// scored token and library one-shot calls carry too much per-call overhead.
Sha256Digest sha256(std::span<const std::uint8_t> message) noexcept;

}  // namespace wmark

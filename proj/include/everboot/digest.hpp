// Copyright 2026 The Everboot Authors
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

#include <optional>
#include <string>
#include <string_view>

#include "everboot/common.hpp"

namespace everboot {

/// Digest algorithms a repository may use. Sha256 is the default; Md5 is
/// kept for compatibility with legacy manifests and flagged deprecated
/// wherever it shows up in reports.
enum class DigestAlgorithm { Sha256, Md5 };

std::string_view digest_algorithm_name(DigestAlgorithm alg);
std::optional<DigestAlgorithm> parse_digest_algorithm(std::string_view name);
bool digest_deprecated(DigestAlgorithm alg);

/// Hex width of a digest of this algorithm (64 for sha256, 32 for md5).
std::size_t digest_hex_width(DigestAlgorithm alg);

Bytes compute_digest(DigestAlgorithm alg, std::span<const std::uint8_t> data);
std::string digest_hex(DigestAlgorithm alg, std::span<const std::uint8_t> data);

}  // namespace everboot

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

#include "everboot/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace everboot {

namespace {
const EVP_MD* evp_for(DigestAlgorithm alg) {
  switch (alg) {
    case DigestAlgorithm::Sha256:
      return EVP_sha256();
    case DigestAlgorithm::Md5:
      return EVP_md5();
  }
  return nullptr;
}
}  // namespace

std::string_view digest_algorithm_name(DigestAlgorithm alg) {
  switch (alg) {
    case DigestAlgorithm::Sha256:
      return "sha256";
    case DigestAlgorithm::Md5:
      return "md5";
  }
  return "?";
}

std::optional<DigestAlgorithm> parse_digest_algorithm(std::string_view name) {
  if (name == "sha256") return DigestAlgorithm::Sha256;
  if (name == "md5") return DigestAlgorithm::Md5;
  return std::nullopt;
}

bool digest_deprecated(DigestAlgorithm alg) { return alg == DigestAlgorithm::Md5; }

std::size_t digest_hex_width(DigestAlgorithm alg) {
  return alg == DigestAlgorithm::Sha256 ? 64 : 32;
}

Bytes compute_digest(DigestAlgorithm alg, std::span<const std::uint8_t> data) {
  const EVP_MD* md = evp_for(alg);
  Bytes out(static_cast<std::size_t>(EVP_MD_size(md)));
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, md, nullptr) != 1) {
    throw std::runtime_error("digest computation failed");
  }
  out.resize(len);
  return out;
}

std::string digest_hex(DigestAlgorithm alg, std::span<const std::uint8_t> data) {
  return to_hex(compute_digest(alg, data));
}

}  // namespace everboot

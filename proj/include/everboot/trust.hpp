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

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "everboot/common.hpp"
#include "everboot/digest.hpp"

namespace everboot::trust {

enum class KeySource { ConfigMedium, OperatorAdded };

/// An operator-trusted public key. Revocation is sticky within a boot
/// epoch: the flag only ever moves false -> true.
struct TrustedKey {
  std::string key_id;
  Bytes public_material;  // 32-byte Ed25519 public key
  bool revoked = false;
  KeySource source = KeySource::ConfigMedium;
};

struct SecretKey {
  std::string key_id;
  Bytes private_material;  // 32-byte Ed25519 seed
  Bytes public_material;

  std::string serialize() const;
  static Result<SecretKey> parse(std::string_view text);
};

struct KeyPair {
  TrustedKey public_key;
  SecretKey secret_key;
};

/// Ordered set of trusted keys. key_ids are unique; a key may also be
/// addressed by the sha256 hex of its public material (the alias form).
class Keyring {
 public:
  Keyring() = default;
  explicit Keyring(std::string origin_medium) : origin_medium_(std::move(origin_medium)) {}

  Result<void> add_key(TrustedKey key);
  const TrustedKey* find(std::string_view id_or_alias) const;
  bool revoke(std::string_view key_id);  // false if the id is unknown
  bool empty() const { return keys_.empty(); }
  std::size_t size() const { return keys_.size(); }
  std::span<const TrustedKey> keys() const { return keys_; }
  const std::string& origin_medium() const { return origin_medium_; }
  void set_origin_medium(std::string m) { origin_medium_ = std::move(m); }

  // File format: one `KEY <key_id> <hex public_material> <REVOKED|OK>`
  // per line, `#` comments ignored, LF line endings.
  std::string serialize() const;
  static Result<Keyring> parse(std::string_view text, std::string origin_medium);

 private:
  std::vector<TrustedKey> keys_;
  std::string origin_medium_;
};

/// A signature stored separately from the payload it covers. Several of
/// these, from independent signers, may accompany one manifest.
struct DetachedSignature {
  std::string signer_key_id;
  std::string payload_digest;  // hex, digest_algorithm over the payload
  Bytes signature_bytes;       // 64-byte Ed25519 signature over the payload
  DigestAlgorithm digest_algorithm = DigestAlgorithm::Sha256;

  std::string serialize() const;
  static Result<DetachedSignature> parse(std::string_view text);
};

// Detached signature files are named `<signed-file-name>.sig.<key_id>`.
std::string signature_filename(std::string_view signed_file, std::string_view key_id);
// Returns (signed-file-name, key_id) when the name matches the pattern.
std::optional<std::pair<std::string, std::string>> split_signature_filename(std::string_view filename);

enum class VerifyStatus { ValidBy, InvalidSignature, UnknownKey, RevokedKey };

std::string_view verify_status_name(VerifyStatus s);

struct VerifyResult {
  VerifyStatus status = VerifyStatus::InvalidSignature;
  std::string key_id;  // the signer, when known

  bool valid() const { return status == VerifyStatus::ValidBy; }
  std::string render() const;
};

/// Deterministic Ed25519 keypair derived from (key_id, rng_seed).
/// Same inputs, byte-identical keys.
Result<KeyPair> generate_keypair(std::string_view key_id, std::uint64_t rng_seed);

Result<DetachedSignature> sign_payload(std::span<const std::uint8_t> payload,
                                       const SecretKey& secret,
                                       DigestAlgorithm algorithm = DigestAlgorithm::Sha256);

/// ValidBy only when the signature verifies, the key is present in the
/// keyring, and the key is not revoked. All outcomes are values.
VerifyResult verify_signature(std::span<const std::uint8_t> payload,
                              const DetachedSignature& sig,
                              const Keyring& keyring);

/// Monotone revocation set. Merging two lists yields the union.
struct RevocationList {
  std::set<std::string> revoked_key_ids;
  double fetched_at = 0.0;
  std::string source;

  void merge(const RevocationList& other);

  // One `REVOKE <key_id>` per line; `#` comments ignored.
  std::string serialize() const;
  static RevocationList parse(std::string_view body, std::string source);
};

/// How checkRevocation reaches its endpoints; the network simulator
/// provides the real implementation.
class RevocationTransport {
 public:
  virtual ~RevocationTransport() = default;
  // Body of the endpoint's revocation list, or nullopt when unreachable.
  virtual std::optional<std::string> fetch_revocation_list(const std::string& endpoint) = 0;
};

struct RevocationReport {
  std::vector<std::string> reachable;
  std::vector<std::string> unreachable;
  std::vector<std::string> newly_revoked;
  // Set when no source could be consulted; keys keep their last-known
  // status and the boot goes on with a warning.
  bool degraded = false;
};

RevocationReport check_revocation(Keyring& keyring,
                                  const std::vector<std::string>& sources,
                                  RevocationTransport& transport);

}  // namespace everboot::trust

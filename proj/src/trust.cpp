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

#include "everboot/trust.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <memory>

namespace everboot::trust {

namespace {

constexpr std::size_t kSeedBytes = 32;
constexpr std::size_t kSignatureBytes = 64;

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct CtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using CtxPtr = std::unique_ptr<EVP_MD_CTX, CtxDeleter>;

PkeyPtr private_key_from_seed(std::span<const std::uint8_t> seed) {
  return PkeyPtr(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
}

PkeyPtr public_key_from_raw(std::span<const std::uint8_t> raw) {
  return PkeyPtr(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, raw.data(), raw.size()));
}

}  // namespace

Result<KeyPair> generate_keypair(std::string_view key_id, std::uint64_t rng_seed) {
  if (key_id.empty()) return Error{"EmptyKeyId", "key_id must be nonempty"};

  // Derive the 32-byte signing seed from (rng_seed, key_id) so two ids
  // never share key material even under the same seed.
  Bytes material;
  for (int i = 0; i < 8; ++i) material.push_back(static_cast<std::uint8_t>(rng_seed >> (8 * i)));
  material.push_back(0);
  material.insert(material.end(), key_id.begin(), key_id.end());
  Bytes seed = compute_digest(DigestAlgorithm::Sha256, material);
  seed.resize(kSeedBytes);

  PkeyPtr pkey = private_key_from_seed(seed);
  if (!pkey) return Error{"KeygenFailed", "could not derive signing key"};

  std::size_t pub_len = kSeedBytes;
  Bytes pub(pub_len);
  if (EVP_PKEY_get_raw_public_key(pkey.get(), pub.data(), &pub_len) != 1) {
    return Error{"KeygenFailed", "could not extract public key"};
  }
  pub.resize(pub_len);

  KeyPair pair;
  pair.public_key = TrustedKey{std::string(key_id), pub, false, KeySource::ConfigMedium};
  pair.secret_key = SecretKey{std::string(key_id), seed, pub};
  return pair;
}

Result<DetachedSignature> sign_payload(std::span<const std::uint8_t> payload,
                                       const SecretKey& secret, DigestAlgorithm algorithm) {
  PkeyPtr pkey = private_key_from_seed(secret.private_material);
  if (!pkey) return Error{"BadSecretKey", "secret key material rejected"};

  CtxPtr ctx(EVP_MD_CTX_new());
  if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
    return Error{"SignFailed", "sign init failed"};
  }
  std::size_t sig_len = kSignatureBytes;
  Bytes sig(sig_len);
  if (EVP_DigestSign(ctx.get(), sig.data(), &sig_len, payload.data(), payload.size()) != 1) {
    return Error{"SignFailed", "signing failed"};
  }
  sig.resize(sig_len);

  DetachedSignature out;
  out.signer_key_id = secret.key_id;
  out.payload_digest = digest_hex(algorithm, payload);
  out.signature_bytes = std::move(sig);
  out.digest_algorithm = algorithm;
  return out;
}

VerifyResult verify_signature(std::span<const std::uint8_t> payload, const DetachedSignature& sig,
                              const Keyring& keyring) {
  const TrustedKey* key = keyring.find(sig.signer_key_id);
  if (key == nullptr) return {VerifyStatus::UnknownKey, sig.signer_key_id};

  PkeyPtr pkey = public_key_from_raw(key->public_material);
  if (!pkey) return {VerifyStatus::InvalidSignature, key->key_id};

  CtxPtr ctx(EVP_MD_CTX_new());
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
    return {VerifyStatus::InvalidSignature, key->key_id};
  }
  int rc = EVP_DigestVerify(ctx.get(), sig.signature_bytes.data(), sig.signature_bytes.size(),
                            payload.data(), payload.size());
  if (rc != 1) return {VerifyStatus::InvalidSignature, key->key_id};

  // The recorded payload digest must match the payload too; a signature
  // with tampered metadata is not presentable as valid.
  if (sig.payload_digest != digest_hex(sig.digest_algorithm, payload)) {
    return {VerifyStatus::InvalidSignature, key->key_id};
  }

  if (key->revoked) return {VerifyStatus::RevokedKey, key->key_id};
  return {VerifyStatus::ValidBy, key->key_id};
}

std::string_view verify_status_name(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::ValidBy:
      return "ValidBy";
    case VerifyStatus::InvalidSignature:
      return "InvalidSignature";
    case VerifyStatus::UnknownKey:
      return "UnknownKey";
    case VerifyStatus::RevokedKey:
      return "RevokedKey";
  }
  return "?";
}

std::string VerifyResult::render() const {
  std::string out(verify_status_name(status));
  if (!key_id.empty() && status != VerifyStatus::InvalidSignature) out += " " + key_id;
  return out;
}

// --- Keyring ---------------------------------------------------------------

Result<void> Keyring::add_key(TrustedKey key) {
  if (key.key_id.empty()) return Error{"EmptyKeyId", "key_id must be nonempty"};
  if (find(key.key_id) != nullptr) {
    return Error{"DuplicateKeyId", "key_id already present: " + key.key_id};
  }
  keys_.push_back(std::move(key));
  return {};
}

const TrustedKey* Keyring::find(std::string_view id_or_alias) const {
  for (const TrustedKey& key : keys_) {
    if (key.key_id == id_or_alias) return &key;
  }
  // Alias form: the sha256 hex of the public material.
  for (const TrustedKey& key : keys_) {
    if (digest_hex(DigestAlgorithm::Sha256, key.public_material) == id_or_alias) return &key;
  }
  return nullptr;
}

bool Keyring::revoke(std::string_view key_id) {
  for (TrustedKey& key : keys_) {
    if (key.key_id == key_id) {
      key.revoked = true;  // sticky for the epoch
      return true;
    }
  }
  return false;
}

std::string Keyring::serialize() const {
  std::string out;
  for (const TrustedKey& key : keys_) {
    out += "KEY " + key.key_id + " " + to_hex(key.public_material) + " " +
           (key.revoked ? "REVOKED" : "OK") + "\n";
  }
  return out;
}

Result<Keyring> Keyring::parse(std::string_view text, std::string origin_medium) {
  Keyring ring(std::move(origin_medium));
  for (std::string_view raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> tokens = split(std::string(line), ' ');
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
    if (tokens.size() != 4 || tokens[0] != "KEY") {
      return Error{"BadKeyringLine", "unparseable keyring line: " + std::string(line)};
    }
    auto material = from_hex(tokens[2]);
    if (!material) return Error{"BadKeyringLine", "bad hex in keyring line: " + std::string(line)};
    bool revoked;
    if (tokens[3] == "REVOKED") {
      revoked = true;
    } else if (tokens[3] == "OK") {
      revoked = false;
    } else {
      return Error{"BadKeyringLine", "bad status in keyring line: " + std::string(line)};
    }
    auto added = ring.add_key(TrustedKey{tokens[1], *material, revoked, KeySource::ConfigMedium});
    if (!added.ok()) return added.error();
  }
  return ring;
}

// --- Serialization helpers -------------------------------------------------

std::string SecretKey::serialize() const {
  return "SECRET " + key_id + " " + to_hex(private_material) + " " + to_hex(public_material) + "\n";
}

Result<SecretKey> SecretKey::parse(std::string_view text) {
  std::vector<std::string> tokens = split(std::string(trim(text)), ' ');
  std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  if (tokens.size() != 4 || tokens[0] != "SECRET") {
    return Error{"BadSecretKey", "unparseable secret key"};
  }
  auto priv = from_hex(tokens[2]);
  auto pub = from_hex(tokens[3]);
  if (!priv || !pub) return Error{"BadSecretKey", "bad hex in secret key"};
  return SecretKey{tokens[1], *priv, *pub};
}

std::string DetachedSignature::serialize() const {
  return "SIG " + signer_key_id + " " + std::string(digest_algorithm_name(digest_algorithm)) + " " +
         payload_digest + " " + to_hex(signature_bytes) + "\n";
}

Result<DetachedSignature> DetachedSignature::parse(std::string_view text) {
  std::vector<std::string> tokens = split(std::string(trim(text)), ' ');
  std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  if (tokens.size() != 5 || tokens[0] != "SIG") {
    return Error{"BadSignatureFile", "unparseable signature file"};
  }
  auto alg = parse_digest_algorithm(tokens[2]);
  if (!alg) return Error{"UnsupportedAlgorithm", "unknown digest algorithm: " + tokens[2]};
  auto sig_bytes = from_hex(tokens[4]);
  if (!sig_bytes) return Error{"BadSignatureFile", "bad hex in signature file"};
  DetachedSignature sig;
  sig.signer_key_id = tokens[1];
  sig.digest_algorithm = *alg;
  sig.payload_digest = tokens[3];
  sig.signature_bytes = *sig_bytes;
  return sig;
}

std::string signature_filename(std::string_view signed_file, std::string_view key_id) {
  return std::string(signed_file) + ".sig." + std::string(key_id);
}

std::optional<std::pair<std::string, std::string>> split_signature_filename(
    std::string_view filename) {
  auto pos = filename.rfind(".sig.");
  if (pos == std::string_view::npos || pos == 0) return std::nullopt;
  std::string key_id(filename.substr(pos + 5));
  if (key_id.empty()) return std::nullopt;
  return std::make_pair(std::string(filename.substr(0, pos)), key_id);
}

// --- Revocation ------------------------------------------------------------

void RevocationList::merge(const RevocationList& other) {
  revoked_key_ids.insert(other.revoked_key_ids.begin(), other.revoked_key_ids.end());
  fetched_at = std::max(fetched_at, other.fetched_at);
}

std::string RevocationList::serialize() const {
  std::string out;
  for (const std::string& id : revoked_key_ids) out += "REVOKE " + id + "\n";
  return out;
}

RevocationList RevocationList::parse(std::string_view body, std::string source) {
  RevocationList list;
  list.source = std::move(source);
  for (std::string_view raw : split(body, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.substr(0, 7) == "REVOKE ") {
      std::string_view id = trim(line.substr(7));
      if (!id.empty()) list.revoked_key_ids.insert(std::string(id));
    }
  }
  return list;
}

RevocationReport check_revocation(Keyring& keyring, const std::vector<std::string>& sources,
                                  RevocationTransport& transport) {
  RevocationReport report;
  RevocationList merged;
  for (const std::string& source : sources) {
    auto body = transport.fetch_revocation_list(source);
    if (!body) {
      report.unreachable.push_back(source);
      continue;
    }
    report.reachable.push_back(source);
    merged.merge(RevocationList::parse(*body, source));
  }
  // Keys keep their last-known status when nothing could be consulted.
  report.degraded = report.reachable.empty();
  for (const std::string& id : merged.revoked_key_ids) {
    const TrustedKey* key = keyring.find(id);
    if (key != nullptr && !key->revoked) {
      keyring.revoke(key->key_id);
      report.newly_revoked.push_back(key->key_id);
    }
  }
  return report;
}

}  // namespace everboot::trust

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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "everboot/common.hpp"
#include "everboot/digest.hpp"
#include "everboot/media.hpp"
#include "everboot/trust.hpp"

namespace everboot::resolve {

enum class Category { Base, Port, Application };
std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

// ---------------------------------------------------------------------------
// Package archives
//
// A package file is a small self-describing archive:
//   PKGAR1
//   name=<name>
//   version=<version>
//   category=<Base|Port|Application>
//   files=<n>
//   F <x|-> <size> <path>
//   <size raw bytes>\n
//   ... repeated per file
// Paths are namespace-absolute install targets ("/usr/bin/daemon").

struct ArchiveEntry {
  std::string path;
  Bytes content;
  bool exec = false;
};

struct PackageContents {
  std::string name;
  std::string version;
  Category category = Category::Application;
  std::vector<ArchiveEntry> entries;
};

Bytes pack_package(const PackageContents& contents);
Result<PackageContents> unpack_package(std::span<const std::uint8_t> bytes);

// Package files are named `<name>-<version>.pkg`.
std::string package_filename(std::string_view name, std::string_view version);
std::optional<std::pair<std::string, std::string>> split_package_filename(std::string_view filename);

// ---------------------------------------------------------------------------
// Manifests

struct ManifestEntry {
  std::string digest_hex;
  std::string filename;
};

/// A digest list over package payloads: `<hex digest>  <filename>` per
/// line (two spaces). Named `<set>.md5` or `<set>.dgst` depending on the
/// algorithm.
struct Manifest {
  std::vector<ManifestEntry> entries;
  DigestAlgorithm digest_algorithm = DigestAlgorithm::Sha256;

  std::string serialize() const;
};

Result<Manifest> parse_manifest(std::string_view text, DigestAlgorithm algorithm);
bool is_manifest_filename(std::string_view filename);
std::optional<DigestAlgorithm> manifest_algorithm_from_filename(std::string_view filename);
std::string manifest_filename(std::string_view set_name, DigestAlgorithm alg);

// ---------------------------------------------------------------------------
// Package-path scanning

struct PathElement {
  const media::VirtualMedium* medium = nullptr;
  std::string subdir;  // "" scans the medium root
};

struct FoundManifest {
  Manifest manifest;
  Bytes raw;  // exact file bytes; signatures verify against these
  std::string filename;
  std::string medium_id;
  int path_position = 0;
};

struct FoundSignature {
  trust::DetachedSignature sig;
  std::string target_filename;
  std::string filename;
  std::string medium_id;
  int path_position = 0;
};

struct FoundPackage {
  std::string name;
  std::string version;
  std::string filename;
  std::string tree_path;  // full path inside the medium tree
  Bytes payload;
  std::string medium_id;
  int path_position = 0;
  std::optional<Category> category;  // parsed from the archive header
};

struct ScanResult {
  std::vector<FoundManifest> manifests;
  std::vector<FoundSignature> signatures;       // matched to a manifest name
  std::vector<FoundSignature> orphan_signatures;  // no manifest of that name anywhere
  std::vector<FoundPackage> packages;
  std::vector<std::string> warnings;
};

/// Walks the ordered package path and records every manifest, detached
/// signature, and package candidate, tagged with its source medium and
/// path position. Unreadable (absent) media are skipped with a warning.
ScanResult scan_package_path(const std::vector<PathElement>& path, BootLog* log = nullptr,
                             std::uint64_t epoch = 0, double t = 0.0);

// ---------------------------------------------------------------------------
// Valid-digest list

struct DigestProvenance {
  std::string manifest_filename;
  std::string manifest_medium;
  std::string validating_key_id;
  DigestAlgorithm algorithm = DigestAlgorithm::Sha256;
};

struct ValidDigestList {
  std::set<std::string> digests;
  std::map<std::string, DigestProvenance> provenance;

  bool contains(std::string_view hex) const { return digests.count(std::string(hex)) > 0; }
};

/// Every manifest carrying at least one ValidBy signature contributes all
/// of its digest entries; manifests with no valid signature contribute
/// nothing. Run the revocation check on the keyring first.
ValidDigestList build_valid_digest_list(const ScanResult& scan, const trust::Keyring& keyring,
                                        BootLog* log = nullptr, std::uint64_t epoch = 0,
                                        double t = 0.0);

// ---------------------------------------------------------------------------
// Versions

enum class Ordering { Less, Equal, Greater };

/// Componentwise numeric comparison of dotted versions; the shorter
/// sequence is zero-padded ("1.2" == "1.2.0"). Malformed input is an
/// error and the candidate carrying it is excluded with a warning.
Result<Ordering> compare_versions(std::string_view a, std::string_view b);
bool version_well_formed(std::string_view v);

// ---------------------------------------------------------------------------
// Install plan

struct Required {
  std::string name;
  Category category = Category::Application;
};

struct InstallStep {
  std::string name;
  std::string version;
  std::string source_medium;
  Category category = Category::Application;
  std::string filename;
  std::string tree_path;
  std::string digest_hex;
  int path_position = 0;
};

struct InstallPlan {
  enum class Status { Complete, HunkerDown };
  Status status = Status::Complete;
  std::vector<InstallStep> steps;        // Base steps, then Ports, then Applications
  std::vector<std::string> missing;      // names with no valid candidate

  bool complete() const { return status == Status::Complete; }
  std::string render() const;

  friend bool operator==(const InstallPlan&, const InstallPlan&) = default;
};

bool operator==(const InstallStep&, const InstallStep&);

/// For each required name, plans the valid candidate with the highest
/// version; ties break to the earliest package-path position. Any
/// required name with no valid candidate flips the whole plan to
/// HunkerDown and discards the steps.
InstallPlan resolve_install_plan(const std::vector<Required>& required, const ScanResult& scan,
                                 const ValidDigestList& valid, BootLog* log = nullptr,
                                 std::uint64_t epoch = 0, double t = 0.0);

}  // namespace everboot::resolve

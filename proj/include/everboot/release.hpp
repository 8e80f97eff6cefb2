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
#include <vector>

#include "everboot/boot.hpp"
#include "everboot/media.hpp"
#include "everboot/resolve.hpp"
#include "everboot/simnet.hpp"
#include "everboot/trust.hpp"
#include "everboot/update.hpp"

namespace everboot::release {

/// A package as fed to the release pipeline: its identity plus the file
/// entries the archive will install.
struct PackageSpec {
  std::string name;
  std::string version;
  resolve::Category category = resolve::Category::Application;
  std::vector<resolve::ArchiveEntry> entries;
};

struct BuildOptions {
  DigestAlgorithm algorithm = DigestAlgorithm::Sha256;
  std::optional<boot::ApplianceConfig> default_config;
  // Extra ramdisk skeleton files beyond the built-in /etc and /dev set.
  std::vector<std::pair<std::string, media::FileNode>> extra_ramdisk;
};

/// Builds a bootable image: package sets with their manifests and
/// detached signatures, the verifier-tool directory, the ramdisk
/// skeleton, the keyring template, and the required-package list. The
/// result is permanently write-locked.
Result<media::VirtualMedium> build_image(const std::vector<PackageSpec>& packages,
                                         const trust::Keyring& keyring_template,
                                         const std::vector<trust::SecretKey>& signers,
                                         const BuildOptions& options = {});

struct ExtractResult {
  std::string package_filename;
  Bytes package_bytes;  // byte-identical to the copy inside the image
  std::string manifest_filename;
  Bytes manifest_bytes;
  std::vector<trust::DetachedSignature> signatures;
  std::vector<std::string> warnings;
  // The publishable bundle: package + manifest + one .sig.<key_id> each.
  media::FileTree bundle;
};

/// There is no separate build path for distributed packages: an upgrade
/// package is extracted from a built image and signed with each provided
/// key. Fewer than two keys earns a MultiSigRecommended warning.
Result<ExtractResult> extract_and_sign_package(const media::VirtualMedium& image,
                                               std::string_view name,
                                               const std::vector<trust::SecretKey>& secrets,
                                               DigestAlgorithm algorithm = DigestAlgorithm::Sha256);

struct PublishReport {
  std::vector<std::string> published;
  std::vector<std::string> unreachable;
  std::vector<std::string> notified_sites;
};

/// Places the bundle on every reachable mirror and emits one
/// check-then-reboot notification per site. Unreachable mirrors are
/// reported, not fatal.
Result<PublishReport> publish_and_notify(sim::SimNet& net, const update::MirrorSet& mirrors,
                                         const media::FileTree& bundle,
                                         const std::vector<std::string>& sites,
                                         BootLog* mail_log = nullptr, std::uint64_t epoch = 0,
                                         double t = 0.0);

}  // namespace everboot::release

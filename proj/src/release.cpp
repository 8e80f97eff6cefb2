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

#include "everboot/release.hpp"

#include <set>

namespace everboot::release {

namespace {

std::string_view set_dir_for(resolve::Category category) {
  switch (category) {
    case resolve::Category::Base:
      return "packages/base";
    case resolve::Category::Port:
      return "packages/ports";
    case resolve::Category::Application:
      return "packages/apps";
  }
  return "packages/apps";
}

std::string_view set_name_for(resolve::Category category) {
  switch (category) {
    case resolve::Category::Base:
      return "base";
    case resolve::Category::Port:
      return "ports";
    case resolve::Category::Application:
      return "apps";
  }
  return "apps";
}

Result<void> sign_and_store(media::FileTree& tree, const std::string& dir,
                            const std::string& manifest_name, const Bytes& manifest_bytes,
                            const std::vector<trust::SecretKey>& signers, DigestAlgorithm alg) {
  std::string prefix = dir.empty() ? "" : dir + "/";
  auto put = tree.write(prefix + manifest_name, {manifest_bytes, false});
  if (!put.ok()) return put.error();
  for (const trust::SecretKey& signer : signers) {
    auto sig = trust::sign_payload(manifest_bytes, signer, alg);
    if (!sig.ok()) return sig.error();
    std::string name = trust::signature_filename(manifest_name, signer.key_id);
    auto stored = tree.write(prefix + name, {to_bytes(sig.value().serialize()), false});
    if (!stored.ok()) return stored.error();
  }
  return {};
}

}  // namespace

Result<media::VirtualMedium> build_image(const std::vector<PackageSpec>& packages,
                                         const trust::Keyring& keyring_template,
                                         const std::vector<trust::SecretKey>& signers,
                                         const BuildOptions& options) {
  std::set<std::string> names;
  for (const PackageSpec& spec : packages) {
    if (!names.insert(spec.name).second) {
      return Error{"DuplicatePackage", "duplicate package name: " + spec.name};
    }
    if (!resolve::version_well_formed(spec.version)) {
      return Error{"MalformedVersion", spec.name + " has version '" + spec.version + "'"};
    }
  }

  media::VirtualMedium image("image", media::MediumKind::BootImage);
  media::FileTree staging;

  // Package sets plus one signed manifest per set.
  for (resolve::Category category :
       {resolve::Category::Base, resolve::Category::Port, resolve::Category::Application}) {
    std::string dir(set_dir_for(category));
    resolve::Manifest manifest;
    manifest.digest_algorithm = options.algorithm;
    bool any = false;
    for (const PackageSpec& spec : packages) {
      if (spec.category != category) continue;
      any = true;
      resolve::PackageContents contents{spec.name, spec.version, category, spec.entries};
      Bytes payload = resolve::pack_package(contents);
      std::string filename = resolve::package_filename(spec.name, spec.version);
      auto put = staging.write(dir + "/" + filename, {payload, false});
      if (!put.ok()) return put.error();
      manifest.entries.push_back({digest_hex(options.algorithm, payload), filename});
    }
    if (!any) continue;
    std::string manifest_name =
        resolve::manifest_filename(set_name_for(category), options.algorithm);
    auto stored = sign_and_store(staging, dir, manifest_name, to_bytes(manifest.serialize()),
                                 signers, options.algorithm);
    if (!stored.ok()) return stored.error();
  }

  // The verifier tool lives on the image itself so its testimony can be
  // trusted; exec rights flow from the image backing, nothing else.
  staging.write(std::string(boot::kImageVerifierTool), {to_bytes("verifier"), true}).ok();

  // RAMdisk skeleton: enough /etc and /dev to boot from.
  staging.write("ramdisk/etc/rc", {to_bytes("#!/bin/sh\n"), true}).ok();
  staging.write("ramdisk/etc/hosts", {to_bytes("127.0.0.1 localhost\n"), false}).ok();
  staging.write("ramdisk/etc/motd", {to_bytes("appliance platform\n"), false}).ok();
  staging.write("ramdisk/dev/null", {to_bytes(""), false}).ok();
  staging.write("ramdisk/dev/console", {to_bytes(""), false}).ok();
  for (const auto& [path, node] : options.extra_ramdisk) {
    staging.write("ramdisk/" + path, node).ok();
  }

  staging.write(std::string(boot::kImageKeyringPath),
                {to_bytes(keyring_template.serialize()), false})
      .ok();
  if (options.default_config) {
    staging.write(std::string(boot::kImageConfigPath),
                  {to_bytes(options.default_config->serialize()), false})
        .ok();
  }

  std::vector<resolve::Required> required;
  for (const PackageSpec& spec : packages) required.push_back({spec.name, spec.category});
  staging.write(std::string(boot::kImageRequiredPath),
                {to_bytes(boot::serialize_required_list(required)), false})
      .ok();

  image.tree = std::move(staging);  // assembled before the lock applies
  return image;
}

Result<ExtractResult> extract_and_sign_package(const media::VirtualMedium& image,
                                               std::string_view name,
                                               const std::vector<trust::SecretKey>& secrets,
                                               DigestAlgorithm algorithm) {
  if (secrets.empty()) return Error{"NoSigners", "at least one secret key is required"};

  // Locate the package inside the built image; the distributed copy is
  // byte-identical to it.
  const media::FileNode* found = nullptr;
  std::string filename;
  for (resolve::Category category :
       {resolve::Category::Base, resolve::Category::Port, resolve::Category::Application}) {
    for (const std::string& path : image.tree.list(std::string(set_dir_for(category)))) {
      auto base = path.substr(path.rfind('/') + 1);
      auto split_name = resolve::split_package_filename(base);
      if (split_name && split_name->first == name) {
        found = image.tree.find(path);
        filename = base;
        break;
      }
    }
    if (found != nullptr) break;
  }
  if (found == nullptr) {
    return Error{"UnknownPackage", "no package named '" + std::string(name) + "' in the image"};
  }

  ExtractResult result;
  result.package_filename = filename;
  result.package_bytes = found->content;

  auto split_name = resolve::split_package_filename(filename);
  resolve::Manifest manifest;
  manifest.digest_algorithm = algorithm;
  manifest.entries.push_back({digest_hex(algorithm, found->content), filename});
  result.manifest_filename =
      resolve::manifest_filename(split_name->first + "-" + split_name->second, algorithm);
  result.manifest_bytes = to_bytes(manifest.serialize());

  result.bundle.write(filename, {result.package_bytes, false}).ok();
  result.bundle.write(result.manifest_filename, {result.manifest_bytes, false}).ok();
  for (const trust::SecretKey& secret : secrets) {
    auto sig = trust::sign_payload(result.manifest_bytes, secret, algorithm);
    if (!sig.ok()) return sig.error();
    result.bundle
        .write(trust::signature_filename(result.manifest_filename, secret.key_id),
               {to_bytes(sig.value().serialize()), false})
        .ok();
    result.signatures.push_back(sig.take());
  }
  if (secrets.size() < 2) {
    result.warnings.push_back(
        "MultiSigRecommended: a single signing key makes its revocation fatal");
  }
  return result;
}

Result<PublishReport> publish_and_notify(sim::SimNet& net, const update::MirrorSet& mirrors,
                                         const media::FileTree& bundle,
                                         const std::vector<std::string>& sites, BootLog* mail_log,
                                         std::uint64_t epoch, double t) {
  PublishReport report;
  for (const std::string& mirror_id : mirrors.servers) {
    sim::MirrorEndpoint* ep = net.mirror(mirror_id);
    if (ep == nullptr || !ep->reachable) {
      report.unreachable.push_back(mirror_id);
      continue;
    }
    for (const auto& [path, node] : bundle.files()) ep->tree.write(path, node).ok();
    report.published.push_back(mirror_id);
    if (mail_log != nullptr) {
      mail_log->append(epoch, t, "publish",
                       {{"mirror", mirror_id},
                        {"files", std::to_string(bundle.file_count())}});
    }
  }
  for (const std::string& site : sites) {
    report.notified_sites.push_back(site);
    if (mail_log != nullptr) {
      // The three-step instruction: log in as root, run the check
      // script, reboot.
      mail_log->append(epoch, t, "mail", {{"site", site}, {"action", "check-then-reboot"}});
    }
  }
  return report;
}

}  // namespace everboot::release

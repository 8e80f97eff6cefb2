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

#include <string>
#include <vector>

#include "everboot/boot.hpp"
#include "everboot/release.hpp"
#include "everboot/simnet.hpp"
#include "everboot/trust.hpp"
#include "everboot/update.hpp"

namespace everboot::fixtures {

struct Rig {
  trust::KeyPair key_a;
  trust::KeyPair key_b;
  std::vector<trust::SecretKey> signers;
  trust::Keyring template_ring;
};

inline Rig make_rig(std::uint64_t seed = 1) {
  Rig rig;
  rig.key_a = trust::generate_keypair("release-a", seed).take();
  rig.key_b = trust::generate_keypair("release-b", seed + 1).take();
  rig.signers = {rig.key_a.secret_key, rig.key_b.secret_key};
  rig.template_ring = trust::Keyring("image");
  rig.template_ring.add_key(rig.key_a.public_key).ok();
  rig.template_ring.add_key(rig.key_b.public_key).ok();
  return rig;
}

inline std::vector<release::PackageSpec> default_packages(const std::string& daemon_version) {
  std::vector<release::PackageSpec> packages;
  packages.push_back({"core",
                      "1.0",
                      resolve::Category::Base,
                      {{"/usr/bin/sh", to_bytes("#!shell\n"), true},
                       {"/etc/core.conf", to_bytes("core\n"), false}}});
  packages.push_back({"rt",
                      "1.0",
                      resolve::Category::Port,
                      {{"/usr/lib/rt.so", to_bytes("rt-library\n"), false}}});
  packages.push_back(
      {"daemon",
       daemon_version,
       resolve::Category::Application,
       {{"/usr/bin/daemon", to_bytes("daemon-" + daemon_version + "\n"), true},
        {"/etc/daemon.conf", to_bytes("VERSION=" + daemon_version + "\n"), false}}});
  return packages;
}

inline media::VirtualMedium make_image(const Rig& rig, const std::string& daemon_version = "1.0",
                                       DigestAlgorithm alg = DigestAlgorithm::Sha256) {
  release::BuildOptions options;
  options.algorithm = alg;
  return release::build_image(default_packages(daemon_version), rig.template_ring, rig.signers,
                              options)
      .take();
}

inline boot::ApplianceConfig make_config(
    const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  boot::ApplianceConfig cfg;
  cfg.ip_address = "10.0.0.5";
  cfg.netmask = "255.255.255.0";
  cfg.gateway = "10.0.0.1";
  cfg.dns_servers = {"10.0.0.53"};
  cfg.admin_password_digest = boot::password_digest("hunter2", 7);
  cfg.ssh_host_key_id = "hostkey-fixture";
  cfg.extra = extra;
  return cfg;
}

inline media::VirtualMedium make_floppy(const Rig& rig,
                                        const boot::ApplianceConfig& cfg,
                                        bool locked = true) {
  media::VirtualMedium floppy("floppy", media::MediumKind::ConfigFloppy);
  floppy.tree.write(std::string(boot::kFloppyConfigPath), {to_bytes(cfg.serialize()), false}).ok();
  floppy.tree
      .write(std::string(boot::kFloppyKeyringPath),
             {to_bytes(rig.template_ring.serialize()), false})
      .ok();
  floppy.set_write_locked(locked).ok();
  return floppy;
}

/// A machine with the fixture image, a locked configured floppy, and one
/// 4 GiB disk. Boots straight to Running under an always-grant env.
inline boot::VirtualMachine make_machine(const Rig& rig, media::VirtualMedium image,
                                         std::uint64_t seed = 42,
                                         std::uint64_t disk_bytes = 4 * media::kGiB) {
  boot::VirtualMachine machine;
  machine.name = "test-appliance";
  machine.seed = seed;
  machine.media.push_back(std::move(image));
  machine.media.push_back(make_floppy(rig, make_config()));
  media::VirtualMedium disk("disk0", media::MediumKind::HardDisk);
  disk.size_bytes = disk_bytes;
  machine.media.push_back(std::move(disk));
  return machine;
}

inline boot::BootEnv make_env(sim::SimNet* net = nullptr) {
  boot::BootEnv env;
  env.net = net;
  env.partition_permission = [](const std::string&) { return true; };
  return env;
}

/// Drops a signed single-package bundle into the machine's cache, the way
/// the updater would have. Returns the package filename.
inline std::string seed_cache(boot::VirtualMachine& machine, const Rig& rig,
                              const std::string& daemon_version) {
  media::VirtualMedium patched = make_image(rig, daemon_version);
  auto bundle = release::extract_and_sign_package(patched, "daemon", rig.signers).take();
  media::VirtualMedium* disk = update::cache_disk(machine);
  for (const auto& [path, node] : bundle.bundle.files()) {
    disk->tree.write(std::string(boot::kCacheDir) + "/" + path, node).ok();
  }
  return bundle.package_filename;
}

}  // namespace everboot::fixtures

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

#include "everboot/update.hpp"

#include "everboot/resolve.hpp"

namespace everboot::update {

Result<std::string> pick_mirror(const MirrorSet& mirrors, std::uint64_t draw) {
  if (mirrors.servers.empty()) return Error{"NoMirrors", "mirror list is empty"};
  std::uint64_t word = sim::Rng::mix(mirrors.rng_seed, draw);
  return mirrors.servers[word % mirrors.servers.size()];
}

media::VirtualMedium* cache_disk(boot::VirtualMachine& machine) {
  return machine.first_medium(media::MediumKind::HardDisk);
}

const media::VirtualMedium* cache_disk(const boot::VirtualMachine& machine) {
  return machine.first_medium(media::MediumKind::HardDisk);
}

namespace {

// A mirror file is worth fetching when the cache has nothing newer under
// the same name. Packages compare by filename version; manifests and
// signatures are fetched when the exact filename is absent.
bool wants_file(const media::VirtualMedium& disk, const std::string& filename,
                std::string_view cache_dir) {
  std::string cached_path = std::string(cache_dir) + "/" + filename;
  if (auto pkg = resolve::split_package_filename(filename)) {
    for (const std::string& existing : disk.tree.list_dir(cache_dir)) {
      auto cached = resolve::split_package_filename(existing);
      if (!cached || cached->first != pkg->first) continue;
      auto cmp = resolve::compare_versions(pkg->second, cached->second);
      if (cmp.ok() && cmp.value() != resolve::Ordering::Greater) return false;
    }
    return true;
  }
  return disk.tree.find(cached_path) == nullptr;
}

}  // namespace

Result<FetchReport> check_and_fetch(const std::string& mirror_id, boot::VirtualMachine& machine,
                                    const sim::ProcessTag& proc, sim::SimNet& net) {
  if (proc.privileged) {
    // Enforced here as well as in the transport: the updater must never
    // run with privilege.
    throw PrivilegeError("check_and_fetch invoked with a privileged process tag");
  }

  FetchReport report;
  report.mirror = mirror_id;

  media::VirtualMedium* disk = cache_disk(machine);
  if (disk == nullptr) return Error{"NoStorage", "no disk to cache onto"};

  auto listing = net.list_mirror_files(proc, mirror_id, &machine.log, machine.epoch, machine.now);
  if (!listing.ok()) {
    // Unreachable mirror: empty report, the next scheduled check retries.
    report.unreachable = true;
    machine.log_event("fetch", {{"mirror", mirror_id}, {"files", "0"}});
    return report;
  }

  for (const std::string& filename : listing.value()) {
    bool interesting = filename.ends_with(".pkg") || resolve::is_manifest_filename(filename) ||
                       trust::split_signature_filename(filename).has_value();
    if (!interesting || !wants_file(*disk, filename, boot::kCacheDir)) continue;

    auto bytes = net.fetch_mirror_file(proc, mirror_id, filename, &machine.log, machine.epoch,
                                       machine.now);
    if (!bytes.ok()) continue;

    // Write-temp-then-rename: a reader of the cache never sees a partial
    // file under its final name.
    std::string final_path = std::string(boot::kCacheDir) + "/" + filename;
    std::string temp_path = std::string(boot::kCacheDir) + "/.tmp." + filename;
    auto written = disk->write_file(temp_path, {bytes.take(), false});
    if (!written.ok()) {
      machine.log.append(machine.epoch, machine.now, "fetch_error",
                         {{"file", filename}, {"error", written.error().code}});
      continue;
    }
    disk->tree.rename(temp_path, final_path);
    report.fetched.push_back(filename);
  }

  machine.log_event("fetch", {{"mirror", mirror_id}, {"files", std::to_string(report.files())}});
  return report;
}

}  // namespace everboot::update

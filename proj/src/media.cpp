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

#include "everboot/media.hpp"

#include <algorithm>

#include "everboot/digest.hpp"

namespace everboot::media {

// --- Paths and trees ---------------------------------------------------------

std::optional<std::string> normalize_path(std::string_view path) {
  std::vector<std::string> parts;
  for (std::string_view piece : split(path, '/')) {
    if (piece.empty() || piece == ".") continue;
    if (piece == "..") {
      if (parts.empty()) return std::nullopt;  // climbs above the root
      parts.pop_back();
      continue;
    }
    parts.emplace_back(piece);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += '/';
    out += parts[i];
  }
  return out;
}

Result<void> FileTree::write(std::string_view path, FileNode node) {
  auto norm = normalize_path(path);
  if (!norm || norm->empty()) return Error{"BadPath", "unusable path: " + std::string(path)};
  files_[*norm] = std::move(node);
  return {};
}

bool FileTree::remove(std::string_view path) {
  auto norm = normalize_path(path);
  if (!norm) return false;
  return files_.erase(*norm) > 0;
}

const FileNode* FileTree::find(std::string_view path) const {
  auto norm = normalize_path(path);
  if (!norm) return nullptr;
  auto it = files_.find(*norm);
  return it == files_.end() ? nullptr : &it->second;
}

bool FileTree::rename(std::string_view from, std::string_view to) {
  auto nf = normalize_path(from);
  auto nt = normalize_path(to);
  if (!nf || !nt || nt->empty()) return false;
  auto it = files_.find(*nf);
  if (it == files_.end()) return false;
  FileNode node = std::move(it->second);
  files_.erase(it);
  files_[*nt] = std::move(node);
  return true;
}

std::vector<std::string> FileTree::list(std::string_view prefix) const {
  auto norm = normalize_path(prefix);
  std::vector<std::string> out;
  if (!norm) return out;
  for (const auto& [path, node] : files_) {
    if (norm->empty() || path == *norm || path.starts_with(*norm + "/")) out.push_back(path);
  }
  return out;
}

std::vector<std::string> FileTree::list_dir(std::string_view dir) const {
  auto norm = normalize_path(dir);
  std::vector<std::string> out;
  if (!norm) return out;
  std::string prefix = norm->empty() ? "" : *norm + "/";
  for (const auto& [path, node] : files_) {
    if (!path.starts_with(prefix)) continue;
    std::string rest = path.substr(prefix.size());
    if (rest.find('/') == std::string::npos) out.push_back(rest);
  }
  return out;
}

std::uint64_t FileTree::total_bytes() const {
  std::uint64_t sum = 0;
  for (const auto& [path, node] : files_) sum += node.content.size();
  return sum;
}

std::string FileTree::content_hash() const {
  // std::map keeps entries sorted, so this is content-deterministic.
  Bytes material;
  for (const auto& [path, node] : files_) {
    material.insert(material.end(), path.begin(), path.end());
    material.push_back(0);
    material.push_back(node.exec ? 1 : 0);
    std::uint64_t n = node.content.size();
    for (int i = 0; i < 8; ++i) material.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    material.insert(material.end(), node.content.begin(), node.content.end());
  }
  return digest_hex(DigestAlgorithm::Sha256, material);
}

// --- Media -------------------------------------------------------------------

std::string_view medium_kind_name(MediumKind kind) {
  switch (kind) {
    case MediumKind::BootImage:
      return "BootImage";
    case MediumKind::ConfigFloppy:
      return "ConfigFloppy";
    case MediumKind::HardDisk:
      return "HardDisk";
  }
  return "?";
}

std::optional<MediumKind> parse_medium_kind(std::string_view name) {
  if (name == "BootImage") return MediumKind::BootImage;
  if (name == "ConfigFloppy") return MediumKind::ConfigFloppy;
  if (name == "HardDisk") return MediumKind::HardDisk;
  return std::nullopt;
}

Result<void> VirtualMedium::set_write_locked(bool locked) {
  if (kind == MediumKind::BootImage && !locked) {
    return Error{"ImageAlwaysLocked", "boot images cannot be write-enabled"};
  }
  write_locked_ = locked;
  return {};
}

Result<void> VirtualMedium::write_file(std::string_view path, FileNode node) {
  if (!present) return Error{"MediumAbsent", medium_id + " is not in the drive"};
  if (write_locked_) return Error{"WriteLocked", medium_id + " is write-locked"};
  return tree.write(path, std::move(node));
}

Result<void> VirtualMedium::remove_file(std::string_view path) {
  if (!present) return Error{"MediumAbsent", medium_id + " is not in the drive"};
  if (write_locked_) return Error{"WriteLocked", medium_id + " is write-locked"};
  tree.remove(path);
  return {};
}

std::string_view probe_result_name(ProbeResult r) {
  switch (r) {
    case ProbeResult::Locked:
      return "Locked";
    case ProbeResult::Writable:
      return "Writable";
    case ProbeResult::Absent:
      return "Absent";
  }
  return "?";
}

ProbeResult probe_write_lock(VirtualMedium& medium, BootLog* log, std::uint64_t epoch, double t) {
  ProbeResult result;
  std::string noise;
  if (!medium.present) {
    result = ProbeResult::Absent;
    noise = "mount_failed_no_medium";
  } else {
    // The only reliable test is attempting a write and watching it fail.
    auto attempt = medium.write_file(".writetest", FileNode{to_bytes("probe"), false});
    if (attempt.ok()) {
      medium.remove_file(".writetest").ok();  // roll the scratch write back
      result = ProbeResult::Writable;
      noise = "scratch_write_succeeded";
    } else {
      result = ProbeResult::Locked;
      noise = "write_error_expected_on_locked_medium";
    }
  }
  if (log != nullptr) {
    // The kernel's alarming-but-harmless chatter, kept and marked benign.
    log->append(epoch, t, "probe_noise", {{"id", medium.medium_id}, {"benign", "1"}, {"msg", noise}});
    log->append(epoch, t, "probe",
                {{"id", medium.medium_id}, {"result", std::string(probe_result_name(result))}});
  }
  return result;
}

// --- Storage layout ----------------------------------------------------------

std::string MountFlags::render() const {
  std::string out;
  auto add = [&](const char* f) {
    if (!out.empty()) out += ',';
    out += f;
  };
  if (noexec) add("noexec");
  if (nosuid) add("nosuid");
  if (nodev) add("nodev");
  if (out.empty()) out = "rw";
  return out;
}

std::string FstabEntry::line() const {
  std::string joined;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (i > 0) joined += ',';
    joined += flags[i];
  }
  if (joined.empty()) joined = "rw";
  return device + " " + mountpoint + " " + fstype + " " + joined;
}

std::string StorageLayout::fstab_text() const {
  std::string out;
  for (const FstabEntry& e : fstab_entries) {
    out += e.line();
    out += '\n';
  }
  return out;
}

Result<StorageLayout> plan_storage_layout(std::vector<VirtualMedium*> disks,
                                          bool already_partitioned,
                                          const PermissionCallback& permission, BootLog* log,
                                          std::uint64_t epoch, double t) {
  if (disks.empty()) return Error{"NoStorage", "no hard disks present"};

  StorageLayout layout;
  if (already_partitioned) {
    // Re-boot of a partitioned machine: reproduce the stored layout, no
    // permission prompt.
    layout.swap_bytes = disks.front()->swap_bytes;
    for (VirtualMedium* disk : disks) {
      std::uint64_t start = (disk == disks.front()) ? disk->swap_bytes : 0;
      layout.content_filesystems.push_back({disk->medium_id, start, disk->size_bytes});
    }
  } else {
    if (!permission || !permission("partition disks for swap and content filesystems?")) {
      return Error{"PermissionDenied", "operator declined partitioning"};
    }
    VirtualMedium* first = disks.front();
    layout.swap_bytes = first->size_bytes >= 2 * kGiB ? kSwapTarget : first->size_bytes / 2;
    layout.content_filesystems.push_back({first->medium_id, layout.swap_bytes, first->size_bytes});
    for (std::size_t i = 1; i < disks.size(); ++i) {
      layout.content_filesystems.push_back({disks[i]->medium_id, 0, disks[i]->size_bytes});
    }
    for (VirtualMedium* disk : disks) {
      disk->partitioned = true;
      disk->swap_bytes = (disk == first) ? layout.swap_bytes : 0;
      if (log != nullptr) {
        log->append(epoch, t, "partition",
                    {{"disk", disk->medium_id},
                     {"swap", std::to_string(disk->swap_bytes)},
                     {"size", std::to_string(disk->size_bytes)}});
      }
    }
  }

  layout.fstab_entries.push_back(
      {disks.front()->medium_id + ".swap", "none", "swap", {"sw"}});
  // The memory filesystem that will be created later in the swap space.
  layout.fstab_entries.push_back({"mfs:" + disks.front()->medium_id + ".swap", "/dist", "mfs", {"rw"}});
  // Persistent filesystems always carry all three restriction flags.
  int index = 0;
  for (const ContentRange& range : layout.content_filesystems) {
    layout.fstab_entries.push_back({range.medium_id + ".content",
                                    "/content" + std::to_string(index++),
                                    "ffs",
                                    {"rw", "noexec", "nosuid", "nodev"}});
  }
  return layout;
}

// --- Evanescent root -----------------------------------------------------------

Result<void> EvanescentRoot::write(std::string_view store_path, FileNode node) {
  std::uint64_t incoming = node.content.size();
  if (capacity_bytes > 0 && store.total_bytes() + incoming > capacity_bytes) {
    return Error{"EvanescentFull", "memory filesystem capacity exceeded"};
  }
  return store.write(store_path, std::move(node));
}

void EvanescentRoot::teardown() {
  store.clear();
  redirections.clear();
}

Result<EvanescentRoot> assemble_evanescent_root(const StorageLayout& layout,
                                                const std::vector<std::string>& system_dirs,
                                                const FileTree& source_namespace,
                                                std::uint64_t epoch, BootLog* log, double t) {
  EvanescentRoot root;
  root.epoch = epoch;
  root.capacity_bytes = layout.swap_bytes;

  std::size_t copied = 0;
  for (const std::string& dir : system_dirs) {
    auto norm = normalize_path(dir);
    if (!norm || norm->empty()) continue;
    std::string store_prefix = "dist/" + *norm;
    for (const std::string& path : source_namespace.list(*norm)) {
      const FileNode* node = source_namespace.find(path);
      std::string inside = path.substr(norm->size());
      auto written = root.write(store_prefix + inside, *node);
      if (!written.ok()) return written.error();
      ++copied;
    }
    root.redirections["/" + *norm] = store_prefix;
  }
  if (log != nullptr) {
    log->append(epoch, t, "evanescent_assembled",
                {{"dirs", std::to_string(system_dirs.size())}, {"files", std::to_string(copied)}});
  }
  return root;
}

// --- VFS ------------------------------------------------------------------------

std::string_view backing_name(Backing b) {
  switch (b) {
    case Backing::Evanescent:
      return "evanescent";
    case Backing::BootImage:
      return "image";
    case Backing::ConfigFloppy:
      return "floppy";
    case Backing::PersistentDisk:
      return "disk";
    case Backing::RamDisk:
      return "ramdisk";
  }
  return "?";
}

void Vfs::clear() {
  mounts_.clear();
  root_ = nullptr;
  ramdisk_ = nullptr;
  media_.clear();
}

void Vfs::add_mount(Mount mount) { mounts_.push_back(std::move(mount)); }

void Vfs::register_medium(const VirtualMedium* medium) {
  media_[medium->medium_id] = medium;
}

std::optional<ResolvedPath> Vfs::resolve(std::string_view ns_path) const {
  auto norm = normalize_path(ns_path);
  if (!norm) return std::nullopt;
  std::string path = "/" + *norm;

  // Redirections first: they replaced the original directories.
  if (root_ != nullptr) {
    std::string best_dir;
    const std::string* best_target = nullptr;
    for (const auto& [dir, target] : root_->redirections) {
      if ((path == dir || path.starts_with(dir + "/")) && dir.size() > best_dir.size()) {
        best_dir = dir;
        best_target = &target;
      }
    }
    if (best_target != nullptr) {
      std::string inside = path.substr(best_dir.size());
      return ResolvedPath{Backing::Evanescent, "", *best_target + inside, MountFlags{}};
    }
  }

  const Mount* best = nullptr;
  for (const Mount& m : mounts_) {
    if (path == m.prefix || path.starts_with(m.prefix == "/" ? "/" : m.prefix + "/")) {
      if (best == nullptr || m.prefix.size() > best->prefix.size()) best = &m;
    }
  }
  if (best == nullptr) return std::nullopt;
  std::string inside = path.substr(best->prefix == "/" ? 0 : best->prefix.size());
  std::string joined = best->inner_prefix.empty() ? inside : best->inner_prefix + inside;
  auto inner = normalize_path(joined);
  if (!inner) return std::nullopt;
  return ResolvedPath{best->backing, best->medium_id, *inner, best->flags};
}

const FileNode* Vfs::read(std::string_view ns_path) const {
  auto resolved = resolve(ns_path);
  if (!resolved) return nullptr;
  switch (resolved->backing) {
    case Backing::Evanescent:
      return root_ != nullptr ? root_->store.find(resolved->path) : nullptr;
    case Backing::RamDisk:
      return ramdisk_ != nullptr ? ramdisk_->find(resolved->path) : nullptr;
    default: {
      auto it = media_.find(resolved->medium_id);
      if (it == media_.end() || !it->second->present) return nullptr;
      return it->second->tree.find(resolved->path);
    }
  }
}

std::string_view exec_decision_name(ExecDecision d) {
  return d == ExecDecision::Allowed ? "Allowed" : "DeniedNoexec";
}

Result<ExecDecision> exec_check(const Vfs& vfs, std::string_view path, BootLog* log,
                                std::uint64_t epoch, double t) {
  auto resolved = vfs.resolve(path);
  if (!resolved || vfs.read(path) == nullptr) {
    return Error{"NotFound", "no such file: " + std::string(path)};
  }
  ExecDecision decision =
      (resolved->backing == Backing::Evanescent || resolved->backing == Backing::BootImage)
          ? ExecDecision::Allowed
          : ExecDecision::DeniedNoexec;
  if (log != nullptr) {
    log->append(epoch, t, "exec_check",
                {{"path", std::string(path)},
                 {"decision", std::string(exec_decision_name(decision))},
                 {"backing", std::string(backing_name(resolved->backing))}});
  }
  return decision;
}

}  // namespace everboot::media

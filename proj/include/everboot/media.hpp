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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "everboot/common.hpp"
#include "everboot/log.hpp"

namespace everboot::media {

struct FileNode {
  Bytes content;
  bool exec = false;

  friend bool operator==(const FileNode&, const FileNode&) = default;
};

/// Lexically normalizes a path ("a//b/./../c" -> "a/c"). Leading slashes
/// are dropped; nullopt when the path climbs above its root.
std::optional<std::string> normalize_path(std::string_view path);

/// In-memory file tree keyed by normalized relative paths.
class FileTree {
 public:
  using Map = std::map<std::string, FileNode>;

  Result<void> write(std::string_view path, FileNode node);
  bool remove(std::string_view path);
  const FileNode* find(std::string_view path) const;
  bool exists(std::string_view path) const { return find(path) != nullptr; }
  bool rename(std::string_view from, std::string_view to);

  // Paths of files at or under `prefix` ("" lists everything).
  std::vector<std::string> list(std::string_view prefix = "") const;
  // Immediate file names inside directory `dir`, no recursion.
  std::vector<std::string> list_dir(std::string_view dir) const;

  const Map& files() const { return files_; }
  std::size_t file_count() const { return files_.size(); }
  std::uint64_t total_bytes() const;
  void clear() { files_.clear(); }

  /// sha256 over the sorted (path, exec, content) entries; two trees with
  /// equal hash hold identical content.
  std::string content_hash() const;

  friend bool operator==(const FileTree&, const FileTree&) = default;

 private:
  Map files_;
};

enum class MediumKind { BootImage, ConfigFloppy, HardDisk };

std::string_view medium_kind_name(MediumKind kind);
std::optional<MediumKind> parse_medium_kind(std::string_view name);

/// A simulated medium: the boot image, the configuration floppy, or a
/// hard disk. Boot images are permanently write-locked; writes through a
/// locked medium fail and leave the tree untouched.
class VirtualMedium {
 public:
  VirtualMedium() = default;
  VirtualMedium(std::string id, MediumKind kind)
      : medium_id(std::move(id)), kind(kind), write_locked_(kind == MediumKind::BootImage) {}

  std::string medium_id;
  MediumKind kind = MediumKind::HardDisk;
  bool present = true;
  std::uint64_t size_bytes = 0;  // disks only
  // Partition state, persisted across boots once phase 0 has run.
  bool partitioned = false;
  std::uint64_t swap_bytes = 0;
  FileTree tree;

  bool write_locked() const { return write_locked_; }
  Result<void> set_write_locked(bool locked);

  Result<void> write_file(std::string_view path, FileNode node);
  Result<void> remove_file(std::string_view path);

 private:
  bool write_locked_ = false;
};

enum class ProbeResult { Locked, Writable, Absent };
std::string_view probe_result_name(ProbeResult r);

/// Write-lock state is tested, never assumed: attempt a scratch write and
/// watch it fail. A successful scratch write is rolled back. Each probe
/// appends a benign diagnostic-noise record to the log, mirroring the
/// kernel chatter a real probe produces.
ProbeResult probe_write_lock(VirtualMedium& medium, BootLog* log = nullptr,
                             std::uint64_t epoch = 0, double t = 0.0);

struct MountFlags {
  bool noexec = false;
  bool nosuid = false;
  bool nodev = false;

  std::string render() const;  // "noexec,nosuid,nodev" joined as applicable
};

struct FstabEntry {
  std::string device;
  std::string mountpoint;
  std::string fstype;
  std::vector<std::string> flags;

  std::string line() const;  // "<device> <mountpoint> <fstype> <flags>"
};

struct ContentRange {
  std::string medium_id;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;  // exclusive

  std::uint64_t bytes() const { return end - begin; }
};

struct StorageLayout {
  std::uint64_t swap_bytes = 0;
  std::vector<ContentRange> content_filesystems;
  std::vector<FstabEntry> fstab_entries;

  std::string fstab_text() const;
};

using PermissionCallback = std::function<bool(const std::string& question)>;

inline constexpr std::uint64_t kGiB = 1024ULL * 1024ULL * 1024ULL;
inline constexpr std::uint64_t kSwapTarget = kGiB;

/// Plans swap and content filesystems across the machine's disks. First
/// disk gets ~1 GiB of swap (half the disk when it is smaller than
/// 2 GiB), the remainder and all other disks hold content. Asks
/// permission before partitioning; an already-partitioned machine gets
/// its stored layout back untouched with no permission prompt.
Result<StorageLayout> plan_storage_layout(std::vector<VirtualMedium*> disks,
                                          bool already_partitioned,
                                          const PermissionCallback& permission,
                                          BootLog* log = nullptr, std::uint64_t epoch = 0,
                                          double t = 0.0);

/// The memory-backed root the system runs from. Assembled at boot,
/// destroyed at shutdown; nothing executed by the system persists.
struct EvanescentRoot {
  FileTree store;
  // System-directory path -> store path, e.g. "/etc" -> "dist/etc".
  // Modeled as explicit map entries rather than literal symlinks so
  // resolution is deterministic in the simulator.
  std::map<std::string, std::string> redirections;
  std::uint64_t epoch = 0;
  std::uint64_t capacity_bytes = 0;

  Result<void> write(std::string_view store_path, FileNode node);
  std::string content_hash() const { return store.content_hash(); }
  void teardown();
};

Result<EvanescentRoot> assemble_evanescent_root(const StorageLayout& layout,
                                                const std::vector<std::string>& system_dirs,
                                                const FileTree& source_namespace,
                                                std::uint64_t epoch, BootLog* log = nullptr,
                                                double t = 0.0);

enum class Backing { Evanescent, BootImage, ConfigFloppy, PersistentDisk, RamDisk };
std::string_view backing_name(Backing b);

struct Mount {
  std::string prefix;  // namespace path, e.g. "/image"
  Backing backing = Backing::RamDisk;
  std::string medium_id;
  std::string inner_prefix;  // path prefix inside the medium's tree
  MountFlags flags;
};

struct ResolvedPath {
  Backing backing = Backing::RamDisk;
  std::string medium_id;
  std::string path;  // tree-relative path inside the backing store
  MountFlags flags;
};

/// The booted machine's file name space: mounts plus the evanescent
/// root's redirections. Longest-prefix wins; redirections out-rank
/// mounts, which is what the copy-plus-redirect scheme produces.
class Vfs {
 public:
  void clear();
  void add_mount(Mount mount);
  void set_root(const EvanescentRoot* root) { root_ = root; }
  void set_ramdisk(const FileTree* ramdisk) { ramdisk_ = ramdisk; }
  void register_medium(const VirtualMedium* medium);

  std::optional<ResolvedPath> resolve(std::string_view ns_path) const;
  const FileNode* read(std::string_view ns_path) const;

 private:
  std::vector<Mount> mounts_;
  const EvanescentRoot* root_ = nullptr;
  const FileTree* ramdisk_ = nullptr;
  std::map<std::string, const VirtualMedium*> media_;
};

enum class ExecDecision { Allowed, DeniedNoexec };
std::string_view exec_decision_name(ExecDecision d);

/// Allowed only when the resolved backing store is the evanescent root or
/// a read-only boot-image directory; everything persistent and writable
/// is noexec. Unresolvable paths are an error, not a decision.
Result<ExecDecision> exec_check(const Vfs& vfs, std::string_view path, BootLog* log = nullptr,
                                std::uint64_t epoch = 0, double t = 0.0);

}  // namespace everboot::media

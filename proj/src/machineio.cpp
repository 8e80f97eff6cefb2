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

#include "everboot/machineio.hpp"

#include <fstream>
#include <map>
#include <system_error>

namespace everboot::machineio {

namespace fs = std::filesystem;

namespace {

Result<void> write_file(const fs::path& path, std::span<const std::uint8_t> bytes, bool exec) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return Error{"IoError", "cannot write " + path.string()};
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  fs::permissions(path,
                  exec ? fs::perms::owner_all | fs::perms::group_read | fs::perms::others_read
                       : fs::perms::owner_read | fs::perms::owner_write | fs::perms::group_read |
                             fs::perms::others_read,
                  ec);
  return {};
}

Result<Bytes> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Error{"IoError", "cannot read " + path.string()};
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

bool is_exec(const fs::path& path) {
  std::error_code ec;
  auto perms = fs::status(path, ec).permissions();
  return !ec && (perms & fs::perms::owner_exec) != fs::perms::none;
}

std::map<std::string, std::string> parse_kv(std::string_view text) {
  std::map<std::string, std::string> out;
  for (std::string_view raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    out[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  return out;
}

std::string rel_path(const fs::path& root, const fs::path& full) {
  std::error_code ec;
  return fs::relative(full, root, ec).generic_string();
}

}  // namespace

Result<void> save_tree(const media::FileTree& tree, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (const auto& [path, node] : tree.files()) {
    auto written = write_file(dir / path, node.content, node.exec);
    if (!written.ok()) return written.error();
  }
  return {};
}

Result<media::FileTree> load_tree(const fs::path& dir) {
  media::FileTree tree;
  if (!fs::exists(dir)) return tree;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = rel_path(dir, entry.path());
    auto bytes = read_file(entry.path());
    if (!bytes.ok()) return bytes.error();
    auto put = tree.write(rel, {bytes.take(), is_exec(entry.path())});
    if (!put.ok()) return put.error();
  }
  return tree;
}

Result<void> save_medium(const media::VirtualMedium& medium, const fs::path& dir) {
  std::error_code ec;
  // Rewrite from scratch so removed files do not linger.
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);

  std::string header;
  header += "id=" + medium.medium_id + "\n";
  header += "kind=" + std::string(media::medium_kind_name(medium.kind)) + "\n";
  header += std::string("locked=") + (medium.write_locked() ? "1" : "0") + "\n";
  header += std::string("present=") + (medium.present ? "1" : "0") + "\n";
  if (medium.kind == media::MediumKind::HardDisk) {
    header += "size=" + std::to_string(medium.size_bytes) + "\n";
    header += std::string("partitioned=") + (medium.partitioned ? "1" : "0") + "\n";
    header += "swap=" + std::to_string(medium.swap_bytes) + "\n";
  }
  auto wrote = write_file(dir / "MEDIUM", to_bytes(header), false);
  if (!wrote.ok()) return wrote.error();
  return save_tree(medium.tree, dir);
}

Result<media::VirtualMedium> load_medium(const fs::path& dir) {
  auto header_bytes = read_file(dir / "MEDIUM");
  if (!header_bytes.ok()) return Error{"BadMedium", "missing MEDIUM header in " + dir.string()};
  auto kv = parse_kv(to_string(header_bytes.value()));

  auto kind = media::parse_medium_kind(kv.count("kind") ? kv["kind"] : "");
  if (!kind) return Error{"BadMedium", "bad kind in " + dir.string()};
  std::string id = kv.count("id") ? kv["id"] : dir.filename().string();

  media::VirtualMedium medium(id, *kind);
  medium.present = kv.count("present") == 0 || kv["present"] == "1";
  if (kv.count("size")) medium.size_bytes = std::strtoull(kv["size"].c_str(), nullptr, 10);
  if (kv.count("partitioned")) medium.partitioned = kv["partitioned"] == "1";
  if (kv.count("swap")) medium.swap_bytes = std::strtoull(kv["swap"].c_str(), nullptr, 10);

  auto tree = load_tree(dir);
  if (!tree.ok()) return tree.error();
  medium.tree = tree.take();
  medium.tree.remove("MEDIUM");

  // Locking last: tree assignment above bypasses the write gate.
  bool locked = kv.count("locked") ? kv["locked"] == "1" : (*kind == media::MediumKind::BootImage);
  if (*kind != media::MediumKind::BootImage) medium.set_write_locked(locked).ok();
  return medium;
}

Result<void> save_machine(const boot::VirtualMachine& machine, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);

  std::string state;
  state += "name=" + machine.name + "\n";
  state += "epoch=" + std::to_string(machine.epoch) + "\n";
  state += "phase=" + std::string(boot::phase_name(machine.phase)) + "\n";
  state += "seed=" + std::to_string(machine.seed) + "\n";
  char now_buf[64];
  std::snprintf(now_buf, sizeof(now_buf), "now=%.17g\n", machine.now);
  state += now_buf;
  state += std::string("cd_recognized=") + (machine.cd_recognized ? "1" : "0") + "\n";
  if (machine.package_bytes_override) {
    state += "package_bytes_override=" + std::to_string(*machine.package_bytes_override) + "\n";
  }
  // %.17g keeps the doubles bit-exact across save/load cycles.
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "cost_fixed_s=%.17g\ncost_signature_s=%.17g\ncost_base_s=%.17g\ncost_rate_bps=%.17g\n",
                machine.cost_model.fixed_overhead_s, machine.cost_model.signature_check_s,
                machine.cost_model.base_install_s, machine.cost_model.package_rate_bytes_per_s);
  state += buf;
  auto wrote = write_file(dir / "MACHINE", to_bytes(state), false);
  if (!wrote.ok()) return wrote.error();

  for (const auto& medium : machine.media) {
    auto saved = save_medium(medium, dir / medium.medium_id);
    if (!saved.ok()) return saved.error();
  }

  wrote = write_file(dir / "boot.log", to_bytes(machine.log.render()), false);
  if (!wrote.ok()) return wrote.error();
  return write_file(dir / "report.txt", to_bytes(machine.last_report.render()), false);
}

Result<boot::VirtualMachine> load_machine(const fs::path& dir) {
  auto state_bytes = read_file(dir / "MACHINE");
  if (!state_bytes.ok()) {
    return Error{"BadMachine", "missing MACHINE file in " + dir.string()};
  }
  auto kv = parse_kv(to_string(state_bytes.value()));

  boot::VirtualMachine machine;
  if (kv.count("name")) machine.name = kv["name"];
  if (kv.count("epoch")) machine.epoch = std::strtoull(kv["epoch"].c_str(), nullptr, 10);
  if (kv.count("phase")) {
    if (auto p = boot::parse_phase(kv["phase"])) machine.phase = *p;
  }
  if (kv.count("seed")) machine.seed = std::strtoull(kv["seed"].c_str(), nullptr, 10);
  if (kv.count("now")) machine.now = std::strtod(kv["now"].c_str(), nullptr);
  if (kv.count("cd_recognized")) machine.cd_recognized = kv["cd_recognized"] == "1";
  if (kv.count("package_bytes_override")) {
    machine.package_bytes_override =
        std::strtoull(kv["package_bytes_override"].c_str(), nullptr, 10);
  }
  if (kv.count("cost_fixed_s")) {
    machine.cost_model.fixed_overhead_s = std::strtod(kv["cost_fixed_s"].c_str(), nullptr);
  }
  if (kv.count("cost_signature_s")) {
    machine.cost_model.signature_check_s = std::strtod(kv["cost_signature_s"].c_str(), nullptr);
  }
  if (kv.count("cost_base_s")) {
    machine.cost_model.base_install_s = std::strtod(kv["cost_base_s"].c_str(), nullptr);
  }
  if (kv.count("cost_rate_bps")) {
    machine.cost_model.package_rate_bytes_per_s = std::strtod(kv["cost_rate_bps"].c_str(), nullptr);
  }

  // Media are the subdirectories carrying a MEDIUM header. BootImage
  // first so first_medium finds the boot medium deterministically.
  std::vector<fs::path> medium_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "MEDIUM")) {
      medium_dirs.push_back(entry.path());
    }
  }
  std::sort(medium_dirs.begin(), medium_dirs.end());
  for (const fs::path& medium_dir : medium_dirs) {
    auto medium = load_medium(medium_dir);
    if (!medium.ok()) return medium.error();
    machine.media.push_back(medium.take());
  }

  if (fs::exists(dir / "boot.log")) {
    auto log_bytes = read_file(dir / "boot.log");
    if (log_bytes.ok()) machine.log = BootLog::parse(to_string(log_bytes.value()));
  }
  if (fs::exists(dir / "report.txt")) {
    auto report_bytes = read_file(dir / "report.txt");
    if (report_bytes.ok()) {
      auto report = boot::BootReport::parse(to_string(report_bytes.value()));
      if (report.ok()) machine.last_report = report.take();
    }
  }
  return machine;
}

}  // namespace everboot::machineio

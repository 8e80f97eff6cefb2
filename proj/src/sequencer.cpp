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

#include <algorithm>
#include <cmath>

#include "everboot/boot.hpp"
#include "everboot/update.hpp"

namespace everboot::boot {

namespace {

constexpr std::string_view kUpdaterProcess = "updater";

void emit_media_states(VirtualMachine& machine) {
  for (const auto& medium : machine.media) {
    machine.log_event("medium_state",
                      {{"id", medium.medium_id},
                       {"kind", std::string(media::medium_kind_name(medium.kind))},
                       {"locked", medium.write_locked() ? "1" : "0"},
                       {"present", medium.present ? "1" : "0"}});
  }
}

void log_medium_state(VirtualMachine& machine, const media::VirtualMedium& medium) {
  machine.log_event("medium_state",
                    {{"id", medium.medium_id},
                     {"kind", std::string(media::medium_kind_name(medium.kind))},
                     {"locked", medium.write_locked() ? "1" : "0"},
                     {"present", medium.present ? "1" : "0"}});
}

void raise_network(VirtualMachine& machine, std::string_view why) {
  machine.network_up = true;
  machine.log_event("net_up", {{"reason", std::string(why)}});
}

void lower_network(VirtualMachine& machine, std::string_view why) {
  machine.network_up = false;
  machine.log_event("net_down", {{"reason", std::string(why)}});
}

// Install-target resolution: archive paths land in the evanescent store
// via the redirections (or directly under /dist); anything else would
// write outside the store and is rejected.
std::optional<std::string> resolve_install_target(const media::EvanescentRoot& root,
                                                  std::string_view archive_path) {
  auto norm = media::normalize_path(archive_path);
  if (!norm || norm->empty()) return std::nullopt;
  std::string ns = "/" + *norm;
  std::string best_dir;
  const std::string* best_target = nullptr;
  for (const auto& [dir, target] : root.redirections) {
    if ((ns == dir || ns.starts_with(dir + "/")) && dir.size() > best_dir.size()) {
      best_dir = dir;
      best_target = &target;
    }
  }
  if (best_target != nullptr) return *best_target + ns.substr(best_dir.size());
  if (ns.starts_with("/dist/")) return ns.substr(1);
  return std::nullopt;
}

double jittered_interval(const UpdateSchedule& schedule, std::uint64_t draw) {
  if (schedule.jitter_fraction <= 0) return schedule.interval_s;
  double u = sim::Rng(sim::Rng::mix(schedule.rng_seed, draw)).unit();
  return schedule.interval_s * (1.0 + schedule.jitter_fraction * (2.0 * u - 1.0));
}

}  // namespace

// --- Phase 0 -------------------------------------------------------------------

Result<void> run_phase0(VirtualMachine& machine, const BootEnv& env, BootReport& report,
                        media::StorageLayout& layout_out) {
  machine.set_phase(Phase::Phase0);

  auto disks = machine.disks();
  if (disks.empty()) {
    report.warnings.push_back("NoStorage: no hard disks present, boot halted in Phase0");
    machine.log_event("halt", {{"reason", "NoStorage"}});
    return Error{"NoStorage", "no hard disks present"};
  }

  bool already_partitioned =
      std::all_of(disks.begin(), disks.end(), [](const media::VirtualMedium* d) {
        return d->partitioned;
      });

  auto layout = media::plan_storage_layout(disks, already_partitioned, env.partition_permission,
                                           &machine.log, machine.epoch, machine.now);
  if (!layout.ok()) {
    report.warnings.push_back(layout.error().render() + ", boot halted in Phase0");
    machine.log_event("halt", {{"reason", layout.error().code}});
    return layout.error();
  }
  layout_out = layout.take();

  machine.log_event("swap_on", {{"bytes", std::to_string(layout_out.swap_bytes)}});
  // fstab lands in the staging /etc; Phase1 copies it into the
  // evanescent root along with the rest of the system directories.
  machine.ramdisk.write("etc/fstab", {to_bytes(layout_out.fstab_text()), false}).ok();
  machine.log_event("fstab_written",
                    {{"entries", std::to_string(layout_out.fstab_entries.size())}});
  return {};
}

// --- Install execution ----------------------------------------------------------

Result<void> execute_install_plan(VirtualMachine& machine, const resolve::InstallPlan& plan,
                                  BootReport& report) {
  if (!plan.complete()) {
    return Error{"PlanIncomplete", "refusing to execute a hunkered-down plan"};
  }
  if (!machine.root) return Error{"NoRoot", "evanescent root not assembled"};
  media::EvanescentRoot& root = *machine.root;

  bool has_base = std::any_of(plan.steps.begin(), plan.steps.end(),
                              [](const resolve::InstallStep& s) {
                                return s.category == resolve::Category::Base;
                              });
  bool swap_done = false;
  auto finish_base = [&] {
    // Base sets are in place: swap the system-directory redirections
    // over to the installed copies before ports and applications go in.
    machine.log_event("redirect_swap", {{"stage", "base"}});
    machine.advance(machine.cost_model.base_install_s);
    report.durations.base_install_s = machine.cost_model.base_install_s;
    swap_done = true;
  };

  std::uint64_t other_bytes = 0;
  for (const resolve::InstallStep& step : plan.steps) {
    if (has_base && !swap_done && step.category != resolve::Category::Base) finish_base();

    const media::VirtualMedium* source = machine.find_medium(step.source_medium);
    const media::FileNode* node =
        source != nullptr ? source->tree.find(step.tree_path) : nullptr;
    if (node == nullptr) {
      report.warnings.push_back("planned package vanished: " + step.filename);
      return Error{"InstallFailed", "package vanished from " + step.source_medium};
    }
    auto contents = resolve::unpack_package(node->content);
    if (!contents.ok()) {
      report.warnings.push_back("unpack failed for " + step.filename + ": " +
                                contents.error().message);
      return Error{"InstallFailed", contents.error().message};
    }

    for (const resolve::ArchiveEntry& entry : contents.value().entries) {
      auto target = resolve_install_target(root, entry.path);
      if (!target) {
        report.warnings.push_back("package " + step.filename +
                                  " attempted to write outside the evanescent store: " +
                                  entry.path);
        machine.log_event("install_escape_rejected",
                          {{"name", step.name}, {"path", entry.path}});
        return Error{"InstallEscape", "payload path escapes the evanescent store"};
      }
      auto written = root.write(*target, {entry.content, entry.exec});
      if (!written.ok()) {
        report.warnings.push_back(written.error().render());
        return Error{"InstallFailed", written.error().message};
      }
      if (entry.exec) {
        // Installed executables must resolve back through the exec policy.
        auto decision = media::exec_check(machine.vfs, "/" + *media::normalize_path(entry.path),
                                          &machine.log, machine.epoch, machine.now);
        if (!decision.ok() || decision.value() != media::ExecDecision::Allowed) {
          return Error{"InstallFailed", "installed executable failed exec check: " + entry.path};
        }
      }
    }
    machine.log_event("install", {{"category", std::string(resolve::category_name(step.category))},
                                  {"name", step.name},
                                  {"version", step.version},
                                  {"source", step.source_medium},
                                  {"files", std::to_string(contents.value().entries.size())}});
    if (step.category != resolve::Category::Base) other_bytes += node->content.size();
    report.installed.emplace_back(step.name, step.version);
  }
  if (has_base && !swap_done) finish_base();

  std::uint64_t billed = machine.package_bytes_override.value_or(other_bytes);
  if (machine.cost_model.package_rate_bytes_per_s > 0) {
    double seconds = static_cast<double>(billed) / machine.cost_model.package_rate_bytes_per_s;
    machine.advance(seconds);
    report.durations.package_install_s = seconds;
  }
  return {};
}

// --- Phase 1 -------------------------------------------------------------------

Result<void> run_phase1(VirtualMachine& machine, const BootEnv& env, BootReport& report,
                        const media::StorageLayout& layout) {
  machine.set_phase(Phase::Phase1);

  // The floppy drive exists even when nothing is in it; pointers into
  // machine.media are taken only after this possible insertion.
  if (machine.first_medium(media::MediumKind::ConfigFloppy) == nullptr) {
    media::VirtualMedium empty_floppy("floppy", media::MediumKind::ConfigFloppy);
    empty_floppy.present = false;
    machine.media.push_back(std::move(empty_floppy));
  }

  // Mount the medium we booted from. The autoconfiguration sometimes
  // fails to recognize it; nothing can be installed then, so call for help.
  media::VirtualMedium* image = machine.first_medium(media::MediumKind::BootImage);
  if (image == nullptr || !image->present || !machine.cd_recognized) {
    machine.log_event("call_for_help", {{"reason", "boot_image_mount_failed"}});
    machine.set_phase(Phase::CallForHelp);
    report.warnings.push_back("boot image could not be mounted; calling for help");
    return Error{"CallForHelp", "boot image mount failed"};
  }
  machine.vfs.register_medium(image);
  machine.vfs.add_mount({"/image", media::Backing::BootImage, image->medium_id, "", {}});
  machine.log_event("mount", {{"what", "/image"}, {"id", image->medium_id}});

  // Memory filesystem on /dist; /tmp moves into it before the RAMdisk
  // runs out of space. Staged temporary data must survive the move.
  machine.root.emplace();
  machine.root->epoch = machine.epoch;
  machine.root->capacity_bytes = layout.swap_bytes;
  machine.vfs.set_root(&*machine.root);
  machine.vfs.set_ramdisk(&machine.ramdisk);
  machine.vfs.add_mount({"/", media::Backing::RamDisk, "", "", {}});
  machine.vfs.add_mount({"/dist", media::Backing::Evanescent, "", "dist", {}});
  machine.log_event("mount", {{"what", "/dist"}, {"fstype", "mfs"}});

  std::size_t tmp_moved = 0;
  for (const std::string& path : machine.ramdisk.list("tmp")) {
    auto written = machine.root->write("dist/" + path, *machine.ramdisk.find(path));
    if (!written.ok()) return written.error();
    ++tmp_moved;
  }
  for (const std::string& path : machine.ramdisk.list("tmp")) machine.ramdisk.remove(path);
  machine.root->redirections["/tmp"] = "dist/tmp";
  machine.log_event("tmp_relocated", {{"files", std::to_string(tmp_moved)}});

  // Content filesystems, always noexec/nosuid/nodev.
  media::MountFlags persistent{true, true, true};
  int content_index = 0;
  for (const media::ContentRange& range : layout.content_filesystems) {
    if (media::VirtualMedium* disk = machine.find_medium(range.medium_id)) {
      machine.vfs.register_medium(disk);
      std::string mountpoint = "/content" + std::to_string(content_index++);
      machine.vfs.add_mount({mountpoint, media::Backing::PersistentDisk, disk->medium_id, "",
                             persistent});
      machine.log_event("mount", {{"what", mountpoint}, {"id", disk->medium_id},
                                  {"flags", persistent.render()}});
    }
  }

  // Floppy discipline: absent -> wizard; write-enabled -> refuse until
  // locked; locked -> its configuration supersedes the image's.
  media::VirtualMedium* floppy = machine.first_medium(media::MediumKind::ConfigFloppy);
  media::ProbeResult probe =
      media::probe_write_lock(*floppy, &machine.log, machine.epoch, machine.now);

  if (probe == media::ProbeResult::Absent) {
    if (env.wizard == nullptr) {
      report.warnings.push_back("no configuration floppy and no interactive channel");
      machine.log_event("halt", {{"reason", "NoConfigChannel"}});
      return Error{"NoConfigChannel", "wizard required but no channel provided"};
    }
    auto cfg = run_config_wizard(machine, *env.wizard, env.net);
    if (!cfg.ok()) {
      report.warnings.push_back(cfg.error().render());
      machine.log_event("halt", {{"reason", cfg.error().code}});
      return cfg.error();
    }
    probe = media::probe_write_lock(*floppy, &machine.log, machine.epoch, machine.now);
  }

  int poll = 0;
  while (probe == media::ProbeResult::Writable) {
    machine.log_event("floppy_refused", {{"poll", std::to_string(poll)}});
    if (env.op != nullptr && env.op->on_writable_floppy(machine, poll)) {
      log_medium_state(machine, *floppy);
    }
    machine.advance(env.floppy_poll_interval_s);
    probe = media::probe_write_lock(*floppy, &machine.log, machine.epoch, machine.now);
    if (probe == media::ProbeResult::Writable && ++poll >= env.max_floppy_polls) {
      report.warnings.push_back("floppy_refused: configuration floppy never write-locked");
      machine.log_event("halt", {{"reason", "FloppyWritable"}});
      return Error{"FloppyWritable", "floppy stayed write-enabled"};
    }
  }

  machine.vfs.register_medium(floppy);
  if (probe == media::ProbeResult::Locked) {
    machine.vfs.add_mount({"/floppy", media::Backing::ConfigFloppy, floppy->medium_id, "",
                           media::MountFlags{true, true, true}});
    machine.log_event("mount", {{"what", "/floppy"}, {"id", floppy->medium_id}});
  }

  // Configuration: write-locked floppy supersedes the image default.
  const media::FileNode* cfg_node =
      probe == media::ProbeResult::Locked ? floppy->tree.find(kFloppyConfigPath) : nullptr;
  std::string cfg_source = "floppy";
  if (cfg_node == nullptr) {
    cfg_node = image->tree.find(kImageConfigPath);
    cfg_source = "image";
  }
  if (cfg_node == nullptr) {
    report.warnings.push_back("no configuration found on floppy or image");
    machine.log_event("halt", {{"reason", "NoConfiguration"}});
    return Error{"NoConfiguration", "no configuration available"};
  }
  auto cfg = ApplianceConfig::parse(to_string(cfg_node->content));
  if (!cfg.ok()) {
    report.warnings.push_back(cfg.error().render());
    machine.log_event("halt", {{"reason", cfg.error().code}});
    return cfg.error();
  }
  machine.config = cfg.take();
  machine.config_loaded = true;
  if (auto valid = machine.config.validate(); !valid.ok()) {
    report.warnings.push_back(valid.error().render());
    machine.log_event("halt", {{"reason", valid.error().code}});
    return valid.error();
  }
  machine.log_event("config_loaded", {{"source", cfg_source}});

  // Keyring comes only from write-locked media: the floppy, or the image
  // template as a fallback.
  const media::FileNode* ring_node =
      probe == media::ProbeResult::Locked ? floppy->tree.find(kFloppyKeyringPath) : nullptr;
  std::string ring_origin = floppy->medium_id;
  if (ring_node == nullptr) {
    ring_node = image->tree.find(kImageKeyringPath);
    ring_origin = image->medium_id;
    if (ring_node != nullptr && probe == media::ProbeResult::Locked) {
      report.warnings.push_back("floppy carries no keyring; using the image template");
    }
  }
  if (ring_node == nullptr) {
    report.warnings.push_back("no keyring available");
    machine.log_event("halt", {{"reason", "NoKeyring"}});
    return Error{"NoKeyring", "no keyring on floppy or image"};
  }
  auto ring = trust::Keyring::parse(to_string(ring_node->content), ring_origin);
  if (!ring.ok()) {
    report.warnings.push_back(ring.error().render());
    machine.log_event("halt", {{"reason", ring.error().code}});
    return ring.error();
  }
  machine.keyring = ring.take();
  machine.log_event("keyring_loaded", {{"origin", ring_origin},
                                       {"keys", std::to_string(machine.keyring.size())}});

  // The verifier runs straight off the read-only image; its testimony is
  // what the whole scheme rests on.
  if (image->tree.find(kImageVerifierTool) != nullptr) {
    media::exec_check(machine.vfs, "/image/" + std::string(kImageVerifierTool), &machine.log,
                      machine.epoch, machine.now)
        .ok();
  } else {
    report.warnings.push_back("image carries no verifier tool marker");
  }

  // Revocation check inside a daemon-free network window.
  raise_network(machine, "revocation_check");
  std::vector<std::string> sources = env.revocation_sources_override.empty()
                                         ? machine.config.revocation_sources()
                                         : env.revocation_sources_override;
  trust::RevocationReport rev;
  if (env.net != nullptr) {
    sim::NetRevocationTransport transport(
        *env.net, sim::ProcessTag{"verifier", false, true}, &machine.log, machine.epoch,
        machine.now);
    rev = trust::check_revocation(machine.keyring, sources, transport);
  } else {
    // No network model at all: every source is unreachable.
    rev.unreachable = sources;
    rev.degraded = true;
  }
  machine.log_event("revocation_check",
                    {{"reachable", std::to_string(rev.reachable.size())},
                     {"unreachable", std::to_string(rev.unreachable.size())},
                     {"degraded", rev.degraded ? "1" : "0"}});
  for (const std::string& id : rev.newly_revoked) {
    machine.log_event("key_revoked", {{"id", id}});
  }
  if (rev.degraded) {
    report.warnings.push_back(
        "revocation check degraded; keys keep their last-known status");
  }
  lower_network(machine, "revocation_check_done");

  // Valid-digest list over everything in the package path.
  std::vector<resolve::PathElement> path;
  path.push_back({floppy, ""});
  for (std::string_view dir : kImagePackageDirs) path.push_back({image, std::string(dir)});
  media::VirtualMedium* cache = update::cache_disk(machine);
  if (cache != nullptr) path.push_back({cache, std::string(kCacheDir)});

  resolve::ScanResult scan =
      resolve::scan_package_path(path, &machine.log, machine.epoch, machine.now);
  for (const std::string& warning : scan.warnings) report.warnings.push_back(warning);

  machine.advance(machine.cost_model.signature_check_s);
  report.durations.signature_check_s = machine.cost_model.signature_check_s;
  resolve::ValidDigestList valid =
      resolve::build_valid_digest_list(scan, machine.keyring, &machine.log, machine.epoch,
                                       machine.now);
  for (const auto& [digest, prov] : valid.provenance) {
    if (digest_deprecated(prov.algorithm)) {
      report.warnings.push_back("deprecated digest algorithm md5 validates " +
                                prov.manifest_filename);
      break;
    }
  }

  // Required package set, then the install plan.
  std::vector<resolve::Required> required = env.required_override;
  if (required.empty()) {
    if (const media::FileNode* req_node = image->tree.find(kImageRequiredPath)) {
      auto parsed = parse_required_list(to_string(req_node->content));
      if (!parsed.ok()) {
        report.warnings.push_back(parsed.error().render());
        machine.log_event("halt", {{"reason", parsed.error().code}});
        return parsed.error();
      }
      required = parsed.take();
    }
  }

  resolve::InstallPlan plan =
      resolve::resolve_install_plan(required, scan, valid, &machine.log, machine.epoch,
                                    machine.now);
  report.plan = plan;

  // Candidates newer than the planned version whose digests failed the
  // valid list were reverted past; the report says so explicitly.
  for (const resolve::InstallStep& step : plan.steps) {
    for (const resolve::FoundPackage& candidate : scan.packages) {
      if (candidate.name != step.name) continue;
      auto cmp = resolve::compare_versions(candidate.version, step.version);
      if (!cmp.ok() || cmp.value() != resolve::Ordering::Greater) continue;
      report.warnings.push_back("reverted: " + candidate.name + "-" + candidate.version +
                                " on " + candidate.medium_id +
                                " failed verification; selected " + step.version);
    }
  }

  if (!plan.complete()) {
    machine.log_event("hunker_down", {{"missing", plan.missing.empty() ? "-" : plan.missing[0]}});
    machine.set_phase(Phase::HunkerDown);
    report.warnings.push_back(
        "hunker-down: unverifiable required packages; appliance is network-inaccessible");
    return {};
  }

  // Copies of the system directories, originals redirected into the store.
  auto assembled = media::assemble_evanescent_root(layout, default_system_dirs(), machine.ramdisk,
                                                   machine.epoch, &machine.log, machine.now);
  if (!assembled.ok()) {
    report.warnings.push_back(assembled.error().render());
    machine.log_event("hunker_down", {{"missing", "-"}, {"reason", assembled.error().code}});
    machine.set_phase(Phase::HunkerDown);
    return assembled.error();
  }
  // Keep the relocated /tmp contents; they predate the assembly.
  media::EvanescentRoot fresh = assembled.take();
  for (const auto& [path_k, node] : machine.root->store.files()) {
    if (auto w = fresh.write(path_k, node); !w.ok()) {
      report.warnings.push_back(w.error().render());
      machine.set_phase(Phase::HunkerDown);
      return w.error();
    }
  }
  fresh.redirections["/tmp"] = "dist/tmp";
  *machine.root = std::move(fresh);

  auto executed = execute_install_plan(machine, plan, report);
  if (!executed.ok()) {
    machine.log_event("hunker_down", {{"reason", executed.error().code}});
    machine.set_phase(Phase::HunkerDown);
    return executed.error();
  }

  // Unmount the removable media; the running system keeps only the
  // memory filesystem and the content disks.
  machine.log_event("unmount", {{"what", "/image"}});
  if (probe == media::ProbeResult::Locked) machine.log_event("unmount", {{"what", "/floppy"}});
  return {};
}

// --- Start phase ------------------------------------------------------------------

Result<void> run_start_phase(VirtualMachine& machine, const BootEnv& env, BootReport& report) {
  machine.set_phase(Phase::Start);

  machine.watchdog.armed = true;
  machine.watchdog.last_reset = machine.now;
  machine.log_event("watchdog_armed",
                    {{"deadline_s", std::to_string(static_cast<int>(machine.watchdog.deadline_s))}});

  raise_network(machine, "services");

  // The daemon runs only when its configuration files exist.
  const media::FileNode* daemon_cfg = machine.vfs.read(kDaemonConfigPath);
  if (daemon_cfg == nullptr) {
    report.warnings.push_back("daemon configuration missing; running without daemon");
    machine.log_event("daemon_absent", {{"reason", "no_config"}});
  } else {
    auto decision = media::exec_check(machine.vfs, kDaemonBinaryPath, &machine.log, machine.epoch,
                                      machine.now);
    if (!decision.ok() || decision.value() != media::ExecDecision::Allowed) {
      report.warnings.push_back("daemon binary not executable; running without daemon");
      machine.log_event("daemon_absent", {{"reason", "no_binary"}});
    } else {
      machine.daemon.running = true;
      machine.daemon.last_heartbeat = machine.now;
      machine.watchdog.last_reset = machine.now;
      machine.log_event("daemon_started", {{"pid", "daemon"}, {"privileged", "0"}});
    }
  }

  // The update mechanism is reinstalled by every boot.
  machine.schedule.installed = true;
  machine.schedule.interval_s = machine.config.update_interval_s();
  machine.schedule.jitter_fraction = machine.config.update_jitter_fraction();
  machine.schedule.mirrors = machine.config.update_mirrors();
  machine.schedule.rng_seed = sim::Rng::mix(machine.seed, machine.epoch);
  machine.schedule.draw = 0;
  machine.schedule.next_at = machine.now + jittered_interval(machine.schedule, 0);
  machine.log_event("sched_installed",
                    {{"interval_s", std::to_string(static_cast<long>(machine.schedule.interval_s))},
                     {"mirrors", std::to_string(machine.schedule.mirrors.size())}});
  (void)env;

  machine.set_phase(Phase::Running);
  return {};
}

// --- Full boot ---------------------------------------------------------------------

BootReport boot_machine(VirtualMachine& machine, const BootEnv& env) {
  machine.epoch += 1;
  machine.set_phase(Phase::Reset);

  // Evanescent state from the previous epoch dies here.
  if (machine.root) machine.root->teardown();
  machine.root.reset();
  machine.vfs.clear();
  machine.ramdisk.clear();
  machine.keyring = trust::Keyring{};
  machine.config = ApplianceConfig{};
  machine.config_loaded = false;
  machine.network_up = false;
  double carried_fail_at = machine.daemon.fail_at;
  machine.daemon = DaemonStub{};
  machine.daemon.fail_at = carried_fail_at;
  machine.watchdog = Watchdog{};
  machine.schedule = UpdateSchedule{};

  // Every machine has a floppy drive, possibly with nothing in it.
  if (machine.first_medium(media::MediumKind::ConfigFloppy) == nullptr) {
    media::VirtualMedium floppy("floppy", media::MediumKind::ConfigFloppy);
    floppy.present = false;
    machine.media.push_back(std::move(floppy));
  }

  BootReport report;
  report.epoch = machine.epoch;

  emit_media_states(machine);

  // The RAMdisk image comes off the boot medium.
  if (const media::VirtualMedium* image = machine.first_medium(media::MediumKind::BootImage);
      image != nullptr && image->present) {
    for (const std::string& path : image->tree.list(std::string(kImageRamdiskDir))) {
      if (path.size() <= kImageRamdiskDir.size() + 1) continue;
      std::string inside = path.substr(kImageRamdiskDir.size() + 1);
      machine.ramdisk.write(inside, *image->tree.find(path)).ok();
    }
  }

  machine.advance(machine.cost_model.fixed_overhead_s);
  report.durations.fixed_overhead_s = machine.cost_model.fixed_overhead_s;

  media::StorageLayout layout;
  bool proceed = run_phase0(machine, env, report, layout).ok();
  if (proceed) proceed = run_phase1(machine, env, report, layout).ok() &&
                         machine.phase == Phase::Phase1;
  if (proceed) run_start_phase(machine, env, report).ok();

  report.final_phase = machine.phase;
  if (machine.root) report.store_hash = machine.root->content_hash();
  machine.log_event("boot_result", {{"phase", std::string(phase_name(machine.phase))},
                                    {"plan", report.plan.complete() ? "Complete" : "HunkerDown"}});
  machine.last_report = report;
  return report;
}

// --- Post-boot event loop -------------------------------------------------------------

int run_until(VirtualMachine& machine, const BootEnv& env, double t_end) {
  int reboots = 0;
  while (machine.now < t_end) {
    if (machine.phase != Phase::Running) {
      // Halted machines just sit there; nothing fires.
      machine.now = t_end;
      break;
    }
    double inf = std::numeric_limits<double>::infinity();
    double daemon_fail = machine.daemon.running ? machine.daemon.fail_at : inf;
    double heartbeat = inf;
    if (machine.daemon.running) {
      double hb = machine.daemon.last_heartbeat + machine.daemon.heartbeat_period_s;
      if (hb < daemon_fail) heartbeat = hb;
    }
    double watchdog = machine.watchdog.armed
                          ? machine.watchdog.last_reset + machine.watchdog.deadline_s
                          : inf;
    double check = machine.schedule.installed ? machine.schedule.next_at : inf;

    double next = std::min({heartbeat, daemon_fail, watchdog, check});
    if (next > t_end) {
      machine.now = t_end;
      break;
    }
    machine.now = std::max(next, machine.now);

    if (next == heartbeat) {
      machine.daemon.last_heartbeat = machine.now;
      machine.watchdog.last_reset = machine.now;  // heartbeats pet the watchdog
      continue;
    }
    if (next == daemon_fail) {
      machine.daemon.running = false;
      machine.daemon.fail_at = inf;  // one injected failure, consumed here
      machine.log_event("daemon_stopped", {{"reason", "injected_failure"}});
      continue;
    }
    if (next == watchdog) {
      // The supervised daemon went quiet: reboot the whole machine.
      machine.log_event("watchdog_expired", {{"idle_s", std::to_string(static_cast<int>(
                                                 machine.watchdog.deadline_s))}});
      boot_machine(machine, env);
      ++reboots;
      continue;
    }
    if (next == check) {
      std::uint64_t draw = machine.schedule.draw++;
      machine.schedule.next_at = machine.now + jittered_interval(machine.schedule, draw + 1);
      update::MirrorSet mirrors{machine.schedule.mirrors, machine.schedule.rng_seed};
      auto picked = update::pick_mirror(mirrors, draw);
      if (!picked.ok()) {
        machine.log_event("check_skipped", {{"reason", picked.error().code}});
        continue;
      }
      if (env.net == nullptr) {
        machine.log_event("check_skipped", {{"reason", "NoNetwork"}});
        continue;
      }
      sim::ProcessTag proc{std::string(kUpdaterProcess), false, true};
      update::check_and_fetch(picked.value(), machine, proc, *env.net).ok();
      continue;
    }
  }
  return reboots;
}

}  // namespace everboot::boot

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

#include <doctest.h>

#include "everboot/boot.hpp"
#include "everboot/machineio.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace everboot;
using namespace everboot::boot;
using everboot::fixtures::make_env;
using everboot::fixtures::make_image;
using everboot::fixtures::make_machine;
using everboot::fixtures::make_rig;

namespace {

int count_events(const BootLog& log, std::string_view event) {
  int n = 0;
  for (const auto& rec : log.records()) {
    if (rec.event == event) ++n;
  }
  return n;
}

const LogRecord* find_event(const BootLog& log, std::string_view event) {
  for (const auto& rec : log.records()) {
    if (rec.event == event) return &rec;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("config file round-trips and preserves unknown keys") {
  ApplianceConfig cfg = fixtures::make_config({{"SITE_NOTE", "keep-me"}});
  auto parsed = ApplianceConfig::parse(cfg.serialize()).take();
  CHECK(parsed.ip_address == "10.0.0.5");
  CHECK(parsed.dns_servers == std::vector<std::string>{"10.0.0.53"});
  CHECK(parsed.extra_value("SITE_NOTE") == "keep-me");
  CHECK(parsed.serialize() == cfg.serialize());
  CHECK(parsed.validate().ok());
}

TEST_CASE("config validation matches the bitwise subnet oracle") {
  CHECK(gateway_in_subnet("10.0.0.5", "255.255.255.0", "10.0.0.1"));
  CHECK_FALSE(gateway_in_subnet("10.0.0.5", "255.255.255.0", "10.0.1.1"));
  CHECK(netmask_contiguous("255.255.255.0"));
  CHECK(netmask_contiguous("255.0.0.0"));
  CHECK_FALSE(netmask_contiguous("255.0.255.0"));
  CHECK_FALSE(netmask_contiguous("0.0.0.0"));

  sim::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto ip = std::to_string(rng.next() % 256) + "." + std::to_string(rng.next() % 256) + "." +
              std::to_string(rng.next() % 256) + "." + std::to_string(rng.next() % 256);
    auto gw = std::to_string(rng.next() % 256) + "." + std::to_string(rng.next() % 256) + "." +
              std::to_string(rng.next() % 256) + "." + std::to_string(rng.next() % 256);
    int bits = 8 + static_cast<int>(rng.next() % 17);
    std::uint32_t mask_word = bits == 0 ? 0 : ~((1u << (32 - bits)) - 1);
    auto mask = std::to_string(mask_word >> 24) + "." + std::to_string((mask_word >> 16) & 0xff) +
                "." + std::to_string((mask_word >> 8) & 0xff) + "." +
                std::to_string(mask_word & 0xff);
    CHECK(gateway_in_subnet(ip, mask, gw) == oracle::gateway_in_subnet(ip, mask, gw));
  }
}

TEST_CASE("state machine accepts only legal transitions") {
  CHECK(legal_transition(Phase::Reset, Phase::Phase0));
  CHECK(legal_transition(Phase::Phase1, Phase::HunkerDown));
  CHECK(legal_transition(Phase::Phase1, Phase::CallForHelp));
  CHECK(legal_transition(Phase::Start, Phase::Running));
  CHECK(legal_transition(Phase::Running, Phase::Reset));
  CHECK_FALSE(legal_transition(Phase::Reset, Phase::Running));
  CHECK_FALSE(legal_transition(Phase::Phase0, Phase::Start));
  CHECK_FALSE(legal_transition(Phase::HunkerDown, Phase::Running));

  // Fuzz: random walks through set_phase never land in an illegal state.
  sim::Rng rng(17);
  const Phase all[] = {Phase::Reset,   Phase::Phase0,     Phase::Phase1,     Phase::Start,
                       Phase::Running, Phase::HunkerDown, Phase::CallForHelp};
  VirtualMachine machine;
  for (int step = 0; step < 500; ++step) {
    Phase next = all[rng.next() % 7];
    Phase before = machine.phase;
    if (legal_transition(before, next)) {
      machine.set_phase(next);
      CHECK(machine.phase == next);
    } else {
      CHECK_THROWS_AS(machine.set_phase(next), std::logic_error);
      CHECK(machine.phase == before);
    }
  }
}

TEST_CASE("full boot of an all-valid fixture reaches Running with a complete plan") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootEnv env = make_env();

  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::Running);
  CHECK(report.plan.complete());
  CHECK(report.installed_version("core") == "1.0");
  CHECK(report.installed_version("daemon") == "1.0");
  CHECK_FALSE(report.store_hash.empty());
  CHECK(machine.daemon.running);
  CHECK(machine.watchdog.armed);
  CHECK(machine.schedule.installed);

  // Durations cover the named stages and sum to the boot total.
  CHECK(report.durations.fixed_overhead_s == doctest::Approx(85.0));
  CHECK(report.durations.signature_check_s == doctest::Approx(30.0));
  CHECK(report.durations.base_install_s == doctest::Approx(25.0));
  CHECK(report.durations.total() ==
        doctest::Approx(report.durations.signature_check_s + report.durations.base_install_s +
                        report.durations.package_install_s +
                        report.durations.fixed_overhead_s));

  // The daemon-free network window: between the revocation net_up and
  // net_down there is no daemon activity and no privileged traffic.
  const auto& records = machine.log.records();
  std::size_t up = records.size(), down = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].event == "net_up" && records[i].get("reason") == "revocation_check") up = i;
    if (records[i].event == "net_down" && records[i].get("reason") == "revocation_check_done")
      down = i;
  }
  REQUIRE(up < down);
  for (std::size_t i = up; i < down; ++i) {
    CHECK(records[i].event != "daemon_started");
    if (records[i].event == "net_send" || records[i].event == "net_recv") {
      CHECK(records[i].get("privileged") == "0");
    }
  }

  CHECK(check_trace_invariants(records).empty());
}

TEST_CASE("phase0 halts on zero disks") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  machine.media.erase(machine.media.begin() + 2);  // drop the disk
  BootEnv env = make_env();

  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::Phase0);
  REQUIRE_FALSE(report.warnings.empty());
  CHECK(report.warnings[0].find("NoStorage") != std::string::npos);
}

TEST_CASE("phase0 partitions once, then reuses the stored layout without prompting") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  int prompts = 0;
  BootEnv env = make_env();
  env.partition_permission = [&](const std::string&) {
    ++prompts;
    return true;
  };

  boot_machine(machine, env);
  CHECK(prompts == 1);
  CHECK(machine.find_medium("disk0")->partitioned);
  CHECK(machine.find_medium("disk0")->swap_bytes == media::kGiB);

  boot_machine(machine, env);
  CHECK(prompts == 1);  // idempotent re-boot, no second prompt
}

TEST_CASE("phase0 permission denied halts the boot") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootEnv env = make_env();
  env.partition_permission = [](const std::string&) { return false; };
  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::Phase0);
}

TEST_CASE("unrecognized boot medium calls for help") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  machine.cd_recognized = false;
  BootReport report = boot_machine(machine, make_env());
  CHECK(report.final_phase == Phase::CallForHelp);
  CHECK(find_event(machine.log, "call_for_help") != nullptr);
}

TEST_CASE("a write-enabled floppy blocks the boot until the operator locks it") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  machine.find_medium("floppy")->set_write_locked(false).ok();

  struct LockAfter : OperatorModel {
    int lock_at_poll;
    explicit LockAfter(int n) : lock_at_poll(n) {}
    bool on_writable_floppy(VirtualMachine& m, int poll) override {
      if (poll < lock_at_poll) return false;
      m.find_medium("floppy")->set_write_locked(true).ok();
      return true;
    }
  };

  SUBCASE("operator locks after three polls") {
    LockAfter op(3);
    BootEnv env = make_env();
    env.op = &op;
    BootReport report = boot_machine(machine, env);
    CHECK(report.final_phase == Phase::Running);
    CHECK(count_events(machine.log, "floppy_refused") >= 3);
    CHECK(check_trace_invariants(machine.log.records()).empty());
  }

  SUBCASE("no operator: boot refuses and halts in Phase1") {
    BootEnv env = make_env();
    env.max_floppy_polls = 5;
    BootReport report = boot_machine(machine, env);
    CHECK(report.final_phase == Phase::Phase1);
    bool refused = false;
    for (const std::string& warning : report.warnings) {
      if (warning.find("floppy_refused") != std::string::npos) refused = true;
    }
    CHECK(refused);
    // It never raised the network with the writable floppy in the drive.
    CHECK(check_trace_invariants(machine.log.records()).empty());
  }
}

TEST_CASE("locked floppy configuration supersedes the image default") {
  auto rig = make_rig();
  release::BuildOptions options;
  auto image_cfg = fixtures::make_config();
  image_cfg.ip_address = "10.0.0.99";  // image default differs from floppy
  options.default_config = image_cfg;
  auto image =
      release::build_image(fixtures::default_packages("1.0"), rig.template_ring, rig.signers,
                           options)
          .take();

  VirtualMachine machine = make_machine(rig, std::move(image));
  BootReport report = boot_machine(machine, make_env());
  CHECK(report.final_phase == Phase::Running);
  CHECK(machine.config.ip_address == "10.0.0.5");  // the floppy's value
  CHECK(find_event(machine.log, "config_loaded")->get("source") == "floppy");
}

TEST_CASE("hunker-down cuts the appliance off the network until new signatures arrive") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));

  // Tamper the one copy of the required daemon package on the image.
  media::VirtualMedium* image = machine.find_medium("image");
  std::string pkg_path = "packages/apps/daemon-1.0.pkg";
  media::FileNode mutated = *image->tree.find(pkg_path);
  mutated.content[mutated.content.size() / 2] ^= 0x01;
  image->tree.write(pkg_path, mutated).ok();  // mastering-side mutation

  BootEnv env = make_env();
  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::HunkerDown);
  CHECK(report.plan.missing == std::vector<std::string>{"daemon"});

  // Every inbound connection attempt fails while hunkered down.
  for (int i = 0; i < 5; ++i) CHECK_FALSE(inbound_probe(machine));

  // Operator puts a known-good copy of the package plus a validating
  // manifest and signature on the floppy (console access while halted),
  // then reboots.
  media::VirtualMedium pristine = make_image(rig);
  Bytes good_payload = pristine.tree.find(pkg_path)->content;
  media::VirtualMedium* floppy = machine.find_medium("floppy");
  floppy->set_write_locked(false).ok();
  resolve::Manifest manifest;
  manifest.entries.push_back(
      {digest_hex(DigestAlgorithm::Sha256, good_payload), "daemon-1.0.pkg"});
  Bytes manifest_bytes = to_bytes(manifest.serialize());
  auto sig = trust::sign_payload(manifest_bytes, rig.key_a.secret_key).take();
  floppy->write_file("operator.dgst", {manifest_bytes, false}).ok();
  floppy
      ->write_file(trust::signature_filename("operator.dgst", "release-a"),
                   {to_bytes(sig.serialize()), false})
      .ok();
  floppy->write_file("daemon-1.0.pkg", {good_payload, false}).ok();
  floppy->set_write_locked(true).ok();

  BootReport second = boot_machine(machine, env);
  CHECK(second.final_phase == Phase::Running);
  CHECK(inbound_probe(machine));
  CHECK(second.plan.steps.size() == 3);
}

TEST_CASE("watchdog reboots the machine when the daemon stops heartbeating") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootEnv env = make_env();

  BootReport report = boot_machine(machine, env);
  REQUIRE(report.final_phase == Phase::Running);
  std::uint64_t first_epoch = machine.epoch;

  machine.daemon.fail_at = machine.now + 40.0;
  int reboots = run_until(machine, env, machine.now + 600.0);
  CHECK(reboots == 1);
  CHECK(machine.epoch == first_epoch + 1);
  CHECK(machine.phase == Phase::Running);  // recovery by reboot
  CHECK(find_event(machine.log, "watchdog_expired") != nullptr);
  CHECK(find_event(machine.log, "daemon_stopped") != nullptr);

  // Healthy daemon: another long stretch produces no further reboots.
  CHECK(run_until(machine, env, machine.now + 600.0) == 0);
}

TEST_CASE("an image with no application set runs without the daemon") {
  auto rig = make_rig();
  auto packages = fixtures::default_packages("1.0");
  packages.pop_back();  // drop the daemon
  auto image = release::build_image(packages, rig.template_ring, rig.signers).take();
  VirtualMachine machine = make_machine(rig, std::move(image));

  BootReport report = boot_machine(machine, make_env());
  CHECK(report.final_phase == Phase::Running);
  CHECK_FALSE(machine.daemon.running);
  bool warned = false;
  for (const std::string& warning : report.warnings) {
    if (warning.find("daemon configuration missing") != std::string::npos) warned = true;
  }
  CHECK(warned);
  CHECK(find_event(machine.log, "daemon_absent") != nullptr);
}

TEST_CASE("rebooting identical media reproduces the evanescent store hash exactly") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootEnv env = make_env();

  BootReport first = boot_machine(machine, env);
  BootReport second = boot_machine(machine, env);
  REQUIRE(first.final_phase == Phase::Running);
  REQUIRE(second.final_phase == Phase::Running);
  CHECK_FALSE(first.store_hash.empty());
  CHECK(first.store_hash == second.store_hash);
}

TEST_CASE("mid-epoch store injections vanish on the next boot") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootEnv env = make_env();

  BootReport clean = boot_machine(machine, env);
  REQUIRE(clean.final_phase == Phase::Running);

  // A compromise drops files into the running system.
  machine.root->store.write("dist/etc/backdoor", {to_bytes("persist me"), true}).ok();
  machine.root->store.write("dist/usr/bin/rootkit", {to_bytes("malware"), true}).ok();
  CHECK(machine.root->content_hash() != clean.store_hash);

  BootReport next = boot_machine(machine, env);
  CHECK(next.store_hash == clean.store_hash);
  CHECK(machine.root->store.find("dist/etc/backdoor") == nullptr);
}

TEST_CASE("persistent media survive a boot byte-identical outside cache and config") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootEnv env = make_env();
  boot_machine(machine, env);  // first boot partitions

  auto before = machine.media_hashes();
  boot_machine(machine, env);
  auto after = machine.media_hashes();
  CHECK(before == after);
}

TEST_CASE("/tmp relocation preserves staged temporary data") {
  auto rig = make_rig();
  release::BuildOptions options;
  options.extra_ramdisk.push_back({"tmp/staged.dat", {to_bytes("survives the move"), false}});
  auto image =
      release::build_image(fixtures::default_packages("1.0"), rig.template_ring, rig.signers,
                           options)
          .take();
  VirtualMachine machine = make_machine(rig, std::move(image));

  BootReport report = boot_machine(machine, make_env());
  REQUIRE(report.final_phase == Phase::Running);
  const media::FileNode* staged = machine.vfs.read("/tmp/staged.dat");
  REQUIRE(staged != nullptr);
  CHECK(to_string(staged->content) == "survives the move");
  CHECK(machine.ramdisk.find("tmp/staged.dat") == nullptr);  // moved, not copied
}

TEST_CASE("executed plans land in the store in category order") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootReport report = boot_machine(machine, make_env());
  REQUIRE(report.final_phase == Phase::Running);

  std::vector<std::string> installs;
  bool saw_redirect_swap = false;
  for (const auto& rec : machine.log.records()) {
    if (rec.event == "install") installs.push_back(*rec.get("name"));
    if (rec.event == "redirect_swap") {
      saw_redirect_swap = true;
      CHECK(installs == std::vector<std::string>{"core"});  // base first, then the swap
    }
  }
  CHECK(saw_redirect_swap);
  CHECK(installs == std::vector<std::string>{"core", "rt", "daemon"});

  // Installed files resolve through the evanescent root.
  CHECK(machine.vfs.read("/usr/bin/daemon") != nullptr);
  CHECK(machine.vfs.read("/etc/daemon.conf") != nullptr);
  CHECK(media::exec_check(machine.vfs, "/usr/bin/daemon").take() ==
        media::ExecDecision::Allowed);
}

TEST_CASE("payloads escaping the evanescent store abort the boot") {
  auto rig = make_rig();
  auto packages = fixtures::default_packages("1.0");

  SUBCASE("dot-dot traversal") {
    packages[2].entries.push_back({"/etc/../../content0/evil", to_bytes("escape"), true});
  }
  SUBCASE("absolute path into a persistent mount") {
    packages[2].entries.push_back({"/content0/evil", to_bytes("escape"), true});
  }

  // The escape oracle agrees these paths do not stay inside the store.
  CHECK_FALSE(oracle::path_within(packages[2].entries.back().path, "dist"));

  auto image = release::build_image(packages, rig.template_ring, rig.signers).take();
  VirtualMachine machine = make_machine(rig, std::move(image));
  BootReport report = boot_machine(machine, make_env());
  CHECK(report.final_phase == Phase::HunkerDown);
  CHECK(find_event(machine.log, "install_escape_rejected") != nullptr);

  // Nothing leaked onto the disk.
  CHECK(machine.find_medium("disk0")->tree.find("evil") == nullptr);
  CHECK(machine.find_medium("disk0")->tree.find("content0/evil") == nullptr);
}

TEST_CASE("empty plan with no required packages is a no-op success") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootEnv env = make_env();

  // Replace the image's required list with an empty one.
  media::VirtualMedium* image = machine.find_medium("image");
  image->tree.write(std::string(kImageRequiredPath), {to_bytes(""), false}).ok();

  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::Running);
  CHECK(report.plan.steps.empty());
  CHECK(report.plan.complete());
}

TEST_CASE("revocation endpoints consulted at boot revoke keys inside the network window") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  ApplianceConfig cfg = fixtures::make_config({{"REVOCATION_SOURCES", "rev1"}});
  media::VirtualMedium* floppy = machine.find_medium("floppy");
  floppy->set_write_locked(false).ok();
  floppy->write_file(std::string(kFloppyConfigPath), {to_bytes(cfg.serialize()), false}).ok();
  floppy->set_write_locked(true).ok();

  sim::SimNet net;
  net.add_revocation_source("rev1", "REVOKE release-a\n");
  BootEnv env = make_env(&net);

  BootReport report = boot_machine(machine, env);
  // Dual-signed manifests survive the single revocation.
  CHECK(report.final_phase == Phase::Running);
  CHECK(machine.keyring.find("release-a")->revoked);
  CHECK_FALSE(machine.keyring.find("release-b")->revoked);

  const LogRecord* revoked = find_event(machine.log, "key_revoked");
  REQUIRE(revoked != nullptr);
  CHECK(revoked->get("id") == "release-a");

  // Everything validated through the surviving key.
  for (const auto& rec : machine.log.records()) {
    if (rec.event == "manifest_valid") CHECK(rec.get("key") == "release-b");
  }
  // No degraded-revocation warning on this boot.
  for (const std::string& warning : report.warnings) {
    CHECK(warning.find("revocation check degraded") == std::string::npos);
  }
  CHECK(check_trace_invariants(machine.log.records()).empty());
}

TEST_CASE("revoking the only signing key sends the boot to hunker-down") {
  auto rig = make_rig();
  // Image signed by release-a alone.
  auto image = release::build_image(fixtures::default_packages("1.0"), rig.template_ring,
                                    {rig.key_a.secret_key})
                   .take();
  VirtualMachine machine = make_machine(rig, std::move(image));
  ApplianceConfig cfg = fixtures::make_config({{"REVOCATION_SOURCES", "rev1"}});
  media::VirtualMedium* floppy = machine.find_medium("floppy");
  floppy->set_write_locked(false).ok();
  floppy->write_file(std::string(kFloppyConfigPath), {to_bytes(cfg.serialize()), false}).ok();
  floppy->set_write_locked(true).ok();

  sim::SimNet net;
  net.add_revocation_source("rev1", "REVOKE release-a\n");
  BootEnv env = make_env(&net);

  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::HunkerDown);
  CHECK_FALSE(inbound_probe(machine));
}

TEST_CASE("an invalid configuration halts the boot in Phase1") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  ApplianceConfig bad = fixtures::make_config();
  bad.gateway = "10.9.9.1";  // outside 10.0.0.0/24
  media::VirtualMedium* floppy = machine.find_medium("floppy");
  floppy->set_write_locked(false).ok();
  floppy->write_file(std::string(kFloppyConfigPath), {to_bytes(bad.serialize()), false}).ok();
  floppy->set_write_locked(true).ok();

  BootReport report = boot_machine(machine, make_env());
  CHECK(report.final_phase == Phase::Phase1);
  bool flagged = false;
  for (const std::string& warning : report.warnings) {
    if (warning.find("gateway outside") != std::string::npos) flagged = true;
  }
  CHECK(flagged);
}

TEST_CASE("md5 repositories boot, with the deprecated digest flagged in the report") {
  auto rig = make_rig();
  VirtualMachine machine =
      make_machine(rig, make_image(rig, "1.0", DigestAlgorithm::Md5));
  BootReport report = boot_machine(machine, make_env());
  CHECK(report.final_phase == Phase::Running);
  bool flagged = false;
  for (const std::string& warning : report.warnings) {
    if (warning.find("deprecated digest algorithm md5") != std::string::npos) flagged = true;
  }
  CHECK(flagged);
}

TEST_CASE("version resolution crosses digest-algorithm boundaries") {
  // v1.0 validated through an md5 manifest on the image, v1.1 through a
  // sha256 manifest in the cache: the higher version still wins.
  auto rig = make_rig();
  VirtualMachine machine =
      make_machine(rig, make_image(rig, "1.0", DigestAlgorithm::Md5));
  fixtures::seed_cache(machine, rig, "1.1");  // sha256 bundle

  BootReport report = boot_machine(machine, make_env());
  CHECK(report.final_phase == Phase::Running);
  CHECK(report.installed_version("daemon") == "1.1");
}

TEST_CASE("a moved machine keeps a working file namespace") {
  auto rig = make_rig();
  VirtualMachine original = make_machine(rig, make_image(rig));
  boot_machine(original, make_env());
  REQUIRE(original.phase == Phase::Running);

  std::vector<VirtualMachine> fleet;
  fleet.push_back(std::move(original));
  VirtualMachine& moved = fleet.back();

  const media::FileNode* conf = moved.vfs.read(kDaemonConfigPath);
  REQUIRE(conf != nullptr);
  CHECK(to_string(conf->content) == "VERSION=1.0\n");
  CHECK(media::exec_check(moved.vfs, kDaemonBinaryPath).take() ==
        media::ExecDecision::Allowed);

  // And it reboots normally from its new home.
  BootReport report = boot_machine(moved, make_env());
  CHECK(report.final_phase == Phase::Running);
}

TEST_CASE("boot reports are parseable back") {
  auto rig = make_rig();
  VirtualMachine machine = make_machine(rig, make_image(rig));
  BootReport report = boot_machine(machine, make_env());
  auto parsed = BootReport::parse(report.render()).take();
  CHECK(parsed.epoch == report.epoch);
  CHECK(parsed.final_phase == report.final_phase);
  CHECK(parsed.installed == report.installed);
  CHECK(parsed.store_hash == report.store_hash);
}

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

#include "everboot/release.hpp"
#include "everboot/update.hpp"
#include "support/fixtures.hpp"

using namespace everboot;
using namespace everboot::update;
using everboot::fixtures::make_env;
using everboot::fixtures::make_image;
using everboot::fixtures::make_machine;
using everboot::fixtures::make_rig;

namespace {

// A running machine plus a mirror carrying the daemon-1.1 bundle.
struct UpdateRig {
  fixtures::Rig rig = make_rig();
  sim::SimNet net;
  boot::VirtualMachine machine;
  boot::BootEnv env;
  std::string patch_filename;

  UpdateRig() {
    machine = make_machine(rig, make_image(rig));
    // The fixture floppy gets an update schedule pointing at m0.
    boot::ApplianceConfig cfg =
        fixtures::make_config({{"UPDATE_MIRRORS", "m0"}, {"UPDATE_INTERVAL_HOURS", "24"}});
    media::VirtualMedium* floppy = machine.find_medium("floppy");
    floppy->set_write_locked(false).ok();
    floppy->write_file(std::string(boot::kFloppyConfigPath), {to_bytes(cfg.serialize()), false})
        .ok();
    floppy->set_write_locked(true).ok();

    env = make_env(&net);
    media::VirtualMedium patched = make_image(rig, "1.1");
    auto bundle = release::extract_and_sign_package(patched, "daemon", rig.signers).take();
    patch_filename = bundle.package_filename;
    net.add_mirror("m0").tree = bundle.bundle;
    boot::boot_machine(machine, env);
  }
};

}  // namespace

TEST_CASE("pick_mirror: singleton, uniformity, and the empty list") {
  MirrorSet one{{"only"}, 1};
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    CHECK(pick_mirror(one, draw).take() == "only");
  }

  // 10,000 seeded draws over 4 servers: each selected 2500 +/- 150.
  MirrorSet four{{"m0", "m1", "m2", "m3"}, 99};
  std::map<std::string, int> counts;
  for (std::uint64_t draw = 0; draw < 10000; ++draw) {
    counts[pick_mirror(four, draw).take()]++;
  }
  for (const auto& [id, n] : counts) {
    CHECK(n > 2350);
    CHECK(n < 2650);
  }

  // Deterministic replay under a fixed seed.
  for (std::uint64_t draw = 0; draw < 50; ++draw) {
    CHECK(pick_mirror(four, draw).take() == pick_mirror(four, draw).take());
  }

  auto none = pick_mirror(MirrorSet{{}, 1}, 0);
  REQUIRE_FALSE(none.ok());
  CHECK(none.error().code == "NoMirrors");
}

TEST_CASE("check_and_fetch caches package, manifest, and signatures atomically") {
  UpdateRig rig;
  sim::ProcessTag proc{"updater", false, true};

  auto report = check_and_fetch("m0", rig.machine, proc, rig.net).take();
  CHECK_FALSE(report.unreachable);
  CHECK(report.files() == 4);  // pkg + manifest + two signatures

  const media::VirtualMedium* disk = cache_disk(rig.machine);
  CHECK(disk->tree.find("cache/" + rig.patch_filename) != nullptr);
  for (const std::string& path : disk->tree.list("cache")) {
    CHECK(path.find(".tmp.") == std::string::npos);  // no partials left behind
  }

  // The fetch record lands in the boot log stream.
  bool logged = false;
  for (const auto& rec : rig.machine.log.records()) {
    if (rec.event == "fetch" && rec.get("mirror") == "m0" && rec.get("files") == "4") {
      logged = true;
    }
  }
  CHECK(logged);

  // Nothing newer: the second check is a no-op.
  auto again = check_and_fetch("m0", rig.machine, proc, rig.net).take();
  CHECK(again.files() == 0);
}

TEST_CASE("a privileged process tag is rejected outright") {
  UpdateRig rig;
  sim::ProcessTag root{"root-updater", true, true};
  CHECK_THROWS_AS((void)check_and_fetch("m0", rig.machine, root, rig.net), PrivilegeError);
  // And nothing was logged as sent.
  for (const auto& rec : rig.machine.log.records()) {
    if (rec.event == "net_send" || rec.event == "net_recv") {
      CHECK(rec.get("privileged") == "0");
    }
  }
}

TEST_CASE("an unreachable mirror yields an empty report and the next check proceeds") {
  UpdateRig rig;
  rig.net.set_mirror_reachable("m0", false);
  sim::ProcessTag proc{"updater", false, true};
  auto report = check_and_fetch("m0", rig.machine, proc, rig.net).take();
  CHECK(report.unreachable);
  CHECK(report.files() == 0);

  rig.net.set_mirror_reachable("m0", true);
  auto retry = check_and_fetch("m0", rig.machine, proc, rig.net).take();
  CHECK(retry.files() == 4);
}

TEST_CASE("nothing in the cache is ever executable") {
  UpdateRig rig;
  sim::ProcessTag proc{"updater", false, true};
  check_and_fetch("m0", rig.machine, proc, rig.net).take();

  for (const std::string& path : cache_disk(rig.machine)->tree.list("cache")) {
    auto decision = media::exec_check(rig.machine.vfs, "/content0/" + path, &rig.machine.log,
                                      rig.machine.epoch, rig.machine.now);
    REQUIRE(decision.ok());
    CHECK(decision.value() == media::ExecDecision::DeniedNoexec);
  }
  CHECK(check_trace_invariants(rig.machine.log.records()).empty());
}

TEST_CASE("scheduled checks fire on the configured cadence") {
  UpdateRig rig;
  REQUIRE(rig.machine.schedule.installed);

  SUBCASE("24h interval over a 72h horizon fires 3 +/- 1 checks") {
    double start = rig.machine.now;
    boot::run_until(rig.machine, rig.env, start + 72.0 * 3600.0);
    int checks = 0;
    for (const auto& rec : rig.machine.log.records()) {
      if (rec.event == "fetch") ++checks;
    }
    CHECK(checks >= 2);
    CHECK(checks <= 4);
  }

  SUBCASE("reboot reinstalls the schedule in the new epoch") {
    std::uint64_t epoch_before = rig.machine.epoch;
    boot::boot_machine(rig.machine, rig.env);
    CHECK(rig.machine.epoch == epoch_before + 1);
    CHECK(rig.machine.schedule.installed);
    bool reinstalled = false;
    for (const auto& rec : rig.machine.log.records()) {
      if (rec.event == "sched_installed" && rec.epoch == epoch_before + 1) reinstalled = true;
    }
    CHECK(reinstalled);
  }
}

TEST_CASE("zero-jitter schedules replay deterministically") {
  auto make = [] {
    fixtures::Rig rig = make_rig();
    boot::VirtualMachine machine = make_machine(rig, make_image(rig));
    // Rewrite the floppy config with a zero-jitter schedule.
    boot::ApplianceConfig cfg = fixtures::make_config(
        {{"UPDATE_MIRRORS", "m0"}, {"UPDATE_JITTER", "0"}, {"UPDATE_INTERVAL_HOURS", "6"}});
    media::VirtualMedium* floppy = machine.find_medium("floppy");
    floppy->set_write_locked(false).ok();
    floppy->write_file(std::string(boot::kFloppyConfigPath), {to_bytes(cfg.serialize()), false})
        .ok();
    floppy->set_write_locked(true).ok();
    return machine;
  };

  auto run = [](boot::VirtualMachine machine) {
    sim::SimNet net;
    net.add_mirror("m0");
    boot::BootEnv env = make_env(&net);
    boot::boot_machine(machine, env);
    boot::run_until(machine, env, machine.now + 25 * 3600.0);
    std::vector<double> times;
    for (const auto& rec : machine.log.records()) {
      if (rec.event == "fetch") times.push_back(rec.t);
    }
    return times;
  };

  std::vector<double> first = run(make());
  std::vector<double> second = run(make());
  REQUIRE(first.size() == 4);  // 6h cadence, four checks inside 25h
  CHECK(first == second);
  for (std::size_t i = 1; i < first.size(); ++i) {
    CHECK(first[i] - first[i - 1] == doctest::Approx(6.0 * 3600.0));
  }
}

TEST_CASE("tamper-then-reboot: a corrupted cached package is excluded end to end") {
  UpdateRig rig;
  sim::ProcessTag proc{"updater", false, true};
  check_and_fetch("m0", rig.machine, proc, rig.net).take();

  // Corrupt the cached payload after the fetch.
  media::VirtualMedium* disk = cache_disk(rig.machine);
  std::string cached = "cache/" + rig.patch_filename;
  media::FileNode mutated = *disk->tree.find(cached);
  mutated.content[mutated.content.size() / 3] ^= 0x80;
  disk->tree.write(cached, mutated).ok();

  boot::BootReport report = boot::boot_machine(rig.machine, rig.env);
  CHECK(report.final_phase == boot::Phase::Running);
  CHECK(report.installed_version("daemon") == "1.0");  // reverted to the image copy
  bool noted = false;
  for (const std::string& warning : report.warnings) {
    if (warning.find("reverted: daemon-1.1") != std::string::npos) noted = true;
  }
  CHECK(noted);
}

TEST_CASE("upgrade equals reboot: one reboot after a clean fetch runs the new version") {
  UpdateRig rig;
  sim::ProcessTag proc{"updater", false, true};
  check_and_fetch("m0", rig.machine, proc, rig.net).take();

  boot::BootReport report = boot::boot_machine(rig.machine, rig.env);
  CHECK(report.final_phase == boot::Phase::Running);
  CHECK(report.installed_version("daemon") == "1.1");
  CHECK(to_string(rig.machine.vfs.read("/etc/daemon.conf")->content) == "VERSION=1.1\n");
}

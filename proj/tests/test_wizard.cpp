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
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace everboot;
using namespace everboot::boot;
using everboot::fixtures::make_env;
using everboot::fixtures::make_image;
using everboot::fixtures::make_rig;

namespace {

// Machine with an image and disk but an empty floppy drive: the state
// that sends a boot into the configuration wizard.
VirtualMachine unconfigured_machine(const fixtures::Rig& rig) {
  VirtualMachine machine;
  machine.name = "fresh";
  machine.seed = 7;
  machine.media.push_back(make_image(rig));
  media::VirtualMedium floppy("floppy", media::MediumKind::ConfigFloppy);
  floppy.present = false;  // nothing in the drive
  machine.media.push_back(std::move(floppy));
  media::VirtualMedium disk("disk0", media::MediumKind::HardDisk);
  disk.size_bytes = 4 * media::kGiB;
  machine.media.push_back(std::move(disk));
  return machine;
}

sim::SimNet wizard_net() {
  sim::SimNet net;
  net.add_dns_server("10.0.0.53");
  net.add_resolvable_name(std::string(sim::kDnsProbeName));
  return net;
}

std::vector<std::string> good_answers() {
  return {"10.0.0.5", "255.255.255.0", "10.0.0.1", "10.0.0.53", "hunter2", "yes", "yes"};
}

}  // namespace

TEST_CASE("wizard collects, validates, writes the floppy and verifies the lock") {
  auto rig = make_rig();
  VirtualMachine machine = unconfigured_machine(rig);
  sim::SimNet net = wizard_net();
  ScriptedChannel channel(good_answers());

  auto cfg = run_config_wizard(machine, channel, &net).take();
  CHECK(cfg.ip_address == "10.0.0.5");
  CHECK(cfg.gateway == "10.0.0.1");
  CHECK_FALSE(cfg.ssh_host_key_id.empty());
  CHECK(cfg.admin_password_digest.find('$') != std::string::npos);

  media::VirtualMedium* floppy = machine.find_medium("floppy");
  CHECK(floppy->present);
  CHECK(floppy->write_locked());  // verified locked before returning
  const media::FileNode* written = floppy->tree.find(kFloppyConfigPath);
  REQUIRE(written != nullptr);
  CHECK(to_string(written->content) == cfg.serialize());
  CHECK(floppy->tree.find(kFloppyKeyringPath) != nullptr);  // initial keyring

  // The validation window never overlaps a writable floppy.
  CHECK(check_trace_invariants(machine.log.records()).empty());
}

TEST_CASE("fresh host keys differ between wizard runs") {
  auto rig = make_rig();
  sim::SimNet net = wizard_net();

  VirtualMachine first = unconfigured_machine(rig);
  ScriptedChannel channel_a(good_answers());
  auto cfg_a = run_config_wizard(first, channel_a, &net).take();

  VirtualMachine second = unconfigured_machine(rig);
  second.seed = 8;  // a different machine
  ScriptedChannel channel_b(good_answers());
  auto cfg_b = run_config_wizard(second, channel_b, &net).take();

  CHECK(cfg_a.ssh_host_key_id != cfg_b.ssh_host_key_id);

  // Same machine, same seed, same answers: identical config, the
  // scripted-equals-interactive guarantee.
  VirtualMachine replay = unconfigured_machine(rig);
  ScriptedChannel channel_c(good_answers());
  auto cfg_c = run_config_wizard(replay, channel_c, &net).take();
  CHECK(cfg_c.serialize() == cfg_a.serialize());
}

TEST_CASE("gateway outside the subnet re-prompts until corrected") {
  auto rig = make_rig();
  VirtualMachine machine = unconfigured_machine(rig);
  sim::SimNet net = wizard_net();

  // 10.0.1.1 fails the subnet check for 10.0.0.5/255.255.255.0; the
  // oracle agrees, and the wizard asks again.
  CHECK_FALSE(oracle::gateway_in_subnet("10.0.0.5", "255.255.255.0", "10.0.1.1"));
  ScriptedChannel channel({"10.0.0.5", "255.255.255.0", "10.0.1.1", "10.0.0.1", "10.0.0.53",
                           "hunter2", "yes", "yes"});
  auto cfg = run_config_wizard(machine, channel, &net).take();
  CHECK(cfg.gateway == "10.0.0.1");

  int rejects = 0;
  for (const auto& rec : machine.log.records()) {
    if (rec.event == "wizard_reject" && rec.get("field") == "gateway") ++rejects;
  }
  CHECK(rejects == 1);
}

TEST_CASE("unreachable DNS fails the lookup test and re-prompts") {
  auto rig = make_rig();
  VirtualMachine machine = unconfigured_machine(rig);
  sim::SimNet net = wizard_net();
  net.set_dns_server_reachable("10.9.9.9", false);

  ScriptedChannel channel({"10.0.0.5", "255.255.255.0", "10.0.0.1", "10.9.9.9", "10.0.0.53",
                           "hunter2", "yes", "yes"});
  auto cfg = run_config_wizard(machine, channel, &net).take();
  CHECK(cfg.dns_servers == std::vector<std::string>{"10.0.0.53"});

  int failed_tests = 0;
  for (const auto& rec : machine.log.records()) {
    if (rec.event == "wizard_dns_test" && rec.get("ok") == "0") ++failed_tests;
  }
  CHECK(failed_tests == 1);
}

TEST_CASE("a floppy that never gets locked keeps the wizard from returning") {
  auto rig = make_rig();
  VirtualMachine machine = unconfigured_machine(rig);
  sim::SimNet net = wizard_net();

  // Answers run out at the write-lock step.
  ScriptedChannel channel({"10.0.0.5", "255.255.255.0", "10.0.0.1", "10.0.0.53", "hunter2",
                           "yes", "no", "no"});
  auto cfg = run_config_wizard(machine, channel, &net);
  REQUIRE_FALSE(cfg.ok());
  CHECK(cfg.error().code == "WizardBlocked");
}

TEST_CASE("a boot with an empty floppy drive runs the wizard and completes") {
  auto rig = make_rig();
  VirtualMachine machine = unconfigured_machine(rig);
  sim::SimNet net = wizard_net();
  ScriptedChannel channel(good_answers());
  BootEnv env = make_env(&net);
  env.wizard = &channel;

  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::Running);
  CHECK(machine.config.ip_address == "10.0.0.5");
  CHECK(check_trace_invariants(machine.log.records()).empty());

  // The wizard's writes are the only floppy mutations.
  const media::VirtualMedium* floppy = machine.find_medium("floppy");
  CHECK(floppy->tree.file_count() == 2);
}

TEST_CASE("boot without a wizard channel and no floppy halts") {
  auto rig = make_rig();
  VirtualMachine machine = unconfigured_machine(rig);
  BootEnv env = make_env();
  BootReport report = boot_machine(machine, env);
  CHECK(report.final_phase == Phase::Phase1);
  REQUIRE_FALSE(report.warnings.empty());
}

TEST_CASE("wizard demands a lock when a writable floppy is already inserted") {
  auto rig = make_rig();
  VirtualMachine machine = unconfigured_machine(rig);
  machine.find_medium("floppy")->present = true;  // writable floppy in the drive
  sim::SimNet net = wizard_net();

  std::vector<std::string> answers = good_answers();
  answers.insert(answers.begin(), "yes");  // lock it for validation first
  ScriptedChannel channel(answers);
  auto cfg = run_config_wizard(machine, channel, &net);
  REQUIRE(cfg.ok());
  CHECK(check_trace_invariants(machine.log.records()).empty());
}

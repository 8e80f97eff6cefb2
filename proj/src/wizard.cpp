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

#include <array>

#include "everboot/boot.hpp"

namespace everboot::boot {

namespace {

bool answer_is_yes(const std::string& answer) {
  return answer == "yes" || answer == "y";
}

char hex_digit(std::uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hostkey_id(std::uint64_t word) {
  std::string out = "hostkey-";
  for (int shift = 60; shift >= 0; shift -= 4) out.push_back(hex_digit(word >> shift));
  return out;
}

}  // namespace

Result<ApplianceConfig> run_config_wizard(VirtualMachine& machine, PromptChannel& channel,
                                          sim::SimNet* net) {
  machine.log_event("wizard_start");
  sim::Rng rng(sim::Rng::mix(sim::Rng::mix(machine.seed, machine.epoch), 0x77697a61 /*"wiza"*/));

  // The drive exists even when nothing is in it.
  if (machine.first_medium(media::MediumKind::ConfigFloppy) == nullptr) {
    media::VirtualMedium empty_floppy("floppy", media::MediumKind::ConfigFloppy);
    empty_floppy.present = false;
    machine.media.push_back(std::move(empty_floppy));
  }

  auto ask = [&](const std::string& prompt) { return channel.ask(prompt); };
  auto blocked = [&](std::string_view field) -> Error {
    machine.log_event("wizard_blocked", {{"field", std::string(field)}});
    return Error{"WizardBlocked", "no more answers while asking for " + std::string(field)};
  };

  // The validation step raises the network; a write-enabled floppy must
  // not be in the drive while it is up.
  if (media::VirtualMedium* floppy = machine.first_medium(media::MediumKind::ConfigFloppy)) {
    while (media::probe_write_lock(*floppy, &machine.log, machine.epoch, machine.now) ==
           media::ProbeResult::Writable) {
      auto answer = ask("write-lock-floppy-for-validation? ");
      if (!answer) return blocked("write-lock-floppy-for-validation");
      if (answer_is_yes(*answer)) {
        floppy->set_write_locked(true).ok();
        machine.log_event("medium_state",
                          {{"id", floppy->medium_id},
                           {"kind", "ConfigFloppy"},
                           {"locked", "1"},
                           {"present", "1"}});
      }
    }
  }

  ApplianceConfig cfg;
  std::array<std::uint8_t, 4> scratch{};

  while (true) {
    auto answer = ask("ip-address? ");
    if (!answer) return blocked("ip-address");
    if (parse_ipv4(*answer, scratch)) {
      cfg.ip_address = *answer;
      break;
    }
    machine.log_event("wizard_reject", {{"field", "ip-address"}});
  }

  while (true) {
    auto answer = ask("netmask? ");
    if (!answer) return blocked("netmask");
    if (netmask_contiguous(*answer)) {
      cfg.netmask = *answer;
      break;
    }
    machine.log_event("wizard_reject", {{"field", "netmask"}});
  }

  while (true) {
    auto answer = ask("gateway? ");
    if (!answer) return blocked("gateway");
    if (parse_ipv4(*answer, scratch) && gateway_in_subnet(cfg.ip_address, cfg.netmask, *answer)) {
      cfg.gateway = *answer;
      break;
    }
    machine.log_event("wizard_reject", {{"field", "gateway"}});
  }

  // DNS servers are accepted only once a lookup through them actually
  // works: the interface comes up temporarily, the test runs as an
  // unprivileged user, and the interface goes straight back down.
  while (true) {
    auto answer = ask("dns-servers? ");
    if (!answer) return blocked("dns-servers");
    std::vector<std::string> servers;
    bool syntactic = true;
    for (const std::string& s : split(*answer, ',')) {
      if (s.empty()) continue;
      if (!parse_ipv4(s, scratch)) syntactic = false;
      servers.push_back(s);
    }
    if (!syntactic || servers.empty()) {
      machine.log_event("wizard_reject", {{"field", "dns-servers"}});
      continue;
    }

    machine.network_up = true;
    machine.log_event("net_up", {{"reason", "wizard_validation"}});
    bool resolved = false;
    if (net != nullptr) {
      sim::ProcessTag proc{"wizard", false, true};
      for (const std::string& server : servers) {
        if (net->dns_lookup(proc, server, sim::kDnsProbeName, &machine.log, machine.epoch,
                            machine.now)) {
          resolved = true;
          break;
        }
      }
    }
    machine.log_event("wizard_dns_test", {{"ok", resolved ? "1" : "0"}});
    machine.network_up = false;
    machine.log_event("net_down", {{"reason", "wizard_validation_done"}});

    if (resolved) {
      cfg.dns_servers = std::move(servers);
      break;
    }
    machine.log_event("wizard_reject", {{"field", "dns-servers"}});
  }

  while (true) {
    auto answer = ask("admin-password? ");
    if (!answer) return blocked("admin-password");
    if (!answer->empty()) {
      cfg.admin_password_digest = password_digest(*answer, rng.next());
      break;
    }
    machine.log_event("wizard_reject", {{"field", "admin-password"}});
  }

  media::VirtualMedium* floppy = machine.first_medium(media::MediumKind::ConfigFloppy);
  if (floppy == nullptr) return Error{"NoFloppyDrive", "machine has no floppy drive"};

  // The floppy must be write-enabled before anything can be stored on it.
  while (true) {
    media::ProbeResult probe =
        media::probe_write_lock(*floppy, &machine.log, machine.epoch, machine.now);
    if (probe == media::ProbeResult::Writable) break;
    auto answer = ask("insert-and-write-enable-floppy? ");
    if (!answer) return blocked("write-enable-floppy");
    if (answer_is_yes(*answer)) {
      floppy->present = true;
      floppy->set_write_locked(false).ok();
      machine.log_event("medium_state",
                        {{"id", floppy->medium_id},
                         {"kind", "ConfigFloppy"},
                         {"locked", "0"},
                         {"present", "1"}});
    }
  }

  // New SSH host keys are generated on every configuration pass.
  cfg.ssh_host_key_id = hostkey_id(rng.next());

  floppy->write_file(kFloppyConfigPath, {to_bytes(cfg.serialize()), false}).ok();
  machine.log_event("config_written", {{"medium", floppy->medium_id}});

  // Initial keyring: the template shipped on the boot image.
  if (const media::VirtualMedium* image = machine.first_medium(media::MediumKind::BootImage)) {
    if (const media::FileNode* template_ring = image->tree.find(kImageKeyringPath)) {
      floppy->write_file(kFloppyKeyringPath, *template_ring).ok();
      machine.log_event("keyring_written", {{"medium", floppy->medium_id}});
    }
  }

  // Nothing proceeds until the floppy is verified write-locked again.
  while (true) {
    auto answer = ask("write-lock-floppy? ");
    if (!answer) return blocked("write-lock-floppy");
    if (answer_is_yes(*answer)) {
      floppy->set_write_locked(true).ok();
      machine.log_event("medium_state",
                        {{"id", floppy->medium_id},
                         {"kind", "ConfigFloppy"},
                         {"locked", "1"},
                         {"present", "1"}});
    }
    if (media::probe_write_lock(*floppy, &machine.log, machine.epoch, machine.now) ==
        media::ProbeResult::Locked) {
      break;
    }
  }

  machine.log_event("wizard_done");
  return cfg;
}

}  // namespace everboot::boot

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

#include "everboot/boot.hpp"

#include <algorithm>
#include <cstdio>

#include "everboot/update.hpp"

namespace everboot::boot {

namespace {

std::string format_seconds(double s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

// --- Configuration -----------------------------------------------------------

bool parse_ipv4(std::string_view s, std::array<std::uint8_t, 4>& out) {
  auto parts = split(s, '.');
  if (parts.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!is_all_digits(parts[i]) || parts[i].size() > 3) return false;
    int value = std::stoi(parts[i]);
    if (value < 0 || value > 255) return false;
    out[i] = static_cast<std::uint8_t>(value);
  }
  return true;
}

namespace {
std::optional<std::uint32_t> ipv4_word(std::string_view s) {
  std::array<std::uint8_t, 4> octets{};
  if (!parse_ipv4(s, octets)) return std::nullopt;
  return (std::uint32_t(octets[0]) << 24) | (std::uint32_t(octets[1]) << 16) |
         (std::uint32_t(octets[2]) << 8) | std::uint32_t(octets[3]);
}
}  // namespace

bool netmask_contiguous(std::string_view mask) {
  auto word = ipv4_word(mask);
  if (!word) return false;
  std::uint32_t m = *word;
  // Ones followed by zeros, nothing interleaved.
  std::uint32_t inverted = ~m;
  return (inverted & (inverted + 1)) == 0 && m != 0;
}

bool gateway_in_subnet(std::string_view ip, std::string_view mask, std::string_view gateway) {
  auto ipw = ipv4_word(ip);
  auto mw = ipv4_word(mask);
  auto gw = ipv4_word(gateway);
  if (!ipw || !mw || !gw) return false;
  return (*ipw & *mw) == (*gw & *mw);
}

std::string password_digest(std::string_view password, std::uint64_t salt) {
  Bytes salt_bytes;
  for (int i = 0; i < 8; ++i) salt_bytes.push_back(static_cast<std::uint8_t>(salt >> (8 * i)));
  Bytes material = salt_bytes;
  material.insert(material.end(), password.begin(), password.end());
  return to_hex(salt_bytes) + "$" + digest_hex(DigestAlgorithm::Sha256, material);
}

std::optional<std::string> ApplianceConfig::extra_value(std::string_view key) const {
  for (const auto& [k, v] : extra) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::vector<std::string> ApplianceConfig::revocation_sources() const {
  std::vector<std::string> out;
  if (auto v = extra_value("REVOCATION_SOURCES")) {
    for (const std::string& s : split(*v, ',')) {
      if (!s.empty()) out.push_back(s);
    }
  }
  return out;
}

std::vector<std::string> ApplianceConfig::update_mirrors() const {
  std::vector<std::string> out;
  if (auto v = extra_value("UPDATE_MIRRORS")) {
    for (const std::string& s : split(*v, ',')) {
      if (!s.empty()) out.push_back(s);
    }
  }
  return out;
}

double ApplianceConfig::update_interval_s() const {
  if (auto v = extra_value("UPDATE_INTERVAL_HOURS")) {
    double hours = std::strtod(v->c_str(), nullptr);
    if (hours > 0) return hours * 3600.0;
  }
  return 24.0 * 3600.0;
}

double ApplianceConfig::update_jitter_fraction() const {
  if (auto v = extra_value("UPDATE_JITTER")) {
    double f = std::strtod(v->c_str(), nullptr);
    if (f >= 0 && f < 1) return f;
  }
  return 0.1;
}

std::string ApplianceConfig::serialize() const {
  std::string out;
  out += "IP_ADDRESS=" + ip_address + "\n";
  out += "NETMASK=" + netmask + "\n";
  out += "GATEWAY=" + gateway + "\n";
  out += "DNS_SERVERS=" + join(dns_servers, ',') + "\n";
  out += "PASSWD_DIGEST=" + admin_password_digest + "\n";
  out += "HOSTKEY_ID=" + ssh_host_key_id + "\n";
  for (const auto& [k, v] : extra) out += k + "=" + v + "\n";
  return out;
}

Result<ApplianceConfig> ApplianceConfig::parse(std::string_view text) {
  ApplianceConfig cfg;
  for (std::string_view raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      return Error{"BadConfig", "expected KEY=VALUE: " + std::string(line)};
    }
    std::string key(line.substr(0, eq));
    std::string value(line.substr(eq + 1));
    if (key == "IP_ADDRESS") {
      cfg.ip_address = value;
    } else if (key == "NETMASK") {
      cfg.netmask = value;
    } else if (key == "GATEWAY") {
      cfg.gateway = value;
    } else if (key == "DNS_SERVERS") {
      cfg.dns_servers.clear();
      for (const std::string& s : split(value, ',')) {
        if (!s.empty()) cfg.dns_servers.push_back(s);
      }
    } else if (key == "PASSWD_DIGEST") {
      cfg.admin_password_digest = value;
    } else if (key == "HOSTKEY_ID") {
      cfg.ssh_host_key_id = value;
    } else {
      cfg.extra.emplace_back(std::move(key), std::move(value));  // unknown keys preserved
    }
  }
  return cfg;
}

Result<void> ApplianceConfig::validate() const {
  std::array<std::uint8_t, 4> scratch{};
  if (!parse_ipv4(ip_address, scratch)) return Error{"BadConfig", "bad IP_ADDRESS"};
  if (!netmask_contiguous(netmask)) return Error{"BadConfig", "bad NETMASK"};
  if (!parse_ipv4(gateway, scratch)) return Error{"BadConfig", "bad GATEWAY"};
  if (!gateway_in_subnet(ip_address, netmask, gateway)) {
    return Error{"BadConfig", "gateway outside the configured subnet"};
  }
  if (dns_servers.empty()) return Error{"BadConfig", "DNS_SERVERS must be nonempty"};
  for (const std::string& dns : dns_servers) {
    if (!parse_ipv4(dns, scratch)) return Error{"BadConfig", "bad DNS server address: " + dns};
  }
  return {};
}

// --- Phases -------------------------------------------------------------------

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Reset:
      return "Reset";
    case Phase::Phase0:
      return "Phase0";
    case Phase::Phase1:
      return "Phase1";
    case Phase::Start:
      return "Start";
    case Phase::Running:
      return "Running";
    case Phase::HunkerDown:
      return "HunkerDown";
    case Phase::CallForHelp:
      return "CallForHelp";
  }
  return "?";
}

std::optional<Phase> parse_phase(std::string_view name) {
  for (Phase p : {Phase::Reset, Phase::Phase0, Phase::Phase1, Phase::Start, Phase::Running,
                  Phase::HunkerDown, Phase::CallForHelp}) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

bool legal_transition(Phase from, Phase to) {
  if (to == Phase::Reset) return true;  // a reboot is always available
  switch (from) {
    case Phase::Reset:
      return to == Phase::Phase0;
    case Phase::Phase0:
      return to == Phase::Phase1;
    case Phase::Phase1:
      return to == Phase::Start || to == Phase::HunkerDown || to == Phase::CallForHelp;
    case Phase::Start:
      return to == Phase::Running;
    default:
      return false;
  }
}

void VirtualMachine::set_phase(Phase next) {
  if (!legal_transition(phase, next)) {
    throw std::logic_error(std::string("illegal boot transition ") +
                           std::string(phase_name(phase)) + " -> " +
                           std::string(phase_name(next)));
  }
  phase = next;
  log_event("phase_enter", {{"phase", std::string(phase_name(next))}});
}

// --- Report -------------------------------------------------------------------

std::optional<std::string> BootReport::installed_version(std::string_view name) const {
  for (const auto& [n, v] : installed) {
    if (n == name) return v;
  }
  return std::nullopt;
}

std::string BootReport::render() const {
  std::string out;
  out += "epoch=" + std::to_string(epoch) + "\n";
  out += "final_phase=" + std::string(phase_name(final_phase)) + "\n";
  out += "plan_status=" + std::string(plan.complete() ? "Complete" : "HunkerDown") + "\n";
  if (!plan.missing.empty()) out += "plan_missing=" + join(plan.missing, ',') + "\n";
  for (const auto& step : plan.steps) {
    out += "step=" + std::string(resolve::category_name(step.category)) + " " + step.name + " " +
           step.version + " source=" + step.source_medium + "\n";
  }
  for (const auto& [name, version] : installed) {
    out += "installed=" + name + "=" + version + "\n";
  }
  out += "duration_signature_check_s=" + format_seconds(durations.signature_check_s) + "\n";
  out += "duration_base_install_s=" + format_seconds(durations.base_install_s) + "\n";
  out += "duration_package_install_s=" + format_seconds(durations.package_install_s) + "\n";
  out += "duration_fixed_overhead_s=" + format_seconds(durations.fixed_overhead_s) + "\n";
  out += "duration_total_s=" + format_seconds(durations.total()) + "\n";
  out += "store_hash=" + (store_hash.empty() ? "-" : store_hash) + "\n";
  for (const std::string& warning : warnings) out += "warning=" + warning + "\n";
  return out;
}

Result<BootReport> BootReport::parse(std::string_view text) {
  BootReport report;
  for (std::string_view raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    std::string key(line.substr(0, eq));
    std::string value(line.substr(eq + 1));
    if (key == "epoch") {
      report.epoch = std::strtoull(value.c_str(), nullptr, 10);
    } else if (key == "final_phase") {
      if (auto p = parse_phase(value)) report.final_phase = *p;
    } else if (key == "plan_status") {
      report.plan.status = value == "Complete" ? resolve::InstallPlan::Status::Complete
                                               : resolve::InstallPlan::Status::HunkerDown;
    } else if (key == "plan_missing") {
      for (const std::string& name : split(value, ',')) {
        if (!name.empty()) report.plan.missing.push_back(name);
      }
    } else if (key == "installed") {
      auto inner = value.find('=');
      if (inner != std::string::npos) {
        report.installed.emplace_back(value.substr(0, inner), value.substr(inner + 1));
      }
    } else if (key == "store_hash") {
      report.store_hash = value == "-" ? "" : value;
    } else if (key == "warning") {
      report.warnings.push_back(value);
    } else if (key == "duration_signature_check_s") {
      report.durations.signature_check_s = std::strtod(value.c_str(), nullptr);
    } else if (key == "duration_base_install_s") {
      report.durations.base_install_s = std::strtod(value.c_str(), nullptr);
    } else if (key == "duration_package_install_s") {
      report.durations.package_install_s = std::strtod(value.c_str(), nullptr);
    } else if (key == "duration_fixed_overhead_s") {
      report.durations.fixed_overhead_s = std::strtod(value.c_str(), nullptr);
    }
  }
  return report;
}

// --- Machine helpers ------------------------------------------------------------

VirtualMachine::VirtualMachine(VirtualMachine&& other) noexcept { *this = std::move(other); }

VirtualMachine& VirtualMachine::operator=(VirtualMachine&& other) noexcept {
  if (this == &other) return *this;
  name = std::move(other.name);
  media = std::move(other.media);
  epoch = other.epoch;
  now = other.now;
  phase = other.phase;
  log = std::move(other.log);
  cost_model = other.cost_model;
  package_bytes_override = other.package_bytes_override;
  cd_recognized = other.cd_recognized;
  seed = other.seed;
  root = std::move(other.root);
  vfs = std::move(other.vfs);
  ramdisk = std::move(other.ramdisk);
  keyring = std::move(other.keyring);
  config = std::move(other.config);
  config_loaded = other.config_loaded;
  network_up = other.network_up;
  daemon = other.daemon;
  watchdog = other.watchdog;
  schedule = std::move(other.schedule);
  last_report = std::move(other.last_report);
  rebind_vfs();
  return *this;
}

void VirtualMachine::rebind_vfs() {
  if (root) vfs.set_root(&*root);
  vfs.set_ramdisk(&ramdisk);
  for (auto& medium : media) vfs.register_medium(&medium);
}

media::VirtualMedium* VirtualMachine::find_medium(std::string_view id) {
  for (auto& medium : media) {
    if (medium.medium_id == id) return &medium;
  }
  return nullptr;
}

const media::VirtualMedium* VirtualMachine::find_medium(std::string_view id) const {
  for (const auto& medium : media) {
    if (medium.medium_id == id) return &medium;
  }
  return nullptr;
}

media::VirtualMedium* VirtualMachine::first_medium(media::MediumKind kind) {
  for (auto& medium : media) {
    if (medium.kind == kind) return &medium;
  }
  return nullptr;
}

const media::VirtualMedium* VirtualMachine::first_medium(media::MediumKind kind) const {
  for (const auto& medium : media) {
    if (medium.kind == kind) return &medium;
  }
  return nullptr;
}

std::vector<media::VirtualMedium*> VirtualMachine::disks() {
  std::vector<media::VirtualMedium*> out;
  for (auto& medium : media) {
    if (medium.kind == media::MediumKind::HardDisk && medium.present) out.push_back(&medium);
  }
  return out;
}

void VirtualMachine::log_event(std::string event, LogFields fields) {
  log.append(epoch, now, std::move(event), std::move(fields));
}

std::map<std::string, std::string> VirtualMachine::media_hashes() const {
  std::map<std::string, std::string> out;
  for (const auto& medium : media) out[medium.medium_id] = medium.tree.content_hash();
  return out;
}

std::vector<std::string> default_system_dirs() { return {"/etc", "/dev", "/usr", "/var"}; }

Result<std::vector<resolve::Required>> parse_required_list(std::string_view text) {
  std::vector<resolve::Required> out;
  for (std::string_view raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto sp = line.find(' ');
    if (sp == std::string_view::npos) {
      return Error{"BadRequiredList", "expected '<category> <name>': " + std::string(line)};
    }
    auto category = resolve::parse_category(line.substr(0, sp));
    std::string name(trim(line.substr(sp + 1)));
    if (!category || name.empty()) {
      return Error{"BadRequiredList", "unparseable required entry: " + std::string(line)};
    }
    out.push_back({name, *category});
  }
  return out;
}

std::string serialize_required_list(const std::vector<resolve::Required>& required) {
  std::string out;
  for (const auto& req : required) {
    out += std::string(resolve::category_name(req.category)) + " " + req.name + "\n";
  }
  return out;
}

std::optional<std::string> ScriptedChannel::ask(const std::string& prompt) {
  if (next_ >= answers_.size()) return std::nullopt;
  transcript_.emplace_back(prompt, answers_[next_]);
  return answers_[next_++];
}

// --- Reachability -----------------------------------------------------------------

bool appliance_reachable(const VirtualMachine& machine) {
  return machine.phase == Phase::Running && machine.network_up;
}

bool inbound_probe(VirtualMachine& machine) {
  bool ok = appliance_reachable(machine);
  machine.log_event("inbound_probe", {{"ok", ok ? "1" : "0"}});
  return ok;
}

}  // namespace everboot::boot

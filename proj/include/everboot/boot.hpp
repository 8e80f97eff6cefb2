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

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "everboot/common.hpp"
#include "everboot/costmodel.hpp"
#include "everboot/log.hpp"
#include "everboot/media.hpp"
#include "everboot/resolve.hpp"
#include "everboot/simnet.hpp"
#include "everboot/trust.hpp"

namespace everboot::boot {

// ---------------------------------------------------------------------------
// Configuration

struct ApplianceConfig {
  std::string ip_address;
  std::string netmask;
  std::string gateway;
  std::vector<std::string> dns_servers;
  std::string admin_password_digest;  // "<salt-hex>$<sha256-hex>"
  std::string ssh_host_key_id;
  // Unknown keys are preserved verbatim, in order.
  std::vector<std::pair<std::string, std::string>> extra;

  std::optional<std::string> extra_value(std::string_view key) const;
  std::vector<std::string> revocation_sources() const;   // REVOCATION_SOURCES
  std::vector<std::string> update_mirrors() const;       // UPDATE_MIRRORS
  double update_interval_s() const;                      // UPDATE_INTERVAL_HOURS (default 24 h)
  double update_jitter_fraction() const;                 // UPDATE_JITTER (default 0.1)

  // config.txt: KEY=VALUE per line.
  std::string serialize() const;
  static Result<ApplianceConfig> parse(std::string_view text);
  Result<void> validate() const;
};

bool parse_ipv4(std::string_view s, std::array<std::uint8_t, 4>& out);
bool netmask_contiguous(std::string_view mask);
bool gateway_in_subnet(std::string_view ip, std::string_view mask, std::string_view gateway);
std::string password_digest(std::string_view password, std::uint64_t salt);

// ---------------------------------------------------------------------------
// Boot state machine

enum class Phase { Reset, Phase0, Phase1, Start, Running, HunkerDown, CallForHelp };

std::string_view phase_name(Phase p);
std::optional<Phase> parse_phase(std::string_view name);
bool legal_transition(Phase from, Phase to);

struct StageDurations {
  double signature_check_s = 0.0;
  double base_install_s = 0.0;
  double package_install_s = 0.0;
  double fixed_overhead_s = 0.0;

  double total() const {
    return signature_check_s + base_install_s + package_install_s + fixed_overhead_s;
  }
};

/// Audit record of one boot.
struct BootReport {
  std::uint64_t epoch = 0;
  resolve::InstallPlan plan;
  StageDurations durations;
  std::vector<std::string> warnings;
  Phase final_phase = Phase::Reset;
  std::string store_hash;  // evanescent store content hash, "" if never assembled
  std::vector<std::pair<std::string, std::string>> installed;  // name -> version, plan order

  std::optional<std::string> installed_version(std::string_view name) const;
  std::string render() const;
  static Result<BootReport> parse(std::string_view text);
};

// ---------------------------------------------------------------------------
// Post-boot tasks

struct DaemonStub {
  bool running = false;
  double heartbeat_period_s = 10.0;
  double last_heartbeat = 0.0;
  // Simulated failure injection: the stub stops heartbeating at this time.
  double fail_at = std::numeric_limits<double>::infinity();
};

struct Watchdog {
  bool armed = false;
  double deadline_s = 30.0;
  double last_reset = 0.0;
};

struct UpdateSchedule {
  bool installed = false;
  double interval_s = 24.0 * 3600.0;
  double jitter_fraction = 0.1;
  double next_at = 0.0;
  std::uint64_t draw = 0;  // mirror-selection draw index
  std::vector<std::string> mirrors;
  std::uint64_t rng_seed = 0;
};

// ---------------------------------------------------------------------------
// The machine

class VirtualMachine {
 public:
  // The vfs binds addresses inside this object, so machines move with a
  // fix-up and do not copy.
  VirtualMachine() = default;
  VirtualMachine(VirtualMachine&& other) noexcept;
  VirtualMachine& operator=(VirtualMachine&& other) noexcept;
  VirtualMachine(const VirtualMachine&) = delete;
  VirtualMachine& operator=(const VirtualMachine&) = delete;

  std::string name = "appliance";
  std::vector<media::VirtualMedium> media;
  std::uint64_t epoch = 0;
  double now = 0.0;
  Phase phase = Phase::Reset;
  BootLog log;
  fleet::BootCostModel cost_model;
  // When set, stage accounting bills this many package bytes instead of
  // the actual (possibly desk-scale) payload sizes.
  std::optional<std::uint64_t> package_bytes_override;
  bool cd_recognized = true;
  std::uint64_t seed = 0;

  // Per-boot runtime state.
  std::optional<media::EvanescentRoot> root;
  media::Vfs vfs;
  media::FileTree ramdisk;
  trust::Keyring keyring;
  ApplianceConfig config;
  bool config_loaded = false;
  bool network_up = false;
  DaemonStub daemon;
  Watchdog watchdog;
  UpdateSchedule schedule;
  BootReport last_report;

  media::VirtualMedium* find_medium(std::string_view id);
  const media::VirtualMedium* find_medium(std::string_view id) const;
  media::VirtualMedium* first_medium(media::MediumKind kind);
  const media::VirtualMedium* first_medium(media::MediumKind kind) const;
  std::vector<media::VirtualMedium*> disks();

  void log_event(std::string event, LogFields fields = {});
  void advance(double seconds) { now += seconds; }
  /// Phase change with transition legality enforced.
  void set_phase(Phase next);
  /// Re-points the vfs at this object's root/ramdisk/media.
  void rebind_vfs();

  /// Tree hash per medium; the substrate for the persistent-media
  /// invariant checks.
  std::map<std::string, std::string> media_hashes() const;
};

// Paths baked into images built by the release tooling.
inline constexpr std::string_view kImagePackageDirs[] = {"packages/base", "packages/ports",
                                                         "packages/apps"};
inline constexpr std::string_view kImageVerifierTool = "verifier/verify";
inline constexpr std::string_view kImageRamdiskDir = "ramdisk";
inline constexpr std::string_view kImageKeyringPath = "keyring/keyring.txt";
inline constexpr std::string_view kImageConfigPath = "config/config.txt";
inline constexpr std::string_view kImageRequiredPath = "required.txt";
inline constexpr std::string_view kFloppyConfigPath = "config.txt";
inline constexpr std::string_view kFloppyKeyringPath = "keyring.txt";
inline constexpr std::string_view kCacheDir = "cache";
inline constexpr std::string_view kDaemonConfigPath = "/etc/daemon.conf";
inline constexpr std::string_view kDaemonBinaryPath = "/usr/bin/daemon";

// System directories copied into the evanescent root and redirected.
std::vector<std::string> default_system_dirs();

Result<std::vector<resolve::Required>> parse_required_list(std::string_view text);
std::string serialize_required_list(const std::vector<resolve::Required>& required);

// ---------------------------------------------------------------------------
// Interaction surfaces

/// Interactive channel the configuration wizard speaks through.
class PromptChannel {
 public:
  virtual ~PromptChannel() = default;
  // nullopt when the channel has no more answers (scripted runs).
  virtual std::optional<std::string> ask(const std::string& prompt) = 0;
};

class ScriptedChannel : public PromptChannel {
 public:
  explicit ScriptedChannel(std::vector<std::string> answers) : answers_(std::move(answers)) {}
  std::optional<std::string> ask(const std::string& prompt) override;
  const std::vector<std::pair<std::string, std::string>>& transcript() const { return transcript_; }

 private:
  std::vector<std::string> answers_;
  std::size_t next_ = 0;
  std::vector<std::pair<std::string, std::string>> transcript_;
};

/// Hook for the human at the console during the write-lock refusal loop.
/// Returning true means the operator write-locked the floppy.
class OperatorModel {
 public:
  virtual ~OperatorModel() = default;
  virtual bool on_writable_floppy(VirtualMachine& machine, int poll) {
    (void)machine;
    (void)poll;
    return false;
  }
};

struct BootEnv {
  sim::SimNet* net = nullptr;
  PromptChannel* wizard = nullptr;
  OperatorModel* op = nullptr;
  media::PermissionCallback partition_permission;  // unset => permission denied
  // Overrides for fixtures; empty means "read from the boot image".
  std::vector<resolve::Required> required_override;
  std::vector<std::string> revocation_sources_override;
  int max_floppy_polls = 24;
  double floppy_poll_interval_s = 5.0;
};

// ---------------------------------------------------------------------------
// The boot pipeline

/// Phase 0 runs before swap is enabled: examines the disks, asks
/// permission and partitions them if needed, writes fstab into the
/// staging /etc.
Result<void> run_phase0(VirtualMachine& machine, const BootEnv& env, BootReport& report,
                        media::StorageLayout& layout_out);

/// Phase 1 is the bulk of the platform. Mounts the image and memory fs,
/// enforces the floppy write-lock, loads the keyring, runs the revocation
/// check inside a daemon-free network window, builds the valid-digest
/// list, resolves and executes the install plan, then unmounts.
Result<void> run_phase1(VirtualMachine& machine, const BootEnv& env, BootReport& report,
                        const media::StorageLayout& layout);

/// The service-start script: arms the watchdog, starts the daemon stub
/// if its configuration files exist, installs the update schedule.
Result<void> run_start_phase(VirtualMachine& machine, const BootEnv& env, BootReport& report);

/// Text dialog that collects and validates the appliance configuration,
/// then writes it (plus a fresh host key and the initial keyring) to the
/// floppy and verifies the floppy ends up write-locked.
Result<ApplianceConfig> run_config_wizard(VirtualMachine& machine, PromptChannel& channel,
                                          sim::SimNet* net);

/// Unpacks the planned packages into the evanescent store, in plan order
/// (base sets, redirection swap, then ports, then applications). A
/// payload that resolves outside the store aborts the boot.
Result<void> execute_install_plan(VirtualMachine& machine, const resolve::InstallPlan& plan,
                                  BootReport& report);

/// One full boot: Reset -> Phase0 -> Phase1 -> Start -> Running (or a
/// terminal HunkerDown / CallForHelp). Always yields a report; the
/// machine's last_report and log are updated in place.
BootReport boot_machine(VirtualMachine& machine, const BootEnv& env);

/// Advances simulated time to t_end, running the three post-boot tasks
/// (daemon stub, watchdog, update scheduler). A watchdog expiry reboots
/// the machine through the full pipeline. Returns the number of reboots.
int run_until(VirtualMachine& machine, const BootEnv& env, double t_end);

/// True when the appliance answers the (simulated) network.
bool appliance_reachable(const VirtualMachine& machine);
/// Same, but records the attempt on the machine's log.
bool inbound_probe(VirtualMachine& machine);

}  // namespace everboot::boot

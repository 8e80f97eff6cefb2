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

#include "everboot/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "everboot/boot.hpp"
#include "everboot/release.hpp"
#include "everboot/simnet.hpp"
#include "everboot/update.hpp"

namespace everboot::fleet {

namespace {

constexpr double kHourSeconds = 3600.0;

std::string format_hours(double h) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", h);
  return buf;
}

std::string format_fraction(double f) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", f);
  return buf;
}

double sample_admin_delay_h(const FleetScenario& scenario, int appliance) {
  if (scenario.admin_dist == "fixed") return scenario.admin_fixed_h;
  sim::Rng rng(sim::Rng::mix(scenario.seed, 0xAD414C00ULL + static_cast<std::uint64_t>(appliance)));
  double u1 = rng.unit();
  double u2 = rng.unit();
  if (u1 <= 0.0) u1 = 1e-12;
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  return std::exp(scenario.admin_mu_log + scenario.admin_sigma_log * z);
}

}  // namespace

// --- Scenario file -----------------------------------------------------------

std::string FleetScenario::serialize() const {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "N_APPLIANCES=%d\n"
                "MIRROR_COUNT=%d\n"
                "ADMIN_DIST=%s\n"
                "ADMIN_MU_LOG=%.17g\n"
                "ADMIN_SIGMA_LOG=%.17g\n"
                "ADMIN_FIXED_H=%.17g\n"
                "CHECK_INTERVAL_HOURS=%.17g\n"
                "CHECK_JITTER=%.17g\n"
                "BOOT_FIXED_S=%.17g\n"
                "BOOT_SIGNATURE_S=%.17g\n"
                "BOOT_BASE_S=%.17g\n"
                "BOOT_RATE_BPS=%.17g\n"
                "PACKAGE_BYTES=%llu\n"
                "HORIZON_HOURS=%.17g\n"
                "SAMPLE_INTERVAL_HOURS=%.17g\n"
                "SEED=%llu\n"
                "TAMPER=%d\n",
                n_appliances, mirror_count, admin_dist.c_str(), admin_mu_log, admin_sigma_log,
                admin_fixed_h, check_interval_h, check_jitter_fraction, model.fixed_overhead_s,
                model.signature_check_s, model.base_install_s, model.package_rate_bytes_per_s,
                static_cast<unsigned long long>(package_bytes), horizon_h, sample_interval_h,
                static_cast<unsigned long long>(seed), tamper ? 1 : 0);
  out = buf;
  return out;
}

Result<FleetScenario> FleetScenario::parse(std::string_view text) {
  FleetScenario s;
  for (std::string_view raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      return Error{"BadScenario", "expected KEY=VALUE: " + std::string(line)};
    }
    std::string key(line.substr(0, eq));
    std::string value(line.substr(eq + 1));
    double d = std::strtod(value.c_str(), nullptr);
    if (key == "N_APPLIANCES") {
      s.n_appliances = std::atoi(value.c_str());
    } else if (key == "MIRROR_COUNT") {
      s.mirror_count = std::atoi(value.c_str());
    } else if (key == "ADMIN_DIST") {
      s.admin_dist = value;
    } else if (key == "ADMIN_MU_LOG") {
      s.admin_mu_log = d;
    } else if (key == "ADMIN_SIGMA_LOG") {
      s.admin_sigma_log = d;
    } else if (key == "ADMIN_FIXED_H") {
      s.admin_fixed_h = d;
    } else if (key == "CHECK_INTERVAL_HOURS") {
      s.check_interval_h = d;
    } else if (key == "CHECK_JITTER") {
      s.check_jitter_fraction = d;
    } else if (key == "BOOT_FIXED_S") {
      s.model.fixed_overhead_s = d;
    } else if (key == "BOOT_SIGNATURE_S") {
      s.model.signature_check_s = d;
    } else if (key == "BOOT_BASE_S") {
      s.model.base_install_s = d;
    } else if (key == "BOOT_RATE_BPS") {
      s.model.package_rate_bytes_per_s = d;
    } else if (key == "PACKAGE_BYTES") {
      s.package_bytes = std::strtoull(value.c_str(), nullptr, 10);
    } else if (key == "HORIZON_HOURS") {
      s.horizon_h = d;
    } else if (key == "SAMPLE_INTERVAL_HOURS") {
      s.sample_interval_h = d;
    } else if (key == "SEED") {
      s.seed = std::strtoull(value.c_str(), nullptr, 10);
    } else if (key == "TAMPER") {
      s.tamper = value == "1" || value == "true";
    } else {
      return Error{"BadScenario", "unknown scenario key: " + key};
    }
  }
  auto valid = s.validate();
  if (!valid.ok()) return valid.error();
  return s;
}

Result<void> FleetScenario::validate() const {
  if (n_appliances < 1) return Error{"BadScenario", "N_APPLIANCES must be >= 1"};
  if (mirror_count < 1) return Error{"BadScenario", "MIRROR_COUNT must be >= 1"};
  if (horizon_h <= 0) return Error{"BadScenario", "HORIZON_HOURS must be positive"};
  if (admin_dist != "lognormal" && admin_dist != "fixed") {
    return Error{"BadScenario", "ADMIN_DIST must be lognormal or fixed"};
  }
  if (admin_sigma_log < 0 || admin_fixed_h < 0 || check_interval_h <= 0 ||
      check_jitter_fraction < 0 || check_jitter_fraction >= 1 || sample_interval_h <= 0) {
    return Error{"BadScenario", "distribution/interval parameters out of range"};
  }
  if (model.fixed_overhead_s < 0 || model.signature_check_s < 0 || model.base_install_s < 0 ||
      model.package_rate_bytes_per_s <= 0) {
    return Error{"BadScenario", "boot cost model components out of range"};
  }
  return {};
}

// --- Curve ---------------------------------------------------------------------

bool RolloutCurve::monotone() const {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].second < samples[i - 1].second) return false;
  }
  return true;
}

std::string RolloutCurve::two_column_text() const {
  std::string out;
  for (const auto& [h, f] : samples) {
    out += format_hours(h) + " " + format_fraction(f) + "\n";
  }
  return out;
}

double FiredrillResult::fraction_at(double hours) const {
  if (upgrade_times_h.empty()) return 0.0;
  std::size_t upgraded = 0;
  for (double u : upgrade_times_h) {
    if (u <= hours) ++upgraded;
  }
  return static_cast<double>(upgraded) / static_cast<double>(upgrade_times_h.size());
}

std::string FiredrillResult::trace_text() const {
  std::string out;
  for (const std::string& line : trace) {
    out += line;
    out += '\n';
  }
  return out;
}

// --- The simulation ----------------------------------------------------------------

Result<FiredrillResult> simulate_firedrill(const FleetScenario& scenario) {
  auto valid = scenario.validate();
  if (!valid.ok()) return valid.error();

  const std::string patch_version = "1.1";
  const std::string old_version = "1.0";

  // Release keys and the package sets. Every manifest carries two
  // signatures so no single revocation can strand the fleet.
  auto key_a = trust::generate_keypair("release-a", sim::Rng::mix(scenario.seed, 1));
  auto key_b = trust::generate_keypair("release-b", sim::Rng::mix(scenario.seed, 2));
  if (!key_a.ok() || !key_b.ok()) return Error{"KeygenFailed", "release key derivation failed"};
  std::vector<trust::SecretKey> signers{key_a.value().secret_key, key_b.value().secret_key};
  trust::Keyring template_ring("image");
  template_ring.add_key(key_a.value().public_key).ok();
  template_ring.add_key(key_b.value().public_key).ok();

  auto make_packages = [&](const std::string& daemon_version) {
    std::vector<release::PackageSpec> packages;
    packages.push_back({"core",
                        "1.0",
                        resolve::Category::Base,
                        {{"/usr/bin/sh", to_bytes("#!shell\n"), true},
                         {"/etc/core.conf", to_bytes("core\n"), false}}});
    packages.push_back({"rt",
                        "1.0",
                        resolve::Category::Port,
                        {{"/usr/lib/rt.so", to_bytes("rt-library\n"), false}}});
    packages.push_back({"daemon",
                        daemon_version,
                        resolve::Category::Application,
                        {{"/usr/bin/daemon", to_bytes("daemon-" + daemon_version + "\n"), true},
                         {"/etc/daemon.conf", to_bytes("VERSION=" + daemon_version + "\n"), false}}});
    return packages;
  };

  auto image = release::build_image(make_packages(old_version), template_ring, signers);
  if (!image.ok()) return image.error();

  sim::SimNet net;
  update::MirrorSet mirror_set;
  mirror_set.rng_seed = sim::Rng::mix(scenario.seed, 3);
  for (int m = 0; m < scenario.mirror_count; ++m) {
    std::string id = "mirror" + std::to_string(m);
    net.add_mirror(id);
    mirror_set.servers.push_back(id);
  }

  double boot_s = boot_duration(scenario.model, scenario.package_bytes).value();
  double horizon_s = scenario.horizon_h * kHourSeconds;

  FiredrillResult result;
  result.upgrade_times_h.assign(static_cast<std::size_t>(scenario.n_appliances),
                                std::numeric_limits<double>::infinity());

  struct TraceEvent {
    double t_h;
    int seq;
    std::string line;
  };
  std::vector<TraceEvent> events;
  int seq = 0;
  auto trace = [&](double t_h, const std::string& line) {
    events.push_back({t_h, seq++, "t=" + format_hours(t_h) + " " + line});
  };

  std::string mirrors_csv;
  for (std::size_t m = 0; m < mirror_set.servers.size(); ++m) {
    if (m > 0) mirrors_csv += ",";
    mirrors_csv += mirror_set.servers[m];
  }

  // The fleet. Each appliance is a full machine; it first boots well
  // before the patch goes out.
  std::vector<boot::VirtualMachine> machines;
  machines.reserve(static_cast<std::size_t>(scenario.n_appliances));
  boot::BootEnv env;
  env.net = &net;
  env.partition_permission = [](const std::string&) { return true; };

  for (int i = 0; i < scenario.n_appliances; ++i) {
    boot::VirtualMachine machine;
    machine.name = "appliance" + std::to_string(i);
    machine.seed = sim::Rng::mix(scenario.seed, 0xF1EE7000ULL + static_cast<std::uint64_t>(i));
    machine.cost_model = scenario.model;
    machine.package_bytes_override = scenario.package_bytes;
    machine.now = -(boot_s + 120.0);  // running comfortably before t=0

    machine.media.push_back(image.value());

    media::VirtualMedium floppy("floppy", media::MediumKind::ConfigFloppy);
    boot::ApplianceConfig cfg;
    int a = i / 250, b = (i / 50) % 5, c = i % 50;
    cfg.ip_address = "10." + std::to_string(a) + "." + std::to_string(b) + "." +
                     std::to_string(10 + c);
    cfg.netmask = "255.0.0.0";
    cfg.gateway = "10.0.0.1";
    cfg.dns_servers = {"10.0.0.53"};
    cfg.admin_password_digest = boot::password_digest("fleet", machine.seed);
    cfg.ssh_host_key_id = "hostkey-fleet";
    cfg.extra.emplace_back("UPDATE_MIRRORS", mirrors_csv);
    cfg.extra.emplace_back("UPDATE_INTERVAL_HOURS", format_hours(scenario.check_interval_h));
    cfg.extra.emplace_back("UPDATE_JITTER", format_fraction(scenario.check_jitter_fraction));
    floppy.tree.write(std::string(boot::kFloppyConfigPath), {to_bytes(cfg.serialize()), false})
        .ok();
    floppy.tree
        .write(std::string(boot::kFloppyKeyringPath), {to_bytes(template_ring.serialize()), false})
        .ok();
    floppy.set_write_locked(true).ok();
    machine.media.push_back(std::move(floppy));

    media::VirtualMedium disk("disk0", media::MediumKind::HardDisk);
    disk.size_bytes = 4 * media::kGiB;
    machine.media.push_back(std::move(disk));

    boot::BootReport report = boot::boot_machine(machine, env);
    if (report.final_phase != boot::Phase::Running) {
      return Error{"FleetBootFailed",
                   machine.name + " failed its initial boot: " +
                       std::string(boot::phase_name(report.final_phase))};
    }
    machines.push_back(std::move(machine));
  }

  // Pre-publish: let every appliance idle up to t=0 against the
  // pre-patch mirrors.
  for (auto& machine : machines) boot::run_until(machine, env, 0.0);

  // t=0: build the patched image, extract and sign the package, put it
  // on the mirrors, notify every site.
  auto patched_image = release::build_image(make_packages(patch_version), template_ring, signers);
  if (!patched_image.ok()) return patched_image.error();
  auto bundle = release::extract_and_sign_package(patched_image.value(), "daemon", signers);
  if (!bundle.ok()) return bundle.error();

  std::vector<std::string> sites;
  for (const auto& machine : machines) sites.push_back(machine.name);
  auto published =
      release::publish_and_notify(net, mirror_set, bundle.value().bundle, sites, nullptr);
  if (!published.ok()) return published.error();
  trace(0.0, "event=publish version=" + patch_version +
                 " mirrors=" + std::to_string(published.value().published.size()) +
                 " sites=" + std::to_string(sites.size()));

  if (scenario.tamper) {
    // Corrupt the published package on every mirror, after signing.
    for (const std::string& id : mirror_set.servers) {
      sim::MirrorEndpoint* ep = net.mirror(id);
      const media::FileNode* node = ep->tree.find(bundle.value().package_filename);
      if (node != nullptr) {
        media::FileNode mutated = *node;
        mutated.content[mutated.content.size() / 2] ^= 0x01;
        ep->tree.write(bundle.value().package_filename, mutated).ok();
      }
    }
    trace(0.0, "event=tamper mirrors=" + std::to_string(mirror_set.servers.size()));
  }

  // Post-publish: each appliance's admin acts after their response delay
  // (log in, run the check script, reboot); scheduled checks keep firing
  // either way.
  for (int i = 0; i < scenario.n_appliances; ++i) {
    boot::VirtualMachine& machine = machines[static_cast<std::size_t>(i)];
    double delay_h = sample_admin_delay_h(scenario, i);
    double act_at = delay_h * kHourSeconds;

    if (act_at < horizon_s) {
      boot::run_until(machine, env, act_at);
      if (machine.phase == boot::Phase::Running) {
        trace(delay_h, "appliance=" + std::to_string(i) + " event=admin_action");
        // The check script: fetch from a mirror, falling back across the
        // list if the drawn one is unreachable.
        sim::ProcessTag proc{"updater", false, true};
        for (std::size_t attempt = 0; attempt < mirror_set.servers.size(); ++attempt) {
          auto picked = update::pick_mirror(mirror_set, machine.schedule.draw++);
          if (!picked.ok()) break;
          auto fetched = update::check_and_fetch(picked.value(), machine, proc, net);
          if (fetched.ok() && !fetched.value().unreachable) break;
        }
        boot::BootReport report = boot::boot_machine(machine, env);
        double done_h = machine.now / kHourSeconds;
        auto daemon_version = report.installed_version("daemon");
        if (report.final_phase == boot::Phase::Running && daemon_version == patch_version) {
          result.upgrade_times_h[static_cast<std::size_t>(i)] = done_h;
          trace(done_h, "appliance=" + std::to_string(i) + " event=upgraded version=" +
                            patch_version);
        } else {
          const media::VirtualMedium* disk = update::cache_disk(machine);
          bool cached_newer =
              disk != nullptr &&
              disk->tree.find(std::string(boot::kCacheDir) + "/" +
                              bundle.value().package_filename) != nullptr;
          if (cached_newer && daemon_version == old_version) {
            ++result.reverted;
            trace(done_h, "appliance=" + std::to_string(i) + " event=reverted version=" +
                              old_version);
          } else {
            trace(done_h, "appliance=" + std::to_string(i) + " event=boot_result phase=" +
                              std::string(boot::phase_name(report.final_phase)));
          }
        }
      }
    }
    boot::run_until(machine, env, horizon_s);
  }

  std::stable_sort(events.begin(), events.end(), [](const TraceEvent& a, const TraceEvent& b) {
    if (a.t_h != b.t_h) return a.t_h < b.t_h;
    return a.seq < b.seq;
  });
  for (const TraceEvent& event : events) result.trace.push_back(event.line);

  for (double t = 0.0; t <= scenario.horizon_h + 1e-9; t += scenario.sample_interval_h) {
    result.curve.samples.emplace_back(t, result.fraction_at(t));
  }
  return result;
}

}  // namespace everboot::fleet

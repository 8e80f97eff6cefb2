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

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "everboot/boot.hpp"
#include "everboot/fleet.hpp"
#include "everboot/machineio.hpp"
#include "everboot/release.hpp"
#include "everboot/trust.hpp"
#include "everboot/update.hpp"

namespace fs = std::filesystem;
using namespace everboot;

namespace {

int fail(const Error& error) {
  std::cerr << "error: " << error.render() << "\n";
  return 1;
}

int fail(const std::string& code, const std::string& message) {
  return fail(Error{code, message});
}

Result<std::string> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Error{"IoError", "cannot read " + path.string()};
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Result<void> spit(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return Error{"IoError", "cannot write " + path.string()};
  out << text;
  return {};
}

// "60d", "48h", "15m", "320s", or plain seconds.
Result<double> parse_duration_s(const std::string& text) {
  if (text.empty()) return Error{"BadDuration", "empty duration"};
  double scale = 1.0;
  std::string digits = text;
  switch (text.back()) {
    case 'd':
      scale = 86400.0;
      digits.pop_back();
      break;
    case 'h':
      scale = 3600.0;
      digits.pop_back();
      break;
    case 'm':
      scale = 60.0;
      digits.pop_back();
      break;
    case 's':
      digits.pop_back();
      break;
    default:
      break;
  }
  char* end = nullptr;
  double value = std::strtod(digits.c_str(), &end);
  if (end == digits.c_str() || *end != '\0' || value < 0) {
    return Error{"BadDuration", "unparseable duration: " + text};
  }
  return value * scale;
}

// "96MB" (10^6), "8MiB" (2^20), "1GB", "2GiB", or plain bytes.
Result<std::uint64_t> parse_bytes(const std::string& text) {
  std::string digits = text;
  std::uint64_t scale = 1;
  auto ends_with = [&](std::string_view suffix) { return text.ends_with(suffix); };
  if (ends_with("GiB")) {
    scale = 1024ULL * 1024ULL * 1024ULL;
    digits = text.substr(0, text.size() - 3);
  } else if (ends_with("MiB")) {
    scale = 1024ULL * 1024ULL;
    digits = text.substr(0, text.size() - 3);
  } else if (ends_with("KiB")) {
    scale = 1024ULL;
    digits = text.substr(0, text.size() - 3);
  } else if (ends_with("GB")) {
    scale = 1000ULL * 1000ULL * 1000ULL;
    digits = text.substr(0, text.size() - 2);
  } else if (ends_with("MB")) {
    scale = 1000ULL * 1000ULL;
    digits = text.substr(0, text.size() - 2);
  } else if (ends_with("KB")) {
    scale = 1000ULL;
    digits = text.substr(0, text.size() - 2);
  }
  char* end = nullptr;
  double value = std::strtod(digits.c_str(), &end);
  if (end == digits.c_str() || *end != '\0' || value < 0) {
    return Error{"BadBytes", "unparseable byte count: " + text};
  }
  return static_cast<std::uint64_t>(value * static_cast<double>(scale));
}

Result<std::vector<trust::SecretKey>> load_secrets(const std::vector<std::string>& paths) {
  std::vector<trust::SecretKey> secrets;
  for (const std::string& path : paths) {
    auto text = slurp(path);
    if (!text.ok()) return text.error();
    auto secret = trust::SecretKey::parse(text.value());
    if (!secret.ok()) return secret.error();
    secrets.push_back(secret.take());
  }
  return secrets;
}

Result<std::vector<std::string>> load_answers(const std::string& path) {
  auto text = slurp(path);
  if (!text.ok()) return text.error();
  std::vector<std::string> answers;
  for (const std::string& line : split(text.value(), '\n')) answers.push_back(line);
  while (!answers.empty() && answers.back().empty()) answers.pop_back();
  return answers;
}

/// Interactive stdin channel for wizard runs at a real terminal.
class StdinChannel : public boot::PromptChannel {
 public:
  std::optional<std::string> ask(const std::string& prompt) override {
    std::cout << prompt << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) return std::nullopt;
    return line;
  }
};

// Mirror directories become simulated endpoints named by directory stem.
Result<update::MirrorSet> mount_mirrors(sim::SimNet& net, const std::vector<std::string>& dirs,
                                        std::uint64_t seed) {
  update::MirrorSet set;
  set.rng_seed = seed;
  for (const std::string& dir : dirs) {
    auto tree = machineio::load_tree(dir);
    if (!tree.ok()) return tree.error();
    std::string id = fs::path(dir).filename().string();
    if (id.empty()) id = fs::path(dir).parent_path().filename().string();
    net.add_mirror(id).tree = tree.take();
    set.servers.push_back(id);
  }
  return set;
}

struct PkgArg {
  resolve::Category category;
  std::string name;
  std::string version;
  std::string dir;
};

Result<PkgArg> parse_pkg_arg(const std::string& arg) {
  auto parts = split(arg, ':');
  if (parts.size() != 4) {
    return Error{"BadPackageArg", "expected <category>:<name>:<version>:<dir>, got " + arg};
  }
  auto category = resolve::parse_category(parts[0]);
  if (!category) return Error{"BadPackageArg", "unknown category " + parts[0]};
  return PkgArg{*category, parts[1], parts[2], parts[3]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"everboot: a signed-package network appliance platform, simulated"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for every stochastic component");

  // keygen ------------------------------------------------------------------
  auto* cmd_keygen = app.add_subcommand("keygen", "generate a deterministic signing keypair");
  std::string kg_id, kg_out = ".";
  cmd_keygen->add_option("--key-id", kg_id, "key identifier")->required();
  cmd_keygen->add_option("--out", kg_out, "output directory");

  // sign --------------------------------------------------------------------
  auto* cmd_sign = app.add_subcommand("sign", "write a detached signature for a payload");
  std::string sg_secret, sg_payload, sg_alg = "sha256";
  cmd_sign->add_option("--secret", sg_secret, "secret key file")->required();
  cmd_sign->add_option("--algorithm", sg_alg, "digest algorithm (sha256|md5)");
  cmd_sign->add_option("payload", sg_payload, "file to sign")->required();

  // verify ------------------------------------------------------------------
  auto* cmd_verify = app.add_subcommand("verify", "verify a detached signature");
  std::string vf_keyring, vf_sig, vf_payload;
  cmd_verify->add_option("--keyring", vf_keyring, "keyring file")->required();
  cmd_verify->add_option("--sig", vf_sig, "signature file")->required();
  cmd_verify->add_option("payload", vf_payload, "signed file")->required();

  // build-image ---------------------------------------------------------------
  auto* cmd_build = app.add_subcommand("build-image", "build a bootable image from package sets");
  std::vector<std::string> bi_pkgs, bi_signers;
  std::string bi_out, bi_trust, bi_config, bi_digest = "sha256";
  cmd_build->add_option("--out", bi_out, "image directory to write")->required();
  cmd_build->add_option("--pkg", bi_pkgs, "<category>:<name>:<version>:<dir>")->required();
  cmd_build->add_option("--trust", bi_trust, "keyring template file")->required();
  cmd_build->add_option("--signer", bi_signers, "secret key file (repeatable)")->required();
  cmd_build->add_option("--config", bi_config, "default config.txt for the image");
  cmd_build->add_option("--digest", bi_digest, "manifest digest algorithm (sha256|md5)");

  // extract-sign ---------------------------------------------------------------
  auto* cmd_extract = app.add_subcommand("extract-sign", "extract a package from an image and sign it");
  std::string xs_image, xs_name, xs_out, xs_digest = "sha256";
  std::vector<std::string> xs_signers;
  cmd_extract->add_option("--image", xs_image, "image directory")->required();
  cmd_extract->add_option("--name", xs_name, "package name")->required();
  cmd_extract->add_option("--signer", xs_signers, "secret key file (repeatable)")->required();
  cmd_extract->add_option("--out", xs_out, "bundle directory to write")->required();
  cmd_extract->add_option("--digest", xs_digest, "digest algorithm (sha256|md5)");

  // publish ---------------------------------------------------------------------
  auto* cmd_publish = app.add_subcommand("publish", "place a bundle on mirrors and notify sites");
  std::string pb_bundle;
  std::vector<std::string> pb_mirrors, pb_sites;
  cmd_publish->add_option("--bundle", pb_bundle, "bundle directory")->required();
  cmd_publish->add_option("--mirror", pb_mirrors, "mirror directory (repeatable)")->required();
  cmd_publish->add_option("--site", pb_sites, "site to notify (repeatable)");

  // boot --------------------------------------------------------------------------
  auto* cmd_boot = app.add_subcommand("boot", "boot a serialized machine");
  std::string bt_machine, bt_answers;
  std::vector<std::string> bt_mirrors, bt_revocation;
  int bt_epochs = 1;
  bool bt_yes = false;
  std::string bt_run_for = "0s";
  cmd_boot->add_option("machine-dir", bt_machine, "machine directory")->required();
  cmd_boot->add_option("--epochs", bt_epochs, "number of consecutive boots");
  cmd_boot->add_option("--answers", bt_answers, "scripted wizard answers file");
  cmd_boot->add_flag("--yes", bt_yes, "grant partitioning permission without prompting");
  cmd_boot->add_option("--run-for", bt_run_for, "simulated time to run after each boot (e.g. 48h)");
  cmd_boot->add_option("--mirror", bt_mirrors, "mirror directory served to the updater");
  cmd_boot->add_option("--revocation", bt_revocation, "<endpoint>=<file> revocation list endpoint");

  // configure -----------------------------------------------------------------------
  auto* cmd_config = app.add_subcommand("configure", "run the configuration wizard");
  std::string cf_machine, cf_answers;
  std::vector<std::string> cf_bad_dns;
  cmd_config->add_option("machine-dir", cf_machine, "machine directory")->required();
  cmd_config->add_option("--answers", cf_answers, "scripted answers file");
  cmd_config->add_option("--unreachable-dns", cf_bad_dns, "DNS server address that must fail");

  // fetch-updates ----------------------------------------------------------------------
  auto* cmd_fetch = app.add_subcommand("fetch-updates", "run one scheduled update check now");
  std::string fu_machine;
  std::vector<std::string> fu_mirrors;
  cmd_fetch->add_option("machine-dir", fu_machine, "machine directory")->required();
  cmd_fetch->add_option("--mirror", fu_mirrors, "mirror directory (repeatable)")->required();

  // firedrill -----------------------------------------------------------------------------
  auto* cmd_fire = app.add_subcommand("firedrill", "simulate a fleet-wide patch rollout");
  std::string fd_scenario, fd_trace_out, fd_curve_out;
  cmd_fire->add_option("scenario-file", fd_scenario, "scenario KEY=VALUE file")->required();
  cmd_fire->add_option("--trace-out", fd_trace_out, "write the event trace here");
  cmd_fire->add_option("--curve-out", fd_curve_out, "write the rollout curve here");

  // availability -----------------------------------------------------------------------------
  auto* cmd_avail = app.add_subcommand("availability", "downtime fraction for a reboot cadence");
  std::string av_interval, av_boot_seconds;
  cmd_avail->add_option("--interval", av_interval, "reboot interval (e.g. 60d)")->required();
  cmd_avail->add_option("--boot-seconds", av_boot_seconds, "boot duration in seconds")->required();

  // boot-time ----------------------------------------------------------------------------------
  auto* cmd_boottime = app.add_subcommand("boot-time", "boot duration under the cost model");
  std::string bd_bytes = "96MB";
  double bd_fixed = 85.0, bd_sig = 30.0, bd_base = 25.0, bd_rate = 96e6 / 180.0;
  cmd_boottime->add_option("--bytes", bd_bytes, "package bytes installed (e.g. 96MB)");
  cmd_boottime->add_option("--fixed", bd_fixed, "fixed overhead seconds");
  cmd_boottime->add_option("--signature", bd_sig, "signature check seconds");
  cmd_boottime->add_option("--base", bd_base, "base install seconds");
  cmd_boottime->add_option("--rate", bd_rate, "package install rate, bytes/second");

  // inspect ---------------------------------------------------------------------------------------
  auto* cmd_inspect = app.add_subcommand("inspect", "dump a machine's report and logs");
  std::string in_machine;
  bool in_no_log = false;
  cmd_inspect->add_option("machine-dir", in_machine, "machine directory")->required();
  cmd_inspect->add_flag("--no-log", in_no_log, "omit the boot log");

  // Global flags like --seed may appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_keygen) {
      auto pair = trust::generate_keypair(kg_id, seed);
      if (!pair.ok()) return fail(pair.error());
      trust::Keyring fragment;
      fragment.add_key(pair.value().public_key).ok();
      fs::create_directories(kg_out);
      auto pub = spit(fs::path(kg_out) / (kg_id + ".pub"), fragment.serialize());
      if (!pub.ok()) return fail(pub.error());
      auto sec = spit(fs::path(kg_out) / (kg_id + ".sec"), pair.value().secret_key.serialize());
      if (!sec.ok()) return fail(sec.error());
      std::cout << fragment.serialize();
      return 0;
    }

    if (*cmd_sign) {
      auto alg = parse_digest_algorithm(sg_alg);
      if (!alg) return fail("UnsupportedAlgorithm", "unknown digest algorithm: " + sg_alg);
      auto secrets = load_secrets({sg_secret});
      if (!secrets.ok()) return fail(secrets.error());
      auto payload = slurp(sg_payload);
      if (!payload.ok()) return fail(payload.error());
      auto sig = trust::sign_payload(to_bytes(payload.value()), secrets.value()[0], *alg);
      if (!sig.ok()) return fail(sig.error());
      std::string sig_path =
          trust::signature_filename(sg_payload, secrets.value()[0].key_id);
      auto wrote = spit(sig_path, sig.value().serialize());
      if (!wrote.ok()) return fail(wrote.error());
      std::cout << sig_path << "\n";
      return 0;
    }

    if (*cmd_verify) {
      auto ring_text = slurp(vf_keyring);
      if (!ring_text.ok()) return fail(ring_text.error());
      auto ring = trust::Keyring::parse(ring_text.value(), vf_keyring);
      if (!ring.ok()) return fail(ring.error());
      auto sig_text = slurp(vf_sig);
      if (!sig_text.ok()) return fail(sig_text.error());
      auto sig = trust::DetachedSignature::parse(sig_text.value());
      if (!sig.ok()) return fail(sig.error());
      auto payload = slurp(vf_payload);
      if (!payload.ok()) return fail(payload.error());
      trust::VerifyResult result =
          trust::verify_signature(to_bytes(payload.value()), sig.value(), ring.value());
      std::cout << result.render() << "\n";
      return result.valid() ? 0 : 2;
    }

    if (*cmd_build) {
      auto alg = parse_digest_algorithm(bi_digest);
      if (!alg) return fail("UnsupportedAlgorithm", "unknown digest algorithm: " + bi_digest);
      auto trust_text = slurp(bi_trust);
      if (!trust_text.ok()) return fail(trust_text.error());
      auto ring = trust::Keyring::parse(trust_text.value(), "image");
      if (!ring.ok()) return fail(ring.error());
      auto signers = load_secrets(bi_signers);
      if (!signers.ok()) return fail(signers.error());

      std::vector<release::PackageSpec> specs;
      for (const std::string& arg : bi_pkgs) {
        auto parsed = parse_pkg_arg(arg);
        if (!parsed.ok()) return fail(parsed.error());
        auto tree = machineio::load_tree(parsed.value().dir);
        if (!tree.ok()) return fail(tree.error());
        release::PackageSpec spec;
        spec.name = parsed.value().name;
        spec.version = parsed.value().version;
        spec.category = parsed.value().category;
        for (const auto& [path, node] : tree.value().files()) {
          spec.entries.push_back({"/" + path, node.content, node.exec});
        }
        specs.push_back(std::move(spec));
      }

      release::BuildOptions options;
      options.algorithm = *alg;
      if (!bi_config.empty()) {
        auto cfg_text = slurp(bi_config);
        if (!cfg_text.ok()) return fail(cfg_text.error());
        auto cfg = boot::ApplianceConfig::parse(cfg_text.value());
        if (!cfg.ok()) return fail(cfg.error());
        options.default_config = cfg.take();
      }
      auto image = release::build_image(specs, ring.value(), signers.value(), options);
      if (!image.ok()) return fail(image.error());
      auto saved = machineio::save_medium(image.value(), bi_out);
      if (!saved.ok()) return fail(saved.error());
      std::size_t manifests = 0, packages = 0;
      for (const auto& [path, node] : image.value().tree.files()) {
        if (resolve::is_manifest_filename(path)) ++manifests;
        if (path.ends_with(".pkg")) ++packages;
      }
      std::cout << "image " << bi_out << " manifests=" << manifests << " packages=" << packages
                << "\n";
      return 0;
    }

    if (*cmd_extract) {
      auto alg = parse_digest_algorithm(xs_digest);
      if (!alg) return fail("UnsupportedAlgorithm", "unknown digest algorithm: " + xs_digest);
      auto image = machineio::load_medium(xs_image);
      if (!image.ok()) return fail(image.error());
      auto signers = load_secrets(xs_signers);
      if (!signers.ok()) return fail(signers.error());
      auto bundle = release::extract_and_sign_package(image.value(), xs_name, signers.value(), *alg);
      if (!bundle.ok()) return fail(bundle.error());
      auto saved = machineio::save_tree(bundle.value().bundle, xs_out);
      if (!saved.ok()) return fail(saved.error());
      for (const auto& [path, node] : bundle.value().bundle.files()) {
        std::cout << path << "\n";
      }
      for (const std::string& warning : bundle.value().warnings) {
        std::cout << "warning: " << warning << "\n";
      }
      return 0;
    }

    if (*cmd_publish) {
      auto bundle = machineio::load_tree(pb_bundle);
      if (!bundle.ok()) return fail(bundle.error());
      if (bundle.value().file_count() == 0) return fail("EmptyBundle", "bundle has no files");
      sim::SimNet net;
      update::MirrorSet mirrors;
      std::vector<std::string> mirror_dirs;
      for (const std::string& dir : pb_mirrors) {
        std::string id = fs::path(dir).filename().string();
        auto existing = machineio::load_tree(dir);
        if (!existing.ok()) return fail(existing.error());
        net.add_mirror(id).tree = existing.take();
        mirrors.servers.push_back(id);
        mirror_dirs.push_back(dir);
      }
      BootLog mail_log;
      auto report = release::publish_and_notify(net, mirrors, bundle.value(), pb_sites, &mail_log);
      if (!report.ok()) return fail(report.error());
      for (std::size_t i = 0; i < mirrors.servers.size(); ++i) {
        auto saved = machineio::save_tree(net.mirror(mirrors.servers[i])->tree, mirror_dirs[i]);
        if (!saved.ok()) return fail(saved.error());
      }
      for (const auto& record : mail_log.records()) {
        std::cout << record.line() << "\n";
      }
      return 0;
    }

    if (*cmd_boot || *cmd_config || *cmd_fetch || *cmd_inspect) {
      std::string machine_dir = *cmd_boot ? bt_machine
                                : *cmd_config ? cf_machine
                                : *cmd_fetch ? fu_machine
                                             : in_machine;
      auto machine = machineio::load_machine(machine_dir);
      if (!machine.ok()) return fail(machine.error());
      boot::VirtualMachine& m = machine.value();
      if (app.count("--seed") > 0) m.seed = seed;

      if (*cmd_inspect) {
        auto state = slurp(fs::path(machine_dir) / "MACHINE");
        if (state.ok()) std::cout << state.value();
        std::cout << "---\n" << m.last_report.render();
        if (!in_no_log) std::cout << "---\n" << m.log.render();
        return 0;
      }

      sim::SimNet net;
      boot::BootEnv env;
      env.net = &net;

      if (*cmd_config) {
        net.set_default_dns_ok(true);
        for (const std::string& address : cf_bad_dns) {
          net.set_dns_server_reachable(address, false);
        }
        std::unique_ptr<boot::PromptChannel> channel;
        if (!cf_answers.empty()) {
          auto answers = load_answers(cf_answers);
          if (!answers.ok()) return fail(answers.error());
          channel = std::make_unique<boot::ScriptedChannel>(answers.take());
        } else {
          channel = std::make_unique<StdinChannel>();
        }
        auto cfg = boot::run_config_wizard(m, *channel, &net);
        auto saved = machineio::save_machine(m, machine_dir);
        if (!saved.ok()) return fail(saved.error());
        if (!cfg.ok()) return fail(cfg.error());
        std::cout << cfg.value().serialize();
        return 0;
      }

      if (*cmd_fetch) {
        auto mirrors = mount_mirrors(net, fu_mirrors, sim::Rng::mix(m.seed, m.epoch));
        if (!mirrors.ok()) return fail(mirrors.error());
        auto picked = update::pick_mirror(mirrors.value(), 0);
        if (!picked.ok()) return fail(picked.error());
        sim::ProcessTag proc{"updater", false, true};
        auto report = update::check_and_fetch(picked.value(), m, proc, net);
        if (!report.ok()) return fail(report.error());
        auto saved = machineio::save_machine(m, machine_dir);
        if (!saved.ok()) return fail(saved.error());
        std::cout << "fetch mirror=" << report.value().mirror << " files=" << report.value().files()
                  << "\n";
        return 0;
      }

      // boot
      auto run_for = parse_duration_s(bt_run_for);
      if (!run_for.ok()) return fail(run_for.error());
      // Should the boot fall into the configuration wizard, its DNS
      // validation runs against the permissive default, as `configure`.
      net.set_default_dns_ok(true);
      auto mirrors = mount_mirrors(net, bt_mirrors, sim::Rng::mix(m.seed, 0));
      if (!mirrors.ok()) return fail(mirrors.error());
      for (const std::string& spec : bt_revocation) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
          return fail("BadRevocationArg", "expected <endpoint>=<file>: " + spec);
        }
        auto body = slurp(spec.substr(eq + 1));
        if (!body.ok()) return fail(body.error());
        net.add_revocation_source(spec.substr(0, eq), body.take());
      }

      std::unique_ptr<boot::PromptChannel> channel;
      if (!bt_answers.empty()) {
        auto answers = load_answers(bt_answers);
        if (!answers.ok()) return fail(answers.error());
        channel = std::make_unique<boot::ScriptedChannel>(answers.take());
        env.wizard = channel.get();
      }
      StdinChannel interactive;
      if (bt_answers.empty()) env.wizard = &interactive;
      if (bt_yes) {
        env.partition_permission = [](const std::string&) { return true; };
      } else {
        env.partition_permission = [](const std::string& question) {
          std::cout << question << " [yes/no] " << std::flush;
          std::string line;
          if (!std::getline(std::cin, line)) return false;
          return line == "yes" || line == "y";
        };
      }

      for (int e = 0; e < bt_epochs; ++e) {
        boot::BootReport report = boot::boot_machine(m, env);
        if (run_for.value() > 0) boot::run_until(m, env, m.now + run_for.value());
        std::cout << report.render();
        if (e + 1 < bt_epochs) std::cout << "---\n";
      }
      auto saved = machineio::save_machine(m, machine_dir);
      if (!saved.ok()) return fail(saved.error());
      return 0;
    }

    if (*cmd_fire) {
      auto text = slurp(fd_scenario);
      if (!text.ok()) return fail(text.error());
      auto scenario = fleet::FleetScenario::parse(text.value());
      if (!scenario.ok()) return fail(scenario.error());
      if (app.count("--seed") > 0) scenario.value().seed = seed;
      auto result = fleet::simulate_firedrill(scenario.value());
      if (!result.ok()) return fail(result.error());
      std::string curve = result.value().curve.two_column_text();
      if (!fd_curve_out.empty()) {
        auto wrote = spit(fd_curve_out, curve);
        if (!wrote.ok()) return fail(wrote.error());
      }
      if (!fd_trace_out.empty()) {
        auto wrote = spit(fd_trace_out, result.value().trace_text());
        if (!wrote.ok()) return fail(wrote.error());
      }
      std::cout << curve;
      return 0;
    }

    if (*cmd_avail) {
      auto interval = parse_duration_s(av_interval);
      if (!interval.ok()) return fail(interval.error());
      auto boot_s = parse_duration_s(av_boot_seconds);
      if (!boot_s.ok()) return fail(boot_s.error());
      auto result = fleet::availability(interval.value(), boot_s.value());
      if (!result.ok()) return fail(result.error());
      std::cout << result.value().render() << "\n";
      return 0;
    }

    if (*cmd_boottime) {
      auto bytes = parse_bytes(bd_bytes);
      if (!bytes.ok()) return fail(bytes.error());
      fleet::BootCostModel model{bd_fixed, bd_sig, bd_base, bd_rate};
      auto total = fleet::boot_duration(model, bytes.value());
      if (!total.ok()) return fail(total.error());
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "fixed_overhead_s %.2f\nsignature_check_s %.2f\nbase_install_s %.2f\n"
                    "package_install_s %.2f\ntotal_s %.2f\n",
                    model.fixed_overhead_s, model.signature_check_s, model.base_install_s,
                    static_cast<double>(bytes.value()) / model.package_rate_bytes_per_s,
                    total.value());
      std::cout << buf;
      return 0;
    }
  } catch (const std::exception& e) {
    return fail("Exception", e.what());
  }

  return fail("NoCommand", "no subcommand executed");
}

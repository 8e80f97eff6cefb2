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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "everboot/boot.hpp"
#include "everboot/fleet.hpp"
#include "everboot/machineio.hpp"
#include "everboot/release.hpp"
#include "everboot/trust.hpp"
#include "everboot/update.hpp"

namespace py = pybind11;
using namespace everboot;

namespace {

[[noreturn]] void raise(const Error& error) {
  throw std::runtime_error(error.render());
}

template <typename T>
T value_or_raise(Result<T> result) {
  if (!result.ok()) raise(result.error());
  return result.take();
}

Bytes from_py_bytes(const py::bytes& data) {
  std::string s = data;
  return Bytes(s.begin(), s.end());
}

py::dict keygen(const std::string& key_id, std::uint64_t seed) {
  auto pair = value_or_raise(trust::generate_keypair(key_id, seed));
  trust::Keyring fragment;
  fragment.add_key(pair.public_key).ok();
  py::dict out;
  out["key_id"] = pair.public_key.key_id;
  out["public_hex"] = to_hex(pair.public_key.public_material);
  out["keyring_line"] = fragment.serialize();
  out["secret"] = pair.secret_key.serialize();
  return out;
}

std::string sign(const py::bytes& payload, const std::string& secret,
                 const std::string& algorithm) {
  auto alg = parse_digest_algorithm(algorithm);
  if (!alg) throw std::runtime_error("UnsupportedAlgorithm: " + algorithm);
  auto key = value_or_raise(trust::SecretKey::parse(secret));
  auto sig = value_or_raise(trust::sign_payload(from_py_bytes(payload), key, *alg));
  return sig.serialize();
}

py::dict verify(const py::bytes& payload, const std::string& signature,
                const std::string& keyring_text) {
  auto sig = value_or_raise(trust::DetachedSignature::parse(signature));
  auto ring = value_or_raise(trust::Keyring::parse(keyring_text, "python"));
  trust::VerifyResult result = trust::verify_signature(from_py_bytes(payload), sig, ring);
  py::dict out;
  out["status"] = std::string(trust::verify_status_name(result.status));
  out["key_id"] = result.key_id;
  out["valid"] = result.valid();
  return out;
}

int compare_versions(const std::string& a, const std::string& b) {
  auto ordering = value_or_raise(resolve::compare_versions(a, b));
  switch (ordering) {
    case resolve::Ordering::Less:
      return -1;
    case resolve::Ordering::Equal:
      return 0;
    case resolve::Ordering::Greater:
      return 1;
  }
  return 0;
}

py::dict availability(double interval_s, double boot_seconds) {
  auto result = value_or_raise(fleet::availability(interval_s, boot_seconds));
  py::dict out;
  out["fraction"] = result.fraction;
  out["percent"] = result.percent;
  out["text"] = result.render();
  return out;
}

double boot_duration(std::uint64_t package_bytes, double fixed_s, double signature_s,
                     double base_s, double rate_bps) {
  fleet::BootCostModel model{fixed_s, signature_s, base_s, rate_bps};
  return value_or_raise(fleet::boot_duration(model, package_bytes));
}

std::string pick_mirror(const std::vector<std::string>& servers, std::uint64_t seed,
                        std::uint64_t draw) {
  return value_or_raise(update::pick_mirror(update::MirrorSet{servers, seed}, draw));
}

py::dict firedrill(const std::string& scenario_text) {
  auto scenario = value_or_raise(fleet::FleetScenario::parse(scenario_text));
  auto result = value_or_raise(fleet::simulate_firedrill(scenario));
  py::dict out;
  py::list curve;
  for (const auto& [h, f] : result.curve.samples) curve.append(py::make_tuple(h, f));
  out["curve"] = curve;
  out["fraction_48h"] = result.fraction_at(48.0);
  out["reverted"] = result.reverted;
  out["trace"] = result.trace;
  return out;
}

void build_image(const std::string& out_dir, const py::list& packages,
                 const std::string& keyring_text, const std::vector<std::string>& signers,
                 const std::string& config_text, const std::string& algorithm) {
  auto alg = parse_digest_algorithm(algorithm);
  if (!alg) throw std::runtime_error("UnsupportedAlgorithm: " + algorithm);

  std::vector<release::PackageSpec> specs;
  for (const auto& item : packages) {
    py::dict pkg = item.cast<py::dict>();
    release::PackageSpec spec;
    spec.name = pkg["name"].cast<std::string>();
    spec.version = pkg["version"].cast<std::string>();
    auto category = resolve::parse_category(pkg["category"].cast<std::string>());
    if (!category) throw std::runtime_error("unknown category");
    spec.category = *category;
    py::dict files = pkg["files"].cast<py::dict>();
    for (const auto& [path, spec_value] : files) {
      py::tuple entry = spec_value.cast<py::tuple>();
      spec.entries.push_back({path.cast<std::string>(),
                              from_py_bytes(entry[0].cast<py::bytes>()),
                              entry[1].cast<bool>()});
    }
    specs.push_back(std::move(spec));
  }

  auto ring = value_or_raise(trust::Keyring::parse(keyring_text, "image"));
  std::vector<trust::SecretKey> keys;
  for (const std::string& secret : signers) {
    keys.push_back(value_or_raise(trust::SecretKey::parse(secret)));
  }
  release::BuildOptions options;
  options.algorithm = *alg;
  if (!config_text.empty()) {
    options.default_config = value_or_raise(boot::ApplianceConfig::parse(config_text));
  }
  auto image = value_or_raise(release::build_image(specs, ring, keys, options));
  auto saved = machineio::save_medium(image, out_dir);
  if (!saved.ok()) raise(saved.error());
}

void make_machine(const std::string& machine_dir, const std::string& image_dir,
                  const std::string& config_text, const std::string& keyring_text,
                  std::uint64_t disk_bytes, std::uint64_t seed) {
  boot::VirtualMachine machine;
  machine.name = "py-appliance";
  machine.seed = seed;
  machine.media.push_back(value_or_raise(machineio::load_medium(image_dir)));

  media::VirtualMedium floppy("floppy", media::MediumKind::ConfigFloppy);
  floppy.tree.write(std::string(boot::kFloppyConfigPath), {to_bytes(config_text), false}).ok();
  floppy.tree.write(std::string(boot::kFloppyKeyringPath), {to_bytes(keyring_text), false}).ok();
  floppy.set_write_locked(true).ok();
  machine.media.push_back(std::move(floppy));

  media::VirtualMedium disk("disk0", media::MediumKind::HardDisk);
  disk.size_bytes = disk_bytes;
  machine.media.push_back(std::move(disk));

  auto saved = machineio::save_machine(machine, machine_dir);
  if (!saved.ok()) raise(saved.error());
}

py::dict boot_machine_dir(const std::string& machine_dir, int epochs, double run_for,
                          const std::vector<std::string>& mirror_dirs) {
  auto machine = value_or_raise(machineio::load_machine(machine_dir));

  sim::SimNet net;
  boot::BootEnv env;
  env.net = &net;
  env.partition_permission = [](const std::string&) { return true; };
  for (const std::string& dir : mirror_dirs) {
    auto tree = value_or_raise(machineio::load_tree(dir));
    std::string id = std::filesystem::path(dir).filename().string();
    net.add_mirror(id).tree = std::move(tree);
  }

  boot::BootReport report;
  for (int e = 0; e < epochs; ++e) {
    report = boot::boot_machine(machine, env);
    if (run_for > 0) boot::run_until(machine, env, machine.now + run_for);
  }
  auto saved = machineio::save_machine(machine, machine_dir);
  if (!saved.ok()) raise(saved.error());

  py::dict out;
  out["epoch"] = report.epoch;
  out["phase"] = std::string(boot::phase_name(report.final_phase));
  out["plan_status"] = report.plan.complete() ? "Complete" : "HunkerDown";
  py::dict installed;
  for (const auto& [name, version] : report.installed) installed[py::str(name)] = version;
  out["installed"] = installed;
  out["missing"] = report.plan.missing;
  out["store_hash"] = report.store_hash;
  out["warnings"] = report.warnings;
  out["total_seconds"] = report.durations.total();
  return out;
}

}  // namespace

PYBIND11_MODULE(_everboot, m) {
  m.doc() = "Signed-package network appliance platform simulator";

  m.def("keygen", &keygen, py::arg("key_id"), py::arg("seed"),
        "Deterministic signing keypair for (key_id, seed).");
  m.def("sign", &sign, py::arg("payload"), py::arg("secret"), py::arg("algorithm") = "sha256",
        "Detached signature over payload bytes; returns the .sig file text.");
  m.def("verify", &verify, py::arg("payload"), py::arg("signature"), py::arg("keyring"),
        "Checks a detached signature against a keyring; returns status/key_id/valid.");
  m.def("compare_versions", &compare_versions, py::arg("a"), py::arg("b"),
        "Dotted-numeric version comparison: -1, 0, or 1.");
  m.def("availability", &availability, py::arg("interval_seconds"), py::arg("boot_seconds"),
        "Downtime fraction for a reboot cadence.");
  m.def("boot_duration", &boot_duration, py::arg("package_bytes"), py::arg("fixed_s") = 85.0,
        py::arg("signature_s") = 30.0, py::arg("base_s") = 25.0,
        py::arg("rate_bps") = 96e6 / 180.0, "Boot seconds under the cost model.");
  m.def("pick_mirror", &pick_mirror, py::arg("servers"), py::arg("seed"), py::arg("draw"),
        "Seed-deterministic uniform mirror selection.");
  m.def("firedrill", &firedrill, py::arg("scenario"),
        "Run a fleet firedrill from scenario text; returns curve and summary.");
  m.def("build_image", &build_image, py::arg("out_dir"), py::arg("packages"),
        py::arg("keyring"), py::arg("signers"), py::arg("config") = "",
        py::arg("algorithm") = "sha256", "Build a bootable image directory.");
  m.def("make_machine", &make_machine, py::arg("machine_dir"), py::arg("image_dir"),
        py::arg("config"), py::arg("keyring"), py::arg("disk_bytes") = 4ull << 30,
        py::arg("seed") = 42, "Assemble a machine directory around an image.");
  m.def("boot", &boot_machine_dir, py::arg("machine_dir"), py::arg("epochs") = 1,
        py::arg("run_for") = 0.0, py::arg("mirrors") = std::vector<std::string>{},
        "Boot a serialized machine; returns the boot report.");
}

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
#include "support/fixtures.hpp"

using namespace everboot;
using namespace everboot::release;
using everboot::fixtures::make_env;
using everboot::fixtures::make_image;
using everboot::fixtures::make_machine;
using everboot::fixtures::make_rig;

TEST_CASE("build_image lays out package sets, manifests, and platform files") {
  auto rig = make_rig();
  std::vector<PackageSpec> packages;
  for (int i = 0; i < 2; ++i) {
    packages.push_back({"base" + std::to_string(i), "1.0", resolve::Category::Base,
                        {{"/etc/b" + std::to_string(i), to_bytes("b"), false}}});
  }
  for (int i = 0; i < 3; ++i) {
    packages.push_back({"port" + std::to_string(i), "1.0", resolve::Category::Port,
                        {{"/usr/lib/p" + std::to_string(i), to_bytes("p"), false}}});
  }
  packages.push_back({"app0", "1.0", resolve::Category::Application,
                      {{"/usr/bin/app0", to_bytes("a"), true}}});

  auto image = build_image(packages, rig.template_ring, rig.signers).take();
  CHECK(image.write_locked());

  std::size_t manifests = 0, pkg_files = 0;
  for (const auto& [path, node] : image.tree.files()) {
    if (resolve::is_manifest_filename(path)) ++manifests;
    if (path.ends_with(".pkg")) ++pkg_files;
  }
  CHECK(manifests == 3);  // one per nonempty set
  CHECK(pkg_files == 6);
  CHECK(image.tree.find(std::string(boot::kImageVerifierTool)) != nullptr);
  CHECK(image.tree.find(std::string(boot::kImageKeyringPath)) != nullptr);
  CHECK(image.tree.find(std::string(boot::kImageRequiredPath)) != nullptr);

  // Each manifest carries one detached signature per signing key.
  for (std::string_view dir : boot::kImagePackageDirs) {
    int sigs = 0;
    for (const std::string& path : image.tree.list(std::string(dir))) {
      if (path.find(".sig.") != std::string::npos) ++sigs;
    }
    CHECK(sigs == 2);
  }
}

TEST_CASE("build_image rejects duplicate names and bad versions") {
  auto rig = make_rig();
  std::vector<PackageSpec> duplicated = {
      {"same", "1.0", resolve::Category::Base, {}},
      {"same", "1.1", resolve::Category::Port, {}},
  };
  auto image = build_image(duplicated, rig.template_ring, rig.signers);
  REQUIRE_FALSE(image.ok());
  CHECK(image.error().code == "DuplicatePackage");

  std::vector<PackageSpec> malformed = {{"pkg", "one.zero", resolve::Category::Base, {}}};
  CHECK_FALSE(build_image(malformed, rig.template_ring, rig.signers).ok());
}

TEST_CASE("a built image boots to Running against its own keyring") {
  auto rig = make_rig();
  boot::VirtualMachine machine = make_machine(rig, make_image(rig));
  boot::BootReport report = boot::boot_machine(machine, make_env());
  CHECK(report.final_phase == boot::Phase::Running);
  CHECK(report.plan.complete());
  CHECK(report.plan.steps.size() == 3);
}

TEST_CASE("extracted packages are byte-identical to the in-image copy") {
  auto rig = make_rig();
  auto image = make_image(rig, "2.3");
  auto result = extract_and_sign_package(image, "daemon", rig.signers).take();

  const media::FileNode* in_image = image.tree.find("packages/apps/daemon-2.3.pkg");
  REQUIRE(in_image != nullptr);
  CHECK(result.package_bytes == in_image->content);  // no separate build path
  CHECK(result.package_filename == "daemon-2.3.pkg");

  // Two keys, two signatures, each ValidBy under the template keyring.
  REQUIRE(result.signatures.size() == 2);
  for (const auto& sig : result.signatures) {
    CHECK(trust::verify_signature(result.manifest_bytes, sig, rig.template_ring).valid());
  }
  CHECK(result.warnings.empty());

  // Bundle layout mirrors a mirror directory.
  CHECK(result.bundle.find("daemon-2.3.pkg") != nullptr);
  CHECK(result.bundle.find("daemon-2.3.dgst") != nullptr);
  CHECK(result.bundle.find("daemon-2.3.dgst.sig.release-a") != nullptr);
  CHECK(result.bundle.find("daemon-2.3.dgst.sig.release-b") != nullptr);
}

TEST_CASE("extracting with one key warns; unknown names are an error") {
  auto rig = make_rig();
  auto image = make_image(rig);

  auto single = extract_and_sign_package(image, "daemon", {rig.key_a.secret_key}).take();
  REQUIRE(single.warnings.size() == 1);
  CHECK(single.warnings[0].find("MultiSigRecommended") != std::string::npos);

  auto unknown = extract_and_sign_package(image, "ghost", rig.signers);
  REQUIRE_FALSE(unknown.ok());
  CHECK(unknown.error().code == "UnknownPackage");

  auto no_keys = extract_and_sign_package(image, "daemon", {});
  REQUIRE_FALSE(no_keys.ok());
}

TEST_CASE("publish reaches every mirror and mails every site") {
  auto rig = make_rig();
  auto bundle = extract_and_sign_package(make_image(rig, "1.1"), "daemon", rig.signers).take();

  sim::SimNet net;
  update::MirrorSet mirrors;
  for (int m = 0; m < 3; ++m) {
    std::string id = "m" + std::to_string(m);
    net.add_mirror(id);
    mirrors.servers.push_back(id);
  }
  std::vector<std::string> sites;
  for (int s = 0; s < 50; ++s) sites.push_back("site" + std::to_string(s));

  BootLog mail_log;
  auto report = publish_and_notify(net, mirrors, bundle.bundle, sites, &mail_log).take();
  CHECK(report.published.size() == 3);
  CHECK(report.unreachable.empty());
  CHECK(report.notified_sites.size() == 50);

  int publishes = 0, mails = 0;
  for (const auto& rec : mail_log.records()) {
    if (rec.event == "publish") ++publishes;
    if (rec.event == "mail") {
      CHECK(rec.get("action") == "check-then-reboot");
      ++mails;
    }
  }
  CHECK(publishes == 3);
  CHECK(mails == 50);

  for (const std::string& id : mirrors.servers) {
    CHECK(net.mirror(id)->tree.find("daemon-1.1.pkg") != nullptr);
  }
}

TEST_CASE("one dead mirror is reported; appliances still fetch from the others") {
  auto rig = make_rig();
  auto bundle = extract_and_sign_package(make_image(rig, "1.1"), "daemon", rig.signers).take();

  sim::SimNet net;
  update::MirrorSet mirrors{{"m0", "m1", "m2"}, 5};
  for (const std::string& id : mirrors.servers) net.add_mirror(id);
  net.set_mirror_reachable("m1", false);

  auto report = publish_and_notify(net, mirrors, bundle.bundle, {}, nullptr).take();
  CHECK(report.published == std::vector<std::string>{"m0", "m2"});
  CHECK(report.unreachable == std::vector<std::string>{"m1"});
  CHECK(report.notified_sites.empty());  // empty site list, zero mails

  // An appliance drawing the dead mirror retries at the next check and
  // succeeds off a live one.
  boot::VirtualMachine machine = make_machine(rig, make_image(rig));
  boot::BootEnv env = make_env(&net);
  boot::boot_machine(machine, env);
  sim::ProcessTag proc{"updater", false, true};
  auto dead = update::check_and_fetch("m1", machine, proc, net).take();
  CHECK(dead.unreachable);
  auto live = update::check_and_fetch("m0", machine, proc, net).take();
  CHECK(live.files() == 4);
}

TEST_CASE("published bundles verify end to end: publish, fetch, reboot, new version") {
  auto rig = make_rig();
  auto bundle = extract_and_sign_package(make_image(rig, "1.1"), "daemon", rig.signers).take();

  sim::SimNet net;
  update::MirrorSet mirrors{{"m0"}, 5};
  net.add_mirror("m0");
  publish_and_notify(net, mirrors, bundle.bundle, {"site0"}, nullptr).take();

  boot::VirtualMachine machine = make_machine(rig, make_image(rig));
  boot::BootEnv env = make_env(&net);
  boot::boot_machine(machine, env);
  sim::ProcessTag proc{"updater", false, true};
  update::check_and_fetch("m0", machine, proc, net).take();

  boot::BootReport report = boot::boot_machine(machine, env);
  CHECK(report.final_phase == boot::Phase::Running);
  CHECK(report.installed_version("daemon") == "1.1");
}

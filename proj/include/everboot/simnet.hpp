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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "everboot/common.hpp"
#include "everboot/log.hpp"
#include "everboot/media.hpp"
#include "everboot/trust.hpp"

namespace everboot::sim {

/// Identity a simulated process presents on every network operation.
/// privileged + network I/O is forbidden and asserted at every send and
/// receive; the simulator throws PrivilegeError rather than let the
/// operation happen.
struct ProcessTag {
  std::string process_id;
  bool privileged = false;
  bool network_capable = true;
};

struct MirrorEndpoint {
  media::FileTree tree;
  bool reachable = true;
};

struct RevocationEndpoint {
  std::string body;  // REVOKE lines
  bool reachable = true;
};

/// The simulated network: download mirrors, revocation endpoints, and DNS
/// servers. Every appliance-side operation is tagged with a ProcessTag
/// and logged as net_send/net_recv records on the caller's boot log.
class SimNet {
 public:
  MirrorEndpoint& add_mirror(const std::string& id);
  MirrorEndpoint* mirror(const std::string& id);
  const MirrorEndpoint* mirror(const std::string& id) const;

  void add_revocation_source(const std::string& id, std::string body);
  RevocationEndpoint* revocation_source(const std::string& id);

  void add_dns_server(const std::string& address);
  void set_dns_server_reachable(const std::string& address, bool reachable);
  void add_resolvable_name(const std::string& name);
  // Permissive mode for scripted configuration runs: unknown DNS servers
  // answer and the probe name resolves. Explicitly unreachable servers
  // still fail.
  void set_default_dns_ok(bool ok) { default_dns_ok_ = ok; }

  void set_mirror_reachable(const std::string& id, bool reachable);

  // Appliance-side operations. All enforce the unprivileged rule.
  Result<std::vector<std::string>> list_mirror_files(const ProcessTag& proc, const std::string& mirror_id,
                                                     BootLog* log, std::uint64_t epoch, double t);
  Result<Bytes> fetch_mirror_file(const ProcessTag& proc, const std::string& mirror_id,
                                  const std::string& filename, BootLog* log, std::uint64_t epoch,
                                  double t);
  std::optional<std::string> fetch_revocation_list(const ProcessTag& proc, const std::string& id,
                                                   BootLog* log, std::uint64_t epoch, double t);
  bool dns_lookup(const ProcessTag& proc, const std::string& server_address, std::string_view name,
                  BootLog* log, std::uint64_t epoch, double t);

 private:
  void assert_unprivileged(const ProcessTag& proc) const;
  void log_io(BootLog* log, std::uint64_t epoch, double t, const char* dir, const ProcessTag& proc,
              const std::string& endpoint) const;

  std::map<std::string, MirrorEndpoint> mirrors_;
  std::map<std::string, RevocationEndpoint> revocation_;
  std::map<std::string, bool> dns_servers_;  // address -> reachable
  std::set<std::string> resolvable_;
  bool default_dns_ok_ = false;
};

/// Fixed name the configuration wizard resolves to prove DNS works.
inline constexpr std::string_view kDnsProbeName = "updates.example.net";

/// trust::RevocationTransport over the simulated network.
class NetRevocationTransport : public trust::RevocationTransport {
 public:
  NetRevocationTransport(SimNet& net, ProcessTag proc, BootLog* log, std::uint64_t epoch, double t)
      : net_(net), proc_(std::move(proc)), log_(log), epoch_(epoch), t_(t) {}

  std::optional<std::string> fetch_revocation_list(const std::string& endpoint) override {
    return net_.fetch_revocation_list(proc_, endpoint, log_, epoch_, t_);
  }

 private:
  SimNet& net_;
  ProcessTag proc_;
  BootLog* log_;
  std::uint64_t epoch_;
  double t_;
};

}  // namespace everboot::sim

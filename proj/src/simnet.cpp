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

#include "everboot/simnet.hpp"

namespace everboot::sim {

MirrorEndpoint& SimNet::add_mirror(const std::string& id) { return mirrors_[id]; }

MirrorEndpoint* SimNet::mirror(const std::string& id) {
  auto it = mirrors_.find(id);
  return it == mirrors_.end() ? nullptr : &it->second;
}

const MirrorEndpoint* SimNet::mirror(const std::string& id) const {
  auto it = mirrors_.find(id);
  return it == mirrors_.end() ? nullptr : &it->second;
}

void SimNet::add_revocation_source(const std::string& id, std::string body) {
  revocation_[id] = RevocationEndpoint{std::move(body), true};
}

RevocationEndpoint* SimNet::revocation_source(const std::string& id) {
  auto it = revocation_.find(id);
  return it == revocation_.end() ? nullptr : &it->second;
}

void SimNet::add_dns_server(const std::string& address) { dns_servers_[address] = true; }

void SimNet::set_dns_server_reachable(const std::string& address, bool reachable) {
  dns_servers_[address] = reachable;
}

void SimNet::add_resolvable_name(const std::string& name) { resolvable_.insert(name); }

void SimNet::set_mirror_reachable(const std::string& id, bool reachable) {
  mirrors_[id].reachable = reachable;
}

void SimNet::assert_unprivileged(const ProcessTag& proc) const {
  // No process sending or receiving network data may run as root.
  if (proc.privileged) {
    throw PrivilegeError("privileged process '" + proc.process_id +
                         "' attempted network I/O");
  }
  if (!proc.network_capable) {
    throw std::logic_error("process '" + proc.process_id +
                           "' is not network-capable but attempted network I/O");
  }
}

void SimNet::log_io(BootLog* log, std::uint64_t epoch, double t, const char* dir,
                    const ProcessTag& proc, const std::string& endpoint) const {
  if (log == nullptr) return;
  log->append(epoch, t, dir,
              {{"pid", proc.process_id},
               {"privileged", proc.privileged ? "1" : "0"},
               {"endpoint", endpoint}});
}

Result<std::vector<std::string>> SimNet::list_mirror_files(const ProcessTag& proc,
                                                           const std::string& mirror_id,
                                                           BootLog* log, std::uint64_t epoch,
                                                           double t) {
  assert_unprivileged(proc);
  log_io(log, epoch, t, "net_send", proc, mirror_id);
  const MirrorEndpoint* ep = mirror(mirror_id);
  if (ep == nullptr || !ep->reachable) {
    return Error{"Unreachable", "mirror unreachable: " + mirror_id};
  }
  log_io(log, epoch, t, "net_recv", proc, mirror_id);
  return ep->tree.list();
}

Result<Bytes> SimNet::fetch_mirror_file(const ProcessTag& proc, const std::string& mirror_id,
                                        const std::string& filename, BootLog* log,
                                        std::uint64_t epoch, double t) {
  assert_unprivileged(proc);
  log_io(log, epoch, t, "net_send", proc, mirror_id);
  const MirrorEndpoint* ep = mirror(mirror_id);
  if (ep == nullptr || !ep->reachable) {
    return Error{"Unreachable", "mirror unreachable: " + mirror_id};
  }
  const media::FileNode* node = ep->tree.find(filename);
  if (node == nullptr) return Error{"NotFound", "no such file on mirror: " + filename};
  log_io(log, epoch, t, "net_recv", proc, mirror_id);
  return node->content;
}

std::optional<std::string> SimNet::fetch_revocation_list(const ProcessTag& proc,
                                                         const std::string& id, BootLog* log,
                                                         std::uint64_t epoch, double t) {
  assert_unprivileged(proc);
  log_io(log, epoch, t, "net_send", proc, id);
  RevocationEndpoint* ep = revocation_source(id);
  if (ep == nullptr || !ep->reachable) return std::nullopt;
  log_io(log, epoch, t, "net_recv", proc, id);
  return ep->body;
}

bool SimNet::dns_lookup(const ProcessTag& proc, const std::string& server_address,
                        std::string_view name, BootLog* log, std::uint64_t epoch, double t) {
  assert_unprivileged(proc);
  log_io(log, epoch, t, "net_send", proc, "dns:" + server_address);
  auto it = dns_servers_.find(server_address);
  bool server_ok = it != dns_servers_.end() ? it->second : default_dns_ok_;
  if (!server_ok) return false;
  log_io(log, epoch, t, "net_recv", proc, "dns:" + server_address);
  return resolvable_.count(std::string(name)) > 0 || default_dns_ok_;
}

}  // namespace everboot::sim

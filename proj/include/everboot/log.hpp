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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "everboot/common.hpp"

namespace everboot {

using LogFields = std::vector<std::pair<std::string, std::string>>;

/// One structured boot-log record:
///   epoch=<n> t=<sim-seconds> event=<name> k=v k=v ...
/// The trailing key=value fields are the record's detail. Every trace
/// invariant is checked against these records, so anything the sequencer
/// does that an invariant cares about must be logged here.
struct LogRecord {
  std::uint64_t epoch = 0;
  double t = 0.0;
  std::string event;
  LogFields fields;

  std::string line() const;
  std::optional<std::string> get(std::string_view key) const;
  static std::optional<LogRecord> parse(std::string_view line);
};

class BootLog {
 public:
  void append(std::uint64_t epoch, double t, std::string event, LogFields fields = {});
  void append(LogRecord record) { records_.push_back(std::move(record)); }

  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::string render() const;

  static BootLog parse(std::string_view text);

 private:
  std::vector<LogRecord> records_;
};

/// A trace-invariant violation found by check_trace_invariants.
struct TraceViolation {
  std::size_t record_index = 0;
  std::string invariant;  // "net-up-writable-config" | "privileged-net" | "exec-provenance"
  std::string detail;
};

/// Replays a boot log and checks the temporal invariants that can be
/// decided from the log alone:
///  - no network-up interval overlaps a writable, present config medium
///  - no net_send/net_recv record is tagged privileged=1
///  - every exec_check with decision=Allowed resolves to the evanescent
///    store or the boot image
/// Media lock states are tracked from medium_state records.
std::vector<TraceViolation> check_trace_invariants(const std::vector<LogRecord>& records);

}  // namespace everboot

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

#include "everboot/log.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace everboot {

namespace {

std::string format_t(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", t);
  return buf;
}

// Field values must stay single-token; spaces would break the record
// grammar.
std::string sanitize(std::string v) {
  std::replace(v.begin(), v.end(), ' ', '_');
  std::replace(v.begin(), v.end(), '\n', '_');
  return v;
}

}  // namespace

std::string LogRecord::line() const {
  std::string out = "epoch=" + std::to_string(epoch) + " t=" + format_t(t) + " event=" + event;
  for (const auto& [k, v] : fields) {
    out += " " + k + "=" + sanitize(v);
  }
  return out;
}

std::optional<std::string> LogRecord::get(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::optional<LogRecord> LogRecord::parse(std::string_view line) {
  LogRecord rec;
  bool have_epoch = false, have_t = false, have_event = false;
  for (std::string_view token : split(line, ' ')) {
    if (token.empty()) continue;
    auto eq = token.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    std::string key(token.substr(0, eq));
    std::string value(token.substr(eq + 1));
    if (key == "epoch" && !have_epoch) {
      rec.epoch = std::strtoull(value.c_str(), nullptr, 10);
      have_epoch = true;
    } else if (key == "t" && !have_t) {
      rec.t = std::strtod(value.c_str(), nullptr);
      have_t = true;
    } else if (key == "event" && !have_event) {
      rec.event = value;
      have_event = true;
    } else {
      rec.fields.emplace_back(std::move(key), std::move(value));
    }
  }
  if (!have_epoch || !have_t || !have_event) return std::nullopt;
  return rec;
}

void BootLog::append(std::uint64_t epoch, double t, std::string event, LogFields fields) {
  records_.push_back(LogRecord{epoch, t, std::move(event), std::move(fields)});
}

std::string BootLog::render() const {
  std::string out;
  for (const auto& rec : records_) {
    out += rec.line();
    out += '\n';
  }
  return out;
}

BootLog BootLog::parse(std::string_view text) {
  BootLog log;
  for (std::string_view line : split(text, '\n')) {
    if (trim(line).empty()) continue;
    if (auto rec = LogRecord::parse(line)) log.append(std::move(*rec));
  }
  return log;
}

std::vector<TraceViolation> check_trace_invariants(const std::vector<LogRecord>& records) {
  std::vector<TraceViolation> out;

  struct MediumState {
    std::string kind;
    bool locked = true;
    bool present = true;
  };
  std::map<std::string, MediumState> media;
  bool net_up = false;

  auto config_medium_writable = [&]() -> std::optional<std::string> {
    for (const auto& [id, st] : media) {
      if (st.kind == "ConfigFloppy" && st.present && !st.locked) return id;
    }
    return std::nullopt;
  };

  for (std::size_t i = 0; i < records.size(); ++i) {
    const LogRecord& rec = records[i];
    if (rec.event == "medium_state") {
      auto id = rec.get("id");
      if (!id) continue;
      MediumState& st = media[*id];
      if (auto kind = rec.get("kind")) st.kind = *kind;
      if (auto locked = rec.get("locked")) st.locked = (*locked == "1");
      if (auto present = rec.get("present")) st.present = (*present == "1");
      if (net_up) {
        if (auto writable = config_medium_writable()) {
          out.push_back({i, "net-up-writable-config",
                         "medium " + *writable + " became writable during a network-up interval"});
        }
      }
    } else if (rec.event == "net_up") {
      net_up = true;
      if (auto writable = config_medium_writable()) {
        out.push_back({i, "net-up-writable-config",
                       "network raised while medium " + *writable + " is writable"});
      }
    } else if (rec.event == "net_down") {
      net_up = false;
    } else if (rec.event == "net_send" || rec.event == "net_recv") {
      if (rec.get("privileged").value_or("0") == "1") {
        out.push_back({i, "privileged-net",
                       rec.event + " by privileged process " + rec.get("pid").value_or("?")});
      }
    } else if (rec.event == "exec_check") {
      if (rec.get("decision").value_or("") == "Allowed") {
        std::string backing = rec.get("backing").value_or("?");
        if (backing != "evanescent" && backing != "image") {
          out.push_back({i, "exec-provenance",
                         "exec allowed from backing '" + backing + "' for path " +
                             rec.get("path").value_or("?")});
        }
      }
    }
  }
  return out;
}

}  // namespace everboot

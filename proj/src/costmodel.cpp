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

#include "everboot/costmodel.hpp"

#include <cstdio>

namespace everboot::fleet {

Result<double> boot_duration(const BootCostModel& model, std::uint64_t package_bytes) {
  if (model.package_rate_bytes_per_s <= 0.0) {
    return Error{"ZeroRate", "package install rate must be positive"};
  }
  return model.fixed_overhead_s + model.signature_check_s + model.base_install_s +
         static_cast<double>(package_bytes) / model.package_rate_bytes_per_s;
}

std::string Availability::render() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5f%%", percent);
  return buf;
}

Result<Availability> availability(double reboot_interval_s, double boot_seconds) {
  if (boot_seconds < 0) return Error{"BadBootTime", "boot time must be nonnegative"};
  if (reboot_interval_s <= boot_seconds) {
    return Error{"BadInterval", "reboot interval must exceed the boot time"};
  }
  Availability out;
  out.fraction = boot_seconds / reboot_interval_s;
  out.percent = out.fraction * 100.0;
  return out;
}

}  // namespace everboot::fleet

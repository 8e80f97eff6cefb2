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

#include "everboot/common.hpp"

namespace everboot::fleet {

/// Per-stage boot cost model. The defaults are calibrated against a
/// 400 MHz-class appliance: 85 s of fixed overhead, 30 s checking
/// signatures and hashes, 25 s installing the base sets, and 96 MB of
/// other packages in 180 s.
struct BootCostModel {
  double fixed_overhead_s = 85.0;
  double signature_check_s = 30.0;
  double base_install_s = 25.0;
  double package_rate_bytes_per_s = 96e6 / 180.0;
};

/// fixed + signature + base + bytes/rate, in seconds.
Result<double> boot_duration(const BootCostModel& model, std::uint64_t package_bytes);

struct Availability {
  double fraction = 0.0;
  double percent = 0.0;

  /// Percent rendered to five decimals, e.g. "0.00617%".
  std::string render() const;
};

/// Downtime fraction for a fleet that reboots once per interval.
/// Requires interval > boot time.
Result<Availability> availability(double reboot_interval_s, double boot_seconds);

}  // namespace everboot::fleet

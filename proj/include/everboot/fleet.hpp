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

#include <string>
#include <vector>

#include "everboot/common.hpp"
#include "everboot/costmodel.hpp"

namespace everboot::fleet {

/// A firedrill scenario: publish a patch at t=0, notify every site, and
/// watch what fraction of the fleet is running it over time. Parsed from
/// a KEY=VALUE scenario file.
struct FleetScenario {
  int n_appliances = 100;
  int mirror_count = 2;
  // Admin response distribution over simulated hours. "lognormal" uses
  // (mu_log, sigma_log); "fixed" responds after exactly fixed_h hours.
  std::string admin_dist = "lognormal";
  double admin_mu_log = 2.12;
  double admin_sigma_log = 1.0;
  double admin_fixed_h = 0.0;
  double check_interval_h = 24.0;
  double check_jitter_fraction = 0.1;
  BootCostModel model;
  std::uint64_t package_bytes = 96'000'000;
  double horizon_h = 96.0;
  std::uint64_t seed = 1;
  bool tamper = false;
  double sample_interval_h = 1.0;

  std::string serialize() const;
  static Result<FleetScenario> parse(std::string_view text);
  Result<void> validate() const;
};

/// (time, fraction upgraded) samples; fraction is nondecreasing in time.
struct RolloutCurve {
  std::vector<std::pair<double, double>> samples;

  bool monotone() const;
  /// Two-column text, `hours fraction` per line.
  std::string two_column_text() const;
};

struct FiredrillResult {
  RolloutCurve curve;
  // Per-appliance upgrade completion time in hours; +inf when the
  // appliance never upgraded inside the horizon.
  std::vector<double> upgrade_times_h;
  // Appliances whose reboot found a newer cached candidate and rejected
  // it (tampered scenarios).
  int reverted = 0;
  std::vector<std::string> trace;

  double fraction_at(double hours) const;
  std::string trace_text() const;
};

/// Deterministic discrete-event run of the whole fleet. Every appliance
/// is a real machine with desk-scale media going through the real boot
/// and resolution pipeline; there is no shortcut model.
Result<FiredrillResult> simulate_firedrill(const FleetScenario& scenario);

}  // namespace everboot::fleet

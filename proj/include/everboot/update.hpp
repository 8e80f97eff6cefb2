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

#include "everboot/boot.hpp"
#include "everboot/common.hpp"
#include "everboot/simnet.hpp"

namespace everboot::update {

struct MirrorSet {
  std::vector<std::string> servers;
  std::uint64_t rng_seed = 0;
};

/// Uniform, seed-deterministic mirror choice for the given draw index.
Result<std::string> pick_mirror(const MirrorSet& mirrors, std::uint64_t draw);

struct FetchReport {
  std::string mirror;
  std::vector<std::string> fetched;
  bool unreachable = false;

  int files() const { return static_cast<int>(fetched.size()); }
};

/// The scheduled check: as an unprivileged process, downloads any
/// package, manifest, or signature newer than the cache contents into the
/// on-disk cache. No verification happens here — that is exclusively the
/// next boot's job. Files land via write-temp-then-rename so readers
/// never observe partial downloads.
Result<FetchReport> check_and_fetch(const std::string& mirror_id, boot::VirtualMachine& machine,
                                    const sim::ProcessTag& proc, sim::SimNet& net);

/// The cache directory on the first disk's content filesystem.
media::VirtualMedium* cache_disk(boot::VirtualMachine& machine);
const media::VirtualMedium* cache_disk(const boot::VirtualMachine& machine);

}  // namespace everboot::update

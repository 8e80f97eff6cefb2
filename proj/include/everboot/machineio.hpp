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

#include <filesystem>

#include "everboot/boot.hpp"
#include "everboot/media.hpp"

namespace everboot::machineio {

/// Machine state on disk is a directory of media directories plus logs,
/// inspectable and diffable with standard tools:
///
///   <machine-dir>/
///     MACHINE        key=value state (name, epoch, phase, seed, ...)
///     boot.log       newline-delimited structured records
///     report.txt     last boot report
///     <medium-id>/   one directory per medium
///       MEDIUM       id=..., kind=..., locked=0|1, ...
///       ...          the medium's file tree, stored verbatim
///
/// File exec bits map to the host filesystem's execute permission.

Result<void> save_tree(const media::FileTree& tree, const std::filesystem::path& dir);
Result<media::FileTree> load_tree(const std::filesystem::path& dir);

Result<void> save_medium(const media::VirtualMedium& medium, const std::filesystem::path& dir);
Result<media::VirtualMedium> load_medium(const std::filesystem::path& dir);

Result<void> save_machine(const boot::VirtualMachine& machine, const std::filesystem::path& dir);
Result<boot::VirtualMachine> load_machine(const std::filesystem::path& dir);

}  // namespace everboot::machineio

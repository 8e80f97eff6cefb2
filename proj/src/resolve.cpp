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

#include "everboot/resolve.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace everboot::resolve {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Base:
      return "Base";
    case Category::Port:
      return "Port";
    case Category::Application:
      return "Application";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  if (name == "Base") return Category::Base;
  if (name == "Port") return Category::Port;
  if (name == "Application") return Category::Application;
  return std::nullopt;
}

// --- Package archives --------------------------------------------------------

Bytes pack_package(const PackageContents& contents) {
  std::string header = "PKGAR1\n";
  header += "name=" + contents.name + "\n";
  header += "version=" + contents.version + "\n";
  header += "category=" + std::string(category_name(contents.category)) + "\n";
  header += "files=" + std::to_string(contents.entries.size()) + "\n";

  Bytes out(header.begin(), header.end());
  for (const ArchiveEntry& entry : contents.entries) {
    std::string line = "F " + std::string(entry.exec ? "x" : "-") + " " +
                       std::to_string(entry.content.size()) + " " + entry.path + "\n";
    out.insert(out.end(), line.begin(), line.end());
    out.insert(out.end(), entry.content.begin(), entry.content.end());
    out.push_back('\n');
  }
  return out;
}

namespace {
// Reads one \n-terminated line starting at `pos`; nullopt at end.
std::optional<std::string> take_line(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos >= bytes.size()) return std::nullopt;
  std::size_t end = pos;
  while (end < bytes.size() && bytes[end] != '\n') ++end;
  std::string line(bytes.begin() + pos, bytes.begin() + end);
  pos = end < bytes.size() ? end + 1 : end;
  return line;
}

std::optional<std::string> header_value(const std::string& line, std::string_view key) {
  std::string prefix = std::string(key) + "=";
  if (!line.starts_with(prefix)) return std::nullopt;
  return line.substr(prefix.size());
}
}  // namespace

Result<PackageContents> unpack_package(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto magic = take_line(bytes, pos);
  if (!magic || *magic != "PKGAR1") return Error{"BadPackage", "not a package archive"};

  PackageContents out;
  auto name = take_line(bytes, pos);
  auto version = take_line(bytes, pos);
  auto category = take_line(bytes, pos);
  auto files = take_line(bytes, pos);
  if (!name || !version || !category || !files) return Error{"BadPackage", "truncated header"};

  auto name_v = header_value(*name, "name");
  auto version_v = header_value(*version, "version");
  auto category_v = header_value(*category, "category");
  auto files_v = header_value(*files, "files");
  if (!name_v || !version_v || !category_v || !files_v) {
    return Error{"BadPackage", "malformed header"};
  }
  out.name = *name_v;
  out.version = *version_v;
  auto cat = parse_category(*category_v);
  if (!cat) return Error{"BadPackage", "unknown category: " + *category_v};
  out.category = *cat;

  std::size_t count = 0;
  auto [p, ec] = std::from_chars(files_v->data(), files_v->data() + files_v->size(), count);
  if (ec != std::errc{}) return Error{"BadPackage", "bad file count"};

  for (std::size_t i = 0; i < count; ++i) {
    auto fline = take_line(bytes, pos);
    if (!fline || !fline->starts_with("F ")) return Error{"BadPackage", "missing file header"};
    // F <x|-> <size> <path>; the path is everything after the third space.
    std::string rest = fline->substr(2);
    auto sp1 = rest.find(' ');
    if (sp1 == std::string::npos) return Error{"BadPackage", "malformed file header"};
    std::string mode = rest.substr(0, sp1);
    auto sp2 = rest.find(' ', sp1 + 1);
    if (sp2 == std::string::npos) return Error{"BadPackage", "malformed file header"};
    std::string size_s = rest.substr(sp1 + 1, sp2 - sp1 - 1);
    std::string path = rest.substr(sp2 + 1);
    std::size_t size = 0;
    auto [sp, sec] = std::from_chars(size_s.data(), size_s.data() + size_s.size(), size);
    if (sec != std::errc{} || path.empty()) return Error{"BadPackage", "malformed file header"};
    if (pos + size > bytes.size()) return Error{"BadPackage", "truncated file content"};

    ArchiveEntry entry;
    entry.path = path;
    entry.exec = (mode == "x");
    entry.content.assign(bytes.begin() + pos, bytes.begin() + pos + size);
    pos += size;
    if (pos < bytes.size() && bytes[pos] == '\n') ++pos;
    out.entries.push_back(std::move(entry));
  }
  return out;
}

std::string package_filename(std::string_view name, std::string_view version) {
  return std::string(name) + "-" + std::string(version) + ".pkg";
}

std::optional<std::pair<std::string, std::string>> split_package_filename(
    std::string_view filename) {
  if (!filename.ends_with(".pkg")) return std::nullopt;
  std::string_view stem = filename.substr(0, filename.size() - 4);
  // The version is the suffix after the last '-' that parses as dotted
  // digits; names may themselves contain dashes.
  auto dash = stem.rfind('-');
  if (dash == std::string_view::npos || dash == 0) return std::nullopt;
  std::string_view version = stem.substr(dash + 1);
  if (!version_well_formed(version)) return std::nullopt;
  return std::make_pair(std::string(stem.substr(0, dash)), std::string(version));
}

// --- Manifests ----------------------------------------------------------------

std::string Manifest::serialize() const {
  std::string out;
  for (const ManifestEntry& entry : entries) {
    out += entry.digest_hex + "  " + entry.filename + "\n";
  }
  return out;
}

Result<Manifest> parse_manifest(std::string_view text, DigestAlgorithm algorithm) {
  Manifest manifest;
  manifest.digest_algorithm = algorithm;
  std::set<std::string> seen;
  for (std::string_view raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto sep = line.find("  ");
    if (sep == std::string_view::npos) {
      return Error{"BadManifest", "expected '<digest>  <filename>': " + std::string(line)};
    }
    std::string digest(trim(line.substr(0, sep)));
    std::string filename(trim(line.substr(sep + 2)));
    if (digest.size() != digest_hex_width(algorithm) || !from_hex(digest)) {
      return Error{"BadManifest", "digest width/format mismatch: " + digest};
    }
    if (filename.empty()) return Error{"BadManifest", "empty filename"};
    if (!seen.insert(filename).second) {
      return Error{"BadManifest", "duplicate filename in manifest: " + filename};
    }
    manifest.entries.push_back({std::move(digest), std::move(filename)});
  }
  return manifest;
}

bool is_manifest_filename(std::string_view filename) {
  return filename.ends_with(".md5") || filename.ends_with(".dgst");
}

std::optional<DigestAlgorithm> manifest_algorithm_from_filename(std::string_view filename) {
  if (filename.ends_with(".md5")) return DigestAlgorithm::Md5;
  if (filename.ends_with(".dgst")) return DigestAlgorithm::Sha256;
  return std::nullopt;
}

std::string manifest_filename(std::string_view set_name, DigestAlgorithm alg) {
  return std::string(set_name) + (alg == DigestAlgorithm::Md5 ? ".md5" : ".dgst");
}

// --- Scanning -------------------------------------------------------------------

ScanResult scan_package_path(const std::vector<PathElement>& path, BootLog* log,
                             std::uint64_t epoch, double t) {
  ScanResult result;
  std::vector<FoundSignature> all_signatures;

  int position = 0;
  for (const PathElement& element : path) {
    const media::VirtualMedium* medium = element.medium;
    int pos = position++;
    if (medium == nullptr || !medium->present) {
      result.warnings.push_back("package path element " + std::to_string(pos) +
                                " unreadable, skipped");
      if (log != nullptr) {
        log->append(epoch, t, "scan_skip",
                    {{"position", std::to_string(pos)},
                     {"id", medium != nullptr ? medium->medium_id : "-"}});
      }
      continue;
    }

    std::size_t manifests = 0, signatures = 0, packages = 0;
    for (const std::string& filename : medium->tree.list_dir(element.subdir)) {
      std::string tree_path =
          element.subdir.empty() ? filename : element.subdir + "/" + filename;
      const media::FileNode* node = medium->tree.find(tree_path);
      if (node == nullptr) continue;

      if (auto alg = manifest_algorithm_from_filename(filename)) {
        auto parsed = parse_manifest(to_string(node->content), *alg);
        if (!parsed.ok()) {
          result.warnings.push_back("bad manifest " + filename + " on " + medium->medium_id + ": " +
                                    parsed.error().message);
          continue;
        }
        result.manifests.push_back(
            {parsed.take(), node->content, filename, medium->medium_id, pos});
        ++manifests;
      } else if (auto sig_name = trust::split_signature_filename(filename)) {
        auto parsed = trust::DetachedSignature::parse(to_string(node->content));
        if (!parsed.ok()) {
          result.warnings.push_back("bad signature file " + filename + " on " + medium->medium_id);
          continue;
        }
        all_signatures.push_back({parsed.take(), sig_name->first, filename, medium->medium_id, pos});
        ++signatures;
      } else if (filename.ends_with(".pkg")) {
        auto split_name = split_package_filename(filename);
        if (!split_name) {
          result.warnings.push_back("package with malformed version excluded: " + filename);
          continue;
        }
        FoundPackage pkg;
        pkg.name = split_name->first;
        pkg.version = split_name->second;
        pkg.filename = filename;
        pkg.tree_path = tree_path;
        pkg.payload = node->content;
        pkg.medium_id = medium->medium_id;
        pkg.path_position = pos;
        if (auto contents = unpack_package(node->content); contents.ok()) {
          pkg.category = contents.value().category;
        }
        result.packages.push_back(std::move(pkg));
        ++packages;
      }
    }
    if (log != nullptr) {
      log->append(epoch, t, "scan",
                  {{"position", std::to_string(pos)},
                   {"id", medium->medium_id},
                   {"manifests", std::to_string(manifests)},
                   {"signatures", std::to_string(signatures)},
                   {"packages", std::to_string(packages)}});
    }
  }

  // Signatures whose target manifest name exists nowhere in the path are
  // orphans: recorded, excluded from resolution.
  std::set<std::string> manifest_names;
  for (const FoundManifest& m : result.manifests) manifest_names.insert(m.filename);
  for (FoundSignature& sig : all_signatures) {
    if (manifest_names.count(sig.target_filename) > 0) {
      result.signatures.push_back(std::move(sig));
    } else {
      result.orphan_signatures.push_back(std::move(sig));
    }
  }
  return result;
}

// --- Valid-digest list ------------------------------------------------------------

ValidDigestList build_valid_digest_list(const ScanResult& scan, const trust::Keyring& keyring,
                                        BootLog* log, std::uint64_t epoch, double t) {
  ValidDigestList valid;  // initialized empty
  for (const FoundManifest& found : scan.manifests) {
    std::string validating_key;
    for (const FoundSignature& sig : scan.signatures) {
      if (sig.target_filename != found.filename) continue;
      trust::VerifyResult vr = trust::verify_signature(found.raw, sig.sig, keyring);
      if (vr.valid()) {
        validating_key = vr.key_id;
        break;
      }
    }
    if (log != nullptr) {
      log->append(epoch, t, validating_key.empty() ? "manifest_invalid" : "manifest_valid",
                  {{"file", found.filename},
                   {"medium", found.medium_id},
                   {"key", validating_key.empty() ? "-" : validating_key}});
    }
    if (validating_key.empty()) continue;
    for (const ManifestEntry& entry : found.manifest.entries) {
      valid.digests.insert(entry.digest_hex);
      valid.provenance.emplace(
          entry.digest_hex, DigestProvenance{found.filename, found.medium_id, validating_key,
                                             found.manifest.digest_algorithm});
    }
  }
  return valid;
}

// --- Versions ----------------------------------------------------------------------

bool version_well_formed(std::string_view v) {
  if (v.empty()) return false;
  for (std::string_view part : split(v, '.')) {
    if (!is_all_digits(part)) return false;
  }
  return true;
}

namespace {
std::optional<std::vector<std::uint64_t>> version_components(std::string_view v) {
  if (!version_well_formed(v)) return std::nullopt;
  std::vector<std::uint64_t> out;
  for (std::string_view part : split(v, '.')) {
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), n);
    if (ec != std::errc{}) return std::nullopt;
    out.push_back(n);
  }
  return out;
}
}  // namespace

Result<Ordering> compare_versions(std::string_view a, std::string_view b) {
  auto ca = version_components(a);
  auto cb = version_components(b);
  if (!ca || !cb) {
    return Error{"MalformedVersion",
                 "versions must be dotted digits: '" + std::string(a) + "' vs '" + std::string(b) +
                     "'"};
  }
  std::size_t n = std::max(ca->size(), cb->size());
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t va = i < ca->size() ? (*ca)[i] : 0;  // shorter side zero-padded
    std::uint64_t vb = i < cb->size() ? (*cb)[i] : 0;
    if (va < vb) return Ordering::Less;
    if (va > vb) return Ordering::Greater;
  }
  return Ordering::Equal;
}

// --- Install plan ---------------------------------------------------------------------

bool operator==(const InstallStep& a, const InstallStep& b) {
  return a.name == b.name && a.version == b.version && a.source_medium == b.source_medium &&
         a.category == b.category && a.filename == b.filename && a.digest_hex == b.digest_hex &&
         a.path_position == b.path_position;
}

std::string InstallPlan::render() const {
  std::string out = status == Status::Complete ? "Complete" : "HunkerDown";
  if (!missing.empty()) {
    out += "(";
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i > 0) out += ",";
      out += missing[i];
    }
    out += ")";
  }
  for (const InstallStep& step : steps) {
    out += "\n" + std::string(category_name(step.category)) + " " + step.name + " " + step.version +
           " from " + step.source_medium;
  }
  return out;
}

InstallPlan resolve_install_plan(const std::vector<Required>& required, const ScanResult& scan,
                                 const ValidDigestList& valid, BootLog* log, std::uint64_t epoch,
                                 double t) {
  InstallPlan plan;
  std::set<std::string> planned_names;

  for (const Required& req : required) {
    if (planned_names.count(req.name) > 0) continue;  // one step per name

    const FoundPackage* best = nullptr;
    std::string best_digest;
    for (const FoundPackage& candidate : scan.packages) {
      if (candidate.name != req.name) continue;
      if (!version_well_formed(candidate.version)) continue;

      // A candidate counts only when its payload digest appears in the
      // valid list under whichever algorithm validated a manifest.
      std::string matched_digest;
      for (DigestAlgorithm alg : {DigestAlgorithm::Sha256, DigestAlgorithm::Md5}) {
        std::string hex = digest_hex(alg, candidate.payload);
        if (valid.contains(hex)) {
          matched_digest = hex;
          break;
        }
      }
      if (matched_digest.empty()) {
        if (log != nullptr) {
          log->append(epoch, t, "candidate_invalid",
                      {{"name", candidate.name},
                       {"version", candidate.version},
                       {"medium", candidate.medium_id}});
        }
        continue;
      }

      if (best == nullptr) {
        best = &candidate;
        best_digest = matched_digest;
        continue;
      }
      auto cmp = compare_versions(candidate.version, best->version);
      if (!cmp.ok()) continue;
      bool better = false;
      if (cmp.value() == Ordering::Greater) {
        // A command to install a lower version is replaced.
        better = true;
      } else if (cmp.value() == Ordering::Equal) {
        // Ties break to the earliest package-path position, then stay
        // deterministic on filename and digest.
        if (candidate.path_position != best->path_position) {
          better = candidate.path_position < best->path_position;
        } else if (candidate.filename != best->filename) {
          better = candidate.filename < best->filename;
        } else {
          better = matched_digest < best_digest;
        }
      }
      if (better) {
        best = &candidate;
        best_digest = matched_digest;
      }
    }

    if (best == nullptr) {
      plan.missing.push_back(req.name);
      continue;
    }
    InstallStep step;
    step.name = best->name;
    step.version = best->version;
    step.source_medium = best->medium_id;
    step.category = req.category;
    step.filename = best->filename;
    step.tree_path = best->tree_path;
    step.digest_hex = best_digest;
    step.path_position = best->path_position;
    plan.steps.push_back(std::move(step));
    planned_names.insert(req.name);
  }

  if (!plan.missing.empty()) {
    // One unverifiable required package aborts the whole boot; partial
    // installs are worthless.
    plan.status = InstallPlan::Status::HunkerDown;
    plan.steps.clear();
  } else {
    plan.status = InstallPlan::Status::Complete;
    std::stable_sort(plan.steps.begin(), plan.steps.end(),
                     [](const InstallStep& a, const InstallStep& b) {
                       return static_cast<int>(a.category) < static_cast<int>(b.category);
                     });
  }
  if (log != nullptr) {
    LogFields fields{{"status", plan.complete() ? "Complete" : "HunkerDown"}};
    if (!plan.missing.empty()) {
      std::string names;
      for (const std::string& name : plan.missing) {
        if (!names.empty()) names += ",";
        names += name;
      }
      fields.emplace_back("missing", names);
    }
    log->append(epoch, t, "plan_resolved", std::move(fields));
    for (const InstallStep& step : plan.steps) {
      log->append(epoch, t, "plan_step",
                  {{"category", std::string(category_name(step.category))},
                   {"name", step.name},
                   {"version", step.version},
                   {"source", step.source_medium}});
    }
  }
  return plan;
}

}  // namespace everboot::resolve

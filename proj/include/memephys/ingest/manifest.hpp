// Copyright (c) 2026 The memephys Authors. All Rights Reserved.
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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memephys/core/types.hpp"

namespace memephys::ingest {

/// Manifest: one trial per NDJSON line; signal paths relative to the
/// manifest's directory.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<Trial> trials;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
};

/// Parses and validates every line. ParseError carries the 1-based line
/// number, ValidationError the trial_id, MissingFile the unresolved path.
Manifest load_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const std::vector<Trial>& trials);

nlohmann::json trial_to_json(const Trial& trial);
Trial trial_from_json(const nlohmann::json& j);

}  // namespace memephys::ingest

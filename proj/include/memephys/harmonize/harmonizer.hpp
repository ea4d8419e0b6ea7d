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

#include "memephys/features/table.hpp"
#include "memephys/harmonize/combat.hpp"
#include "memephys/harmonize/transforms.hpp"

namespace memephys::harmonize {

struct HarmonizeOptions {
  /// Harmonize ET/HR/RT columns too; by default only eeg_* columns are.
  bool include_behavioral = false;
  double winsor_lo = 0.01;
  double winsor_hi = 0.99;
};

/// Box-Cox -> ComBat (batch = subject_id) -> winsorize -> robust z, fitted
/// in that order on the training rows. Per-feature vectors follow
/// `features`; `dropped` lists features that were constant, empty, or had
/// zero MAD on the training rows and are removed by apply.
struct HarmonizeParams {
  HarmonizeOptions options;
  std::vector<std::string> features;
  std::vector<std::string> dropped;
  std::vector<BoxCox> boxcox;
  ComBatParams combat;
  std::vector<WinsorLimits> winsor;
  std::vector<RobustScale> robust;

  bool is_dropped(const std::string& name) const;
};

HarmonizeParams fit_harmonizer(const features::FeatureTable& train, const HarmonizeOptions& opts = {});

/// Harmonized copy of `table`: selected columns transformed, dropped
/// columns removed, everything else passed through. Rows are transformed
/// independently, so held-out rows never influence each other.
features::FeatureTable apply_harmonizer(const HarmonizeParams& params, const features::FeatureTable& table);

/// Individual stages, for tests and diagnostics. Each maps the selected
/// columns (in `features` order) of every row.
std::vector<std::vector<double>> select_columns(const features::FeatureTable& table,
                                                const std::vector<std::string>& names);
std::vector<std::string> batch_labels(const features::FeatureTable& table);

nlohmann::json harmonize_params_to_json(const HarmonizeParams& p);
HarmonizeParams harmonize_params_from_json(const nlohmann::json& j);
void save_harmonize_params(const std::filesystem::path& path, const HarmonizeParams& p);
HarmonizeParams load_harmonize_params(const std::filesystem::path& path);

}  // namespace memephys::harmonize

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

#include <cstddef>
#include <string>
#include <vector>

namespace memephys::harmonize {

/// Fitted parametric empirical-Bayes ComBat. Indexing is [batch][feature];
/// `fitted` is false where a batch had fewer than two finite values for a
/// feature, and such cells (like batches never seen in fitting) pass
/// through apply unchanged.
struct ComBatParams {
  std::vector<std::string> batches;
  std::vector<double> grand_mean;  // per feature
  std::vector<double> pooled_sd;   // per feature
  std::vector<std::vector<double>> gamma_star;
  std::vector<std::vector<double>> delta_sq_star;
  std::vector<std::vector<bool>> fitted;
  std::size_t iterations = 0;  // largest EB iteration count over batches

  std::ptrdiff_t batch_index(const std::string& b) const;
};

struct ComBatOptions {
  double tolerance = 1e-4;
  std::size_t max_iter = 100;
  /// Skip batch/feature cells with fewer than two finite values instead of
  /// failing with SingletonBatch.
  bool skip_small_batches = false;
};

/// rows: [row][feature], NaN for missing. Throws SingletonBatch unless at
/// least two batches each have two or more rows, NonConvergence when the EB
/// iteration does not settle.
ComBatParams combat_fit(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& batch,
                        const ComBatOptions& opts = {});

/// Returns corrected rows; missing values stay missing.
std::vector<std::vector<double>> combat_apply(const ComBatParams& p, const std::vector<std::vector<double>>& rows,
                                              const std::vector<std::string>& batch);

}  // namespace memephys::harmonize

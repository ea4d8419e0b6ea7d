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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace memephys::eval {

struct FoldPlan {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> folds;  // meme ids, sorted within a fold

  /// Fold index per meme id.
  std::map<std::string, std::size_t> assignment() const;
};

/// Meme-level stratified partition: memes of each stratum are shuffled and
/// dealt round-robin, continuing across strata. Needs >= k memes per
/// stratum (TooFewExamples).
FoldPlan make_folds(const std::vector<std::string>& meme_ids, const std::vector<int>& strata, std::size_t k,
                    std::uint64_t seed);

/// Stratified hold-out of about `fraction` of `idx` (at least one per
/// stratum with two or more members). Returns {train, val}.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(const std::vector<std::size_t>& idx,
                                                                                const std::vector<int>& strata,
                                                                                double fraction, std::uint64_t seed);

}  // namespace memephys::eval

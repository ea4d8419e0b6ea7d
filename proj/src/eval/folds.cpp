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

#include "memephys/eval/folds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "memephys/error.hpp"
#include "memephys/util/rng.hpp"

namespace memephys::eval {

std::map<std::string, std::size_t> FoldPlan::assignment() const {
  std::map<std::string, std::size_t> a;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const auto& m : folds[f]) a[m] = f;
  }
  return a;
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

}  // namespace

FoldPlan make_folds(const std::vector<std::string>& meme_ids, const std::vector<int>& strata, std::size_t k,
                    std::uint64_t seed) {
  if (meme_ids.size() != strata.size()) throw Error(ErrorCode::ShapeMismatch, "one stratum per meme");
  if (k < 2) throw Error(ErrorCode::ConfigError, "k must be >= 2");
  if (std::set<std::string>(meme_ids.begin(), meme_ids.end()).size() != meme_ids.size()) {
    throw Error(ErrorCode::ValidationError, "duplicate meme ids in fold input");
  }
  std::map<int, std::vector<std::string>> by_stratum;
  for (std::size_t i = 0; i < meme_ids.size(); ++i) by_stratum[strata[i]].push_back(meme_ids[i]);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);
  const Rng root = Rng(seed).derive("folds");
  std::size_t next = 0;
  for (auto& [s, ids] : by_stratum) {
    if (ids.size() < k) {
      throw Error(ErrorCode::TooFewExamples, "stratum " + std::to_string(s) + " has " + std::to_string(ids.size()) +
                                                 " memes, fewer than k = " + std::to_string(k));
    }
    std::sort(ids.begin(), ids.end());
    Rng r = root.derive("stratum", static_cast<std::uint64_t>(s));
    shuffle(ids, r);
    for (const auto& id : ids) {
      plan.folds[next].push_back(id);
      next = (next + 1) % k;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(const std::vector<std::size_t>& idx,
                                                                                const std::vector<int>& strata,
                                                                                double fraction, std::uint64_t seed) {
  if (idx.size() != strata.size()) throw Error(ErrorCode::ShapeMismatch, "one stratum per index");
  std::map<int, std::vector<std::size_t>> by;
  for (std::size_t i = 0; i < idx.size(); ++i) by[strata[i]].push_back(idx[i]);
  std::vector<std::size_t> train, val;
  const Rng root = Rng(seed).derive("holdout");
  for (auto& [s, members] : by) {
    Rng r = root.derive("stratum", static_cast<std::uint64_t>(s));
    shuffle(members, r);
    std::size_t n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    if (members.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, members.size() - 1);
    else n_val = 0;
    val.insert(val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {train, val};
}

}  // namespace memephys::eval

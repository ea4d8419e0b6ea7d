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

#include "memephys/error.hpp"

namespace memephys::eval {

template <typename Metric>
Interval bootstrap_ci(std::size_t n, Metric&& metric, std::size_t n_resamples, double level, Rng rng) {
  if (n < 2) throw Error(ErrorCode::TooFew, "bootstrap needs at least 2 examples");
  std::vector<double> values;
  values.reserve(n_resamples);
  std::vector<std::size_t> idx(n);
  std::size_t redraws = 0;
  while (values.size() < n_resamples) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_index(n));
    try {
      values.push_back(metric(idx));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClass || ++redraws > 100 * n_resamples) throw;
    }
  }
  return percentile_interval(std::move(values), level);
}

}  // namespace memephys::eval
